"""Trace-driven per-segment control loop, run summaries and bandwidth sweeps."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .cost_model import DEFAULT_BANDWIDTH_BPS, LatencyBreakdown, SimulationConfig
from .errors import ConfigurationError
from .optimizer import AnnealerParams
from .policies import ALL_POLICIES, PolicyKind, evaluate, select
from .profile import Configuration, SystemProfile

DEFAULT_SWEEP_BPS = tuple(x * 1e6 for x in (2, 5, 10, 20, 30, 50, 100))


@dataclass(frozen=True)
class BandwidthTrace:
    """Per-segment available bitrate.

    With ``cyclic=True`` a trace shorter than the run repeats from its start.
    """

    bitrates_bps: tuple[float, ...]
    cyclic: bool = False

    def __post_init__(self):
        values = tuple(float(b) for b in self.bitrates_bps)
        object.__setattr__(self, "bitrates_bps", values)
        if not values:
            raise ConfigurationError("bandwidth trace is empty")
        for i, b in enumerate(values):
            if not (math.isfinite(b) and b > 0):
                raise ConfigurationError(f"bandwidth trace entry {i} must be positive, got {b!r}")

    @classmethod
    def constant(cls, bitrate_bps: float = DEFAULT_BANDWIDTH_BPS, length: int = 1) -> "BandwidthTrace":
        return cls((bitrate_bps,) * length, cyclic=True)

    def __len__(self):
        return len(self.bitrates_bps)

    def check_covers(self, segment_count: int):
        if not self.cyclic and len(self) < segment_count:
            raise ConfigurationError(
                f"trace has {len(self)} entries but {segment_count} segments requested "
                "(pass cyclic=True to repeat it)"
            )

    def at(self, t: int) -> float:
        """Bitrate for 1-based segment ``t``."""
        return self.bitrates_bps[(t - 1) % len(self)]


def load_trace(path, cyclic: bool = False) -> BandwidthTrace:
    return parse_trace(Path(path).read_text(), cyclic=cyclic)


def parse_trace(text: str, cyclic: bool = False) -> BandwidthTrace:
    """Parse a ``segment_index,bitrate_bps`` CSV (header required)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["segment_index", "bitrate_bps"]:
        raise ConfigurationError(f"trace header must be 'segment_index,bitrate_bps', got {reader.fieldnames}")
    rows = []
    for line, row in enumerate(reader, start=2):
        try:
            rows.append((int(row["segment_index"]), float(row["bitrate_bps"])))
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"trace line {line}: {exc}") from None
    idx = [r[0] for r in rows]
    if idx != list(range(1, len(rows) + 1)) and idx != list(range(len(rows))):
        raise ConfigurationError("trace segment_index must be consecutive starting at 0 or 1")
    return BandwidthTrace(tuple(r[1] for r in rows), cyclic=cyclic)


def trace_to_csv(trace: BandwidthTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["segment_index", "bitrate_bps"])
    for t, b in enumerate(trace.bitrates_bps, start=1):
        w.writerow([t, repr(b)])
    return buf.getvalue()


@dataclass(frozen=True)
class SegmentResult:
    segment_index: int
    policy: str
    configuration: Configuration
    qp: int | None
    scale_ratio: float
    bandwidth_bps: float
    accuracy: float
    latency: LatencyBreakdown
    datasize_bits: float
    utility_value: float
    feasible: bool
    evaluations: int


@dataclass(frozen=True)
class RunSummary:
    policy: str
    segments: int
    mean_accuracy: float
    mean_latency_s: float
    mean_transmit_s: float
    mean_datasize_bits: float
    total_utility: float
    feasibility_rate: float

    @classmethod
    def from_results(cls, policy: str, results: Sequence[SegmentResult]) -> "RunSummary":
        n = len(results)
        return cls(
            policy=policy,
            segments=n,
            mean_accuracy=math.fsum(r.accuracy for r in results) / n,
            mean_latency_s=math.fsum(r.latency.total_s for r in results) / n,
            mean_transmit_s=math.fsum(r.latency.transmit_s for r in results) / n,
            mean_datasize_bits=math.fsum(r.datasize_bits for r in results) / n,
            total_utility=math.fsum(r.utility_value for r in results),
            feasibility_rate=sum(r.feasible for r in results) / n,
        )


def _segment(t, policy, profile, sim, bandwidth, annealer, oracle):
    seeded = replace(annealer, rng_seed=annealer.rng_seed + t)
    outcome = select(policy, profile, sim, bandwidth, seeded, oracle=oracle)
    cfg = outcome.configuration
    ev = evaluate(policy, cfg, profile, sim, bandwidth)
    on_device = cfg.quality_index < 0
    return SegmentResult(
        segment_index=t,
        policy=str(policy),
        configuration=cfg,
        qp=None if on_device else profile.quality.qp_values[cfg.quality_index],
        scale_ratio=profile.enhancement.scale_ratios[cfg.enhancement_index],
        bandwidth_bps=bandwidth,
        accuracy=ev.accuracy,
        latency=ev.latency,
        datasize_bits=ev.datasize_bits,
        utility_value=ev.utility_value,
        feasible=ev.feasible,
        evaluations=outcome.evaluations,
    )


def run_simulation(
    profile: SystemProfile | Sequence[SystemProfile],
    sim: SimulationConfig,
    trace: BandwidthTrace,
    policy: PolicyKind,
    annealer: AnnealerParams | None = None,
    *,
    oracle: bool = False,
    workers: int = 1,
) -> tuple[list[SegmentResult], RunSummary]:
    """Run ``sim.segment_count`` segments under one policy.

    ``profile`` may be a list with one profile per segment to model content
    changes. Segment ``t`` (1-based) anneals with seed ``annealer.rng_seed + t``,
    so results do not depend on ``workers``.
    """
    annealer = annealer or AnnealerParams()
    T = sim.segment_count
    trace.check_covers(T)
    if isinstance(profile, SystemProfile):
        profiles = [profile] * T
    else:
        profiles = list(profile)
        if len(profiles) != T:
            raise ConfigurationError(f"got {len(profiles)} per-segment profiles for {T} segments")

    def one(t):
        return _segment(t, policy, profiles[t - 1], sim, trace.at(t), annealer, oracle)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(1, T + 1)))
    else:
        results = [one(t) for t in range(1, T + 1)]
    return results, RunSummary.from_results(str(policy), results)


@dataclass(frozen=True)
class SweepRow:
    bitrate_bps: float
    policy: str
    mean_accuracy: float
    mean_latency_s: float
    feasibility_rate: float
    mean_transmit_s: float
    mean_datasize_bits: float
    total_utility: float


def sweep_bandwidth(
    profile: SystemProfile,
    sim: SimulationConfig,
    bitrates: Sequence[float] = DEFAULT_SWEEP_BPS,
    policies: Sequence[PolicyKind] = (),
    annealer: AnnealerParams | None = None,
    *,
    oracle: bool = False,
    workers: int = 1,
) -> list[SweepRow]:
    bitrates = list(bitrates)
    if not bitrates:
        raise ConfigurationError("sweep needs at least one bitrate")
    if any(not b > 0 for b in bitrates):
        raise ConfigurationError("sweep bitrates must be positive")
    policies = list(policies) or list(ALL_POLICIES)
    points = [(b, p) for b in bitrates for p in policies]

    def one(point):
        b, p = point
        _, s = run_simulation(profile, sim, BandwidthTrace.constant(b), p, annealer, oracle=oracle)
        return SweepRow(b, s.policy, s.mean_accuracy, s.mean_latency_s, s.feasibility_rate,
                        s.mean_transmit_s, s.mean_datasize_bits, s.total_utility)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, points))
    return [one(pt) for pt in points]
