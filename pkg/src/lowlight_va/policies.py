"""Selection policies: the annealing-based proposal and three baselines.

``select`` picks a configuration; ``evaluate`` turns that choice into the
accuracy, latency breakdown and datasize the simulator records. OnDevice
bypasses the network entirely and reports ``ON_DEVICE_QUALITY`` as its
quality index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cost_model import LatencyBreakdown, SimulationConfig, total_latency, utility_from
from .errors import ParameterError
from .optimizer import AnnealerParams, SelectionOutcome, brute_force_select, sa_select
from .profile import Configuration, SystemProfile

ON_DEVICE_QUALITY = -1


class PolicyName(str, Enum):
    PROPOSED = "proposed"
    NO_ENHANCE = "no-enhance"
    GREEDY = "greedy"
    ON_DEVICE = "on-device"


@dataclass(frozen=True)
class OnDeviceParams:
    """Device-side detection model.

    ``device_flops_per_s=None`` means one twentieth of the edge throughput.
    """

    device_flops_per_s: float | None = None
    device_flops_per_frame: float = 1e11
    accuracy_penalty: float = 0.85

    def __post_init__(self):
        if self.device_flops_per_s is not None and not self.device_flops_per_s > 0:
            raise ParameterError("device_flops_per_s", "must be positive")
        if not self.device_flops_per_frame >= 0:
            raise ParameterError("device_flops_per_frame", "must be nonnegative")
        if not 0 < self.accuracy_penalty <= 1:
            raise ParameterError("accuracy_penalty", "must lie in (0, 1]")

    def throughput(self, sim: SimulationConfig) -> float:
        if self.device_flops_per_s is None:
            return sim.edge_flops_per_s / 20.0
        return self.device_flops_per_s


@dataclass(frozen=True)
class PolicyKind:
    name: PolicyName
    on_device: OnDeviceParams | None = None

    def __post_init__(self):
        object.__setattr__(self, "name", PolicyName(self.name))
        if self.name is PolicyName.ON_DEVICE and self.on_device is None:
            object.__setattr__(self, "on_device", OnDeviceParams())
        elif self.name is not PolicyName.ON_DEVICE and self.on_device is not None:
            raise ParameterError("on_device", "only valid for the on-device policy")

    @classmethod
    def parse(cls, name: str) -> "PolicyKind":
        try:
            return cls(PolicyName(name.strip().lower()))
        except ValueError:
            choices = ", ".join(p.value for p in PolicyName)
            raise ParameterError("policy", f"unknown policy {name!r}; choose from {choices}") from None

    def __str__(self):
        return self.name.value


ALL_POLICIES = tuple(PolicyKind(p) for p in PolicyName)


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    latency: LatencyBreakdown
    datasize_bits: float
    utility_value: float
    feasible: bool


def _on_device_latency(params: OnDeviceParams, sim: SimulationConfig) -> LatencyBreakdown:
    compute = sim.frames_per_segment * params.device_flops_per_frame / params.throughput(sim)
    return LatencyBreakdown(0.0, 0.0, 0.0, 0.0, compute + sim.inference_latency_s)


def _on_device_accuracy(params: OnDeviceParams, profile: SystemProfile) -> float:
    return profile.accuracy[0][0] * params.accuracy_penalty


def evaluate(
    policy: PolicyKind,
    cfg: Configuration,
    profile: SystemProfile,
    sim: SimulationConfig,
    bandwidth_bps: float,
) -> Evaluation:
    if policy.name is PolicyName.ON_DEVICE:
        latency = _on_device_latency(policy.on_device, sim)
        acc = _on_device_accuracy(policy.on_device, profile)
        datasize = 0.0
    else:
        latency = total_latency(cfg, profile, sim, bandwidth_bps)
        acc = profile.accuracy[cfg.quality_index][cfg.enhancement_index]
        datasize = profile.datasize_bits[cfg.quality_index]
    total = latency.total_s
    return Evaluation(
        accuracy=acc,
        latency=latency,
        datasize_bits=datasize,
        utility_value=utility_from(acc, total, sim.lambda_weight),
        feasible=total <= sim.latency_budget_s,
    )


def _no_enhance(profile, sim, bandwidth_bps):
    best = None
    fallback = None
    m, _ = profile.shape
    for i in range(m):
        cfg = Configuration(i, 0)
        lat = total_latency(cfg, profile, sim, bandwidth_bps).total_s
        u = utility_from(profile.accuracy[i][0], lat, sim.lambda_weight)
        if lat <= sim.latency_budget_s and (best is None or u > best[1]):
            best = (cfg, u)
        if fallback is None or lat < fallback[2]:
            fallback = (cfg, u, lat)
    if best is not None:
        return SelectionOutcome(best[0], best[1], True, m)
    return SelectionOutcome(fallback[0], fallback[1], False, m)


def select(
    policy: PolicyKind,
    profile: SystemProfile,
    sim: SimulationConfig,
    bandwidth_bps: float,
    annealer: AnnealerParams | None = None,
    oracle: bool = False,
) -> SelectionOutcome:
    """Choose a configuration under ``policy``.

    With ``oracle=True`` the proposed policy uses exhaustive search instead of
    annealing, which gives the exact upper bound on its utility.
    """
    name = policy.name
    if name is PolicyName.PROPOSED:
        if oracle:
            return brute_force_select(profile, sim, bandwidth_bps)
        return sa_select(profile, sim, bandwidth_bps, annealer)
    if name is PolicyName.NO_ENHANCE:
        return _no_enhance(profile, sim, bandwidth_bps)
    if name is PolicyName.GREEDY:
        m, n1 = profile.shape
        cfg = Configuration(0, n1 - 1)
        ev = evaluate(policy, cfg, profile, sim, bandwidth_bps)
        return SelectionOutcome(cfg, ev.utility_value, ev.feasible, 1)
    cfg = Configuration(ON_DEVICE_QUALITY, 0)
    ev = evaluate(policy, cfg, profile, sim, bandwidth_bps)
    return SelectionOutcome(cfg, ev.utility_value, ev.feasible, 1)
