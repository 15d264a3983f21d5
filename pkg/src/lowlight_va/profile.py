"""Configuration space and empirical lookup tables.

A :class:`SystemProfile` bundles both ladders with the five tables the cost
model reads: accuracy per (quality, enhancement) cell, encoded datasize,
per-frame enhancement FLOPs, and encode/decode latency. Profiles are either
generated from :class:`SyntheticProfileParams` or loaded from a JSON profile
document (see :func:`save_profile` for the layout).
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import ParameterError, ProfileParseError, ProfileValidationError

SCHEMA_VERSION = 1

DEFAULT_QP_VALUES = (7, 12, 17, 22, 27, 32, 37, 42, 47)
DEFAULT_SCALE_RATIOS = (0.0, 0.25, 0.5, 0.75, 1.0)

CSV_COLUMNS = (
    "qp",
    "scale_ratio",
    "accuracy",
    "datasize_bits",
    "flops_per_frame",
    "encode_latency_s",
    "decode_latency_s",
)


@dataclass(frozen=True)
class QualityLadder:
    qp_values: tuple[int, ...] = DEFAULT_QP_VALUES

    def __post_init__(self):
        values = tuple(self.qp_values)
        object.__setattr__(self, "qp_values", values)
        if not values:
            raise ParameterError("qp_values", "ladder must have at least one level")
        for i, qp in enumerate(values):
            if isinstance(qp, bool) or not isinstance(qp, int):
                raise ParameterError("qp_values", f"entry {i} is not an integer: {qp!r}")
            if not 0 <= qp <= 51:
                raise ParameterError("qp_values", f"entry {i} outside [0, 51]: {qp}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ParameterError("qp_values", "must be strictly increasing")

    def __len__(self):
        return len(self.qp_values)

    @property
    def q_min(self) -> int:
        return self.qp_values[0]


@dataclass(frozen=True)
class EnhancementLadder:
    scale_ratios: tuple[float, ...] = DEFAULT_SCALE_RATIOS

    def __post_init__(self):
        values = tuple(float(v) for v in self.scale_ratios)
        object.__setattr__(self, "scale_ratios", values)
        if not values:
            raise ParameterError("scale_ratios", "ladder must have at least one level")
        if values[0] != 0.0:
            raise ParameterError("scale_ratios", "first ratio must be exactly 0 (no enhancement)")
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ParameterError("scale_ratios", "ratios must lie in [0, 1]")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ParameterError("scale_ratios", "must be strictly increasing")

    def __len__(self):
        return len(self.scale_ratios)


@dataclass(frozen=True, order=True)
class Configuration:
    """A (quality_index, enhancement_index) pair. Index 0 of quality is the lowest QP."""

    quality_index: int
    enhancement_index: int


def _as_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SystemProfile:
    quality: QualityLadder
    enhancement: EnhancementLadder
    accuracy: tuple[tuple[float, ...], ...]
    datasize_bits: tuple[float, ...]
    flops_per_frame: tuple[float, ...]
    encode_latency_s: tuple[float, ...]
    decode_latency_s: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "accuracy", tuple(_as_tuple(row) for row in self.accuracy))
        for name in ("datasize_bits", "flops_per_frame", "encode_latency_s", "decode_latency_s"):
            object.__setattr__(self, name, _as_tuple(getattr(self, name)))
        self._validate()

    def _validate(self):
        m, n1 = len(self.quality), len(self.enhancement)
        if len(self.accuracy) != m:
            raise ProfileValidationError(f"accuracy has {len(self.accuracy)} rows, expected {m}")
        for i, row in enumerate(self.accuracy):
            if len(row) != n1:
                raise ProfileValidationError(
                    f"accuracy row has {len(row)} columns, expected {n1}", (i,)
                )
        for name, expected in (
            ("datasize_bits", m),
            ("flops_per_frame", n1),
            ("encode_latency_s", m),
            ("decode_latency_s", m),
        ):
            got = len(getattr(self, name))
            if got != expected:
                raise ProfileValidationError(f"{name} has length {got}, expected {expected}")

        for name in ("datasize_bits", "flops_per_frame", "encode_latency_s", "decode_latency_s"):
            for i, v in enumerate(getattr(self, name)):
                if not math.isfinite(v) or v < 0:
                    raise ProfileValidationError(f"{name} must be finite and nonnegative", (i,))
        for i, row in enumerate(self.accuracy):
            for j, a in enumerate(row):
                if not 0.0 <= a <= 1.0:
                    raise ProfileValidationError("accuracy outside [0, 1]", (i, j))

        d = self.datasize_bits
        for i in range(m - 1):
            if not d[i + 1] < d[i]:
                raise ProfileValidationError("datasize not strictly decreasing", (i, i + 1))
        w = self.flops_per_frame
        if w[0] != 0.0:
            raise ProfileValidationError("flops_per_frame[0] must be 0 (no enhancement)", (0,))
        for j in range(n1 - 1):
            if w[j + 1] < w[j]:
                raise ProfileValidationError("flops_per_frame not non-decreasing", (j, j + 1))
        e = self.encode_latency_s
        for i in range(m - 1):
            if e[i + 1] > e[i]:
                raise ProfileValidationError("encode latency not non-increasing", (i, i + 1))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.quality), len(self.enhancement)

    def configurations(self):
        """All configurations in (quality_index, enhancement_index) lexicographic order."""
        m, n1 = self.shape
        for i in range(m):
            for j in range(n1):
                yield Configuration(i, j)

    def qp(self, cfg: Configuration) -> int:
        return self.quality.qp_values[cfg.quality_index]

    def scale(self, cfg: Configuration) -> float:
        return self.enhancement.scale_ratios[cfg.enhancement_index]


# --------------------------------------------------------------------------
# synthetic generation


@dataclass(frozen=True)
class SyntheticProfileParams:
    """Knobs of the parametric profile generator.

    Accuracy is ``clamp(base(q) + gain(q) * s(k), 0, 1)`` where ``base`` is a
    tent peaking at ``peak_qp``, ``gain`` equals ``max_gain`` up to
    ``pivot_qp`` and falls linearly below zero past it, and
    ``s(k) = k ** gain_exponent`` (concave for exponents below 1).
    ``accuracy_jitter`` adds seeded uniform noise in ``[-jitter, +jitter]``;
    it is zero by default so the tables are exactly the closed-form shapes.
    """

    d_max_bits: float = 12e6
    qp_halving_step: float = 6.0
    w_full_flops: float = 4e11
    flops_exponent: float = 2.0
    peak_qp: float = 17.0
    peak_accuracy: float = 0.58
    low_qp_slope: float = 0.004
    high_qp_slope: float = 0.008
    max_gain: float = 0.10
    pivot_qp: float = 29.5
    negative_gain_slope: float = 0.012
    gain_exponent: float = 0.5
    encode_base_s: float = 0.06
    encode_slope_s: float = 0.001
    encode_floor_s: float = 0.01
    decode_base_s: float = 0.03
    decode_slope_s: float = 0.0005
    decode_floor_s: float = 0.005
    accuracy_jitter: float = 0.0
    rng_seed: int = 0

    def validate(self, quality: QualityLadder):
        positive = (
            "d_max_bits",
            "qp_halving_step",
            "w_full_flops",
            "flops_exponent",
            "peak_accuracy",
            "low_qp_slope",
            "high_qp_slope",
            "max_gain",
            "negative_gain_slope",
            "encode_floor_s",
            "decode_floor_s",
        )
        for name in positive:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(name, f"must be positive, got {v!r}")
        for name in ("encode_base_s", "encode_slope_s", "decode_base_s", "decode_slope_s", "accuracy_jitter"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ParameterError(name, f"must be nonnegative, got {v!r}")
        if not 0 < self.gain_exponent <= 1:
            raise ParameterError("gain_exponent", "must lie in (0, 1] so s(k) is concave")
        if self.peak_accuracy > 1:
            raise ParameterError("peak_accuracy", "must not exceed 1")
        lo, hi = quality.qp_values[0], quality.qp_values[-1]
        if not lo <= self.pivot_qp <= hi:
            raise ParameterError("pivot_qp", f"{self.pivot_qp} outside ladder range [{lo}, {hi}]")
        if not lo <= self.peak_qp <= hi:
            raise ParameterError("peak_qp", f"{self.peak_qp} outside ladder range [{lo}, {hi}]")

    def base_accuracy(self, qp: float) -> float:
        below = max(0.0, self.peak_qp - qp)
        above = max(0.0, qp - self.peak_qp)
        return self.peak_accuracy - self.low_qp_slope * below - self.high_qp_slope * above

    def enhancement_gain(self, qp: float) -> float:
        if qp <= self.pivot_qp:
            return self.max_gain
        return -self.negative_gain_slope * (qp - self.pivot_qp)

    def scale_response(self, k: float) -> float:
        return k**self.gain_exponent if k > 0 else 0.0


# Ranges over which every shape guarantee holds on the default QP ladder:
# base accuracy stays inside (0, 1) everywhere, the peak lands on an interior
# ladder point, and jitter is smaller than the narrowest sign margin.
SHAPE_SAFE_RANGES = {
    "d_max_bits": (1e5, 1e8),
    "qp_halving_step": (3.0, 10.0),
    "w_full_flops": (1e9, 1e12),
    "flops_exponent": (1.0, 3.0),
    "peak_qp": (12.0, 27.0),
    "peak_accuracy": (0.45, 0.75),
    "low_qp_slope": (0.002, 0.01),
    "high_qp_slope": (0.002, 0.01),
    "max_gain": (0.03, 0.2),
    "pivot_qp": (27.5, 31.5),
    "negative_gain_slope": (0.004, 0.02),
    "gain_exponent": (0.3, 1.0),
    "accuracy_jitter": (0.0, 0.0005),
}


def sample_params(rng: random.Random) -> SyntheticProfileParams:
    """Draw parameters uniformly from :data:`SHAPE_SAFE_RANGES`."""
    kwargs = {name: rng.uniform(lo, hi) for name, (lo, hi) in SHAPE_SAFE_RANGES.items()}
    return SyntheticProfileParams(**kwargs, rng_seed=rng.randrange(2**31))


def generate_synthetic_profile(
    params: SyntheticProfileParams | None = None,
    quality: QualityLadder | None = None,
    enhancement: EnhancementLadder | None = None,
) -> SystemProfile:
    params = params or SyntheticProfileParams()
    quality = quality or QualityLadder()
    enhancement = enhancement or EnhancementLadder()
    params.validate(quality)

    rng = random.Random(params.rng_seed)
    q_min = quality.q_min
    qps = quality.qp_values
    ks = enhancement.scale_ratios

    datasize = [params.d_max_bits * 2.0 ** (-(q - q_min) / params.qp_halving_step) for q in qps]
    flops = [params.w_full_flops * k**params.flops_exponent if k > 0 else 0.0 for k in ks]
    encode = [max(params.encode_floor_s, params.encode_base_s - params.encode_slope_s * (q - q_min)) for q in qps]
    decode = [max(params.decode_floor_s, params.decode_base_s - params.decode_slope_s * (q - q_min)) for q in qps]

    accuracy = []
    for q in qps:
        base = params.base_accuracy(q)
        gain = params.enhancement_gain(q)
        row = []
        for k in ks:
            a = base + gain * params.scale_response(k)
            if params.accuracy_jitter:
                a += rng.uniform(-params.accuracy_jitter, params.accuracy_jitter)
            row.append(min(1.0, max(0.0, a)))
        accuracy.append(row)

    return SystemProfile(
        quality=quality,
        enhancement=enhancement,
        accuracy=accuracy,
        datasize_bits=datasize,
        flops_per_frame=flops,
        encode_latency_s=encode,
        decode_latency_s=decode,
    )


def shape_report(profile: SystemProfile, pivot_qp: float | None = None) -> dict[str, bool]:
    """Check the qualitative accuracy shapes a profile is expected to show.

    Returns a mapping of check name to pass flag. The sign-flip check needs
    the pivot QP; without it the check is reported against QP 22/27 versus
    32/37 when those values are on the ladder.
    """
    m, n1 = profile.shape
    qps = profile.quality.qp_values
    col0 = [row[0] for row in profile.accuracy]
    peak = max(range(m), key=lambda i: (col0[i], -i))
    report = {
        "interior_peak": 0 < peak < m - 1 and col0[0] < col0[peak],
        "datasize_decreasing": all(b < a for a, b in zip(profile.datasize_bits, profile.datasize_bits[1:])),
        "flops_zero_at_k0": profile.flops_per_frame[0] == 0.0,
        "flops_non_decreasing": all(b >= a for a, b in zip(profile.flops_per_frame, profile.flops_per_frame[1:])),
        "encode_non_increasing": all(b <= a for a, b in zip(profile.encode_latency_s, profile.encode_latency_s[1:])),
    }
    if n1 > 1:
        diffs = {q: profile.accuracy[i][-1] - profile.accuracy[i][0] for i, q in enumerate(qps)}
        if pivot_qp is not None:
            low = [d for q, d in diffs.items() if q <= pivot_qp]
            high = [d for q, d in diffs.items() if q > pivot_qp]
        else:
            low = [diffs[q] for q in (22, 27) if q in diffs]
            high = [diffs[q] for q in (32, 37) if q in diffs]
        report["gain_sign_flip"] = all(d > 0 for d in low) and all(d < 0 for d in high)
    return report


# --------------------------------------------------------------------------
# profile documents

PROFILE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "schema_version",
        "quality_ladder",
        "enhancement_ladder",
        "accuracy",
        "datasize_bits",
        "flops_per_frame",
        "encode_latency_s",
        "decode_latency_s",
    ],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "quality_ladder": {
            "type": "object",
            "required": ["qp_values"],
            "additionalProperties": False,
            "properties": {
                "qp_values": {"type": "array", "minItems": 1, "items": {"type": "integer"}},
            },
        },
        "enhancement_ladder": {
            "type": "object",
            "required": ["scale_ratios"],
            "additionalProperties": False,
            "properties": {
                "scale_ratios": {"type": "array", "minItems": 1, "items": {"type": "number"}},
            },
        },
        "accuracy": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        },
        "datasize_bits": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "flops_per_frame": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "encode_latency_s": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "decode_latency_s": {"type": "array", "minItems": 1, "items": {"type": "number"}},
    },
}

_validator = jsonschema.Draft202012Validator(PROFILE_SCHEMA)


def profile_to_document(profile: SystemProfile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "quality_ladder": {"qp_values": list(profile.quality.qp_values)},
        "enhancement_ladder": {"scale_ratios": list(profile.enhancement.scale_ratios)},
        "accuracy": [list(row) for row in profile.accuracy],
        "datasize_bits": list(profile.datasize_bits),
        "flops_per_frame": list(profile.flops_per_frame),
        "encode_latency_s": list(profile.encode_latency_s),
        "decode_latency_s": list(profile.decode_latency_s),
    }


def profile_from_document(doc) -> SystemProfile:
    errors = sorted(_validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ProfileParseError(list(err.absolute_path), err.message)
    try:
        quality = QualityLadder(tuple(doc["quality_ladder"]["qp_values"]))
        enhancement = EnhancementLadder(tuple(doc["enhancement_ladder"]["scale_ratios"]))
    except ParameterError as exc:
        raise ProfileValidationError(f"invalid ladder: {exc}") from exc
    return SystemProfile(
        quality=quality,
        enhancement=enhancement,
        accuracy=doc["accuracy"],
        datasize_bits=doc["datasize_bits"],
        flops_per_frame=doc["flops_per_frame"],
        encode_latency_s=doc["encode_latency_s"],
        decode_latency_s=doc["decode_latency_s"],
    )


def save_profile(profile: SystemProfile) -> str:
    """Serialize to the JSON profile document.

    Python's float repr is the shortest string that round-trips, so
    ``load_profile(save_profile(p)) == p`` holds exactly.
    """
    return json.dumps(profile_to_document(profile), indent=2) + "\n"


def load_profile(source) -> SystemProfile:
    """Load a profile from a JSON string, a parsed dict, or a path."""
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, Path):
        doc = _parse_json(source.read_text())
    elif isinstance(source, str) and not source.lstrip().startswith("{"):
        doc = _parse_json(Path(source).read_text())
    else:
        doc = _parse_json(source)
    return profile_from_document(doc)


def _parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileParseError([], f"not valid JSON: {exc}") from exc


def profile_to_csv(profile: SystemProfile) -> str:
    """Long-form table, one row per (qp, scale_ratio) cell, for plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cfg in profile.configurations():
        i, j = cfg.quality_index, cfg.enhancement_index
        writer.writerow(
            [
                profile.quality.qp_values[i],
                repr(profile.enhancement.scale_ratios[j]),
                repr(profile.accuracy[i][j]),
                repr(profile.datasize_bits[i]),
                repr(profile.flops_per_frame[j]),
                repr(profile.encode_latency_s[i]),
                repr(profile.decode_latency_s[i]),
            ]
        )
    return buf.getvalue()

