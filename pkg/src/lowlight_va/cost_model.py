"""Per-segment latency and utility.

Units are fixed throughout: bits, bits/s, FLOP, FLOP/s, seconds.
Mbps/TFLOPS only appear at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError, ParameterError
from .profile import Configuration, SystemProfile

DEFAULT_BANDWIDTH_BPS = 100e6


@dataclass(frozen=True)
class SimulationConfig:
    lambda_weight: float = 0.25
    latency_budget_s: float = 0.8
    edge_flops_per_s: float = 34.1e12
    frames_per_segment: int = 30
    inference_latency_s: float = 0.1
    segment_count: int = 10
    segment_duration_s: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lambda_weight <= 1.0:
            raise ParameterError("lambda_weight", "must lie in [0, 1]")
        # latency_budget_s may be 0 (a degenerate but well-defined budget)
        if not (math.isfinite(self.latency_budget_s) and self.latency_budget_s >= 0):
            raise ParameterError("latency_budget_s", "must be nonnegative")
        if not self.edge_flops_per_s > 0:
            raise ParameterError("edge_flops_per_s", "must be positive")
        if isinstance(self.frames_per_segment, bool) or not isinstance(self.frames_per_segment, int) or self.frames_per_segment < 1:
            raise ParameterError("frames_per_segment", "must be a positive integer")
        if not self.inference_latency_s >= 0:
            raise ParameterError("inference_latency_s", "must be nonnegative")
        if isinstance(self.segment_count, bool) or not isinstance(self.segment_count, int) or self.segment_count < 1:
            raise ParameterError("segment_count", "must be a positive integer")
        if not self.segment_duration_s > 0:
            raise ParameterError("segment_duration_s", "must be positive")


@dataclass(frozen=True)
class LatencyBreakdown:
    encode_s: float
    decode_s: float
    transmit_s: float
    enhance_s: float
    inference_s: float

    @property
    def total_s(self) -> float:
        return self.encode_s + self.decode_s + self.transmit_s + self.enhance_s + self.inference_s


def transmission_delay(datasize_bits: float, bandwidth_bps: float) -> float:
    if not bandwidth_bps > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_bps!r}")
    if datasize_bits < 0:
        raise DomainError(f"datasize must be nonnegative, got {datasize_bits!r}")
    return datasize_bits / bandwidth_bps


def enhancement_delay(scale_index: int, profile: SystemProfile, config: SimulationConfig) -> float:
    return config.frames_per_segment * profile.flops_per_frame[scale_index] / config.edge_flops_per_s


def check_configuration(cfg: Configuration, profile: SystemProfile):
    m, n1 = profile.shape
    if not 0 <= cfg.quality_index < m:
        raise ConfigurationError(f"quality_index {cfg.quality_index} outside [0, {m - 1}]")
    if not 0 <= cfg.enhancement_index < n1:
        raise ConfigurationError(f"enhancement_index {cfg.enhancement_index} outside [0, {n1 - 1}]")


def total_latency(
    cfg: Configuration, profile: SystemProfile, sim: SimulationConfig, bandwidth_bps: float
) -> LatencyBreakdown:
    check_configuration(cfg, profile)
    i = cfg.quality_index
    return LatencyBreakdown(
        encode_s=profile.encode_latency_s[i],
        decode_s=profile.decode_latency_s[i],
        transmit_s=transmission_delay(profile.datasize_bits[i], bandwidth_bps),
        enhance_s=enhancement_delay(cfg.enhancement_index, profile, sim),
        inference_s=sim.inference_latency_s,
    )


def utility_from(accuracy: float, total_s: float, lambda_weight: float) -> float:
    return accuracy - lambda_weight * total_s


def utility(cfg: Configuration, profile: SystemProfile, sim: SimulationConfig, bandwidth_bps: float) -> float:
    latency = total_latency(cfg, profile, sim, bandwidth_bps)
    acc = profile.accuracy[cfg.quality_index][cfg.enhancement_index]
    return utility_from(acc, latency.total_s, sim.lambda_weight)
