"""Per-segment configuration selection.

:func:`sa_select` is the simulated-annealing selector; :func:`brute_force_select`
enumerates the whole (quality x enhancement) grid and is exact, so it is
used both as a test oracle and as an upper bound.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .cost_model import SimulationConfig, total_latency, utility_from
from .errors import ParameterError
from .profile import Configuration, SystemProfile

GATE_CANDIDATE = "candidate"
GATE_CURRENT = "current"


@dataclass(frozen=True)
class AnnealerParams:
    initial_temperature: float = 1.0
    min_temperature: float = 1e-3
    cooling_coefficient: float = 0.9
    inner_iterations: int = 20
    rng_seed: int = 42
    # "candidate" rejects infeasible proposals; "current" gates on the
    # incumbent instead, which lets infeasible proposals be accepted.
    latency_gate: str = GATE_CANDIDATE

    def __post_init__(self):
        if not self.initial_temperature > 0:
            raise ParameterError("initial_temperature", "must be positive")
        if not self.min_temperature > 0:
            raise ParameterError("min_temperature", "must be positive")
        if not self.min_temperature < self.initial_temperature:
            raise ParameterError("min_temperature", "must be below initial_temperature")
        if not 0 < self.cooling_coefficient < 1:
            raise ParameterError("cooling_coefficient", "must lie in (0, 1)")
        if isinstance(self.inner_iterations, bool) or not isinstance(self.inner_iterations, int) or self.inner_iterations < 1:
            raise ParameterError("inner_iterations", "must be a positive integer")
        if self.latency_gate not in (GATE_CANDIDATE, GATE_CURRENT):
            raise ParameterError("latency_gate", f"must be {GATE_CANDIDATE!r} or {GATE_CURRENT!r}")


@dataclass(frozen=True)
class SelectionOutcome:
    configuration: Configuration
    utility_value: float
    feasible: bool
    evaluations: int


def _evaluate(cfg, profile, sim, bandwidth_bps):
    latency = total_latency(cfg, profile, sim, bandwidth_bps).total_s
    acc = profile.accuracy[cfg.quality_index][cfg.enhancement_index]
    return utility_from(acc, latency, sim.lambda_weight), latency


def brute_force_select(profile: SystemProfile, sim: SimulationConfig, bandwidth_bps: float) -> SelectionOutcome:
    """Exact argmax of utility over feasible configurations.

    Ties go to the lower quality_index, then the lower enhancement_index.
    When nothing meets the budget the minimum-latency configuration is
    returned with ``feasible=False``.
    """
    best = None
    count = 0
    for cfg in profile.configurations():
        u, lat = _evaluate(cfg, profile, sim, bandwidth_bps)
        count += 1
        if lat <= sim.latency_budget_s and (best is None or u > best[1]):
            best = (cfg, u)
    if best is not None:
        return SelectionOutcome(best[0], best[1], True, count)
    return min_latency_select(profile, sim, bandwidth_bps)


def min_latency_select(profile: SystemProfile, sim: SimulationConfig, bandwidth_bps: float) -> SelectionOutcome:
    """Minimum-latency configuration, reported infeasible. Used as the no-feasible fallback."""
    fallback = None
    count = 0
    for cfg in profile.configurations():
        u, lat = _evaluate(cfg, profile, sim, bandwidth_bps)
        count += 1
        if fallback is None or lat < fallback[2]:
            fallback = (cfg, u, lat)
    return SelectionOutcome(fallback[0], fallback[1], False, count)


def accept_probability(delta_u: float, temperature: float) -> float:
    """Metropolis acceptance for a maximization problem."""
    if delta_u > 0:
        return 1.0
    return math.exp(delta_u / temperature)


def default_initial(profile: SystemProfile) -> Configuration:
    m, n1 = profile.shape
    return Configuration((m - 1) // 2, (n1 - 1) // 2)


def neighbor(cfg: Configuration, shape: tuple[int, int], rng: random.Random) -> Configuration:
    """One +/-1 step on a uniformly chosen axis, clamped to the ladder."""
    axis = rng.randrange(2)
    step = rng.choice((-1, 1))
    m, n1 = shape
    if axis == 0:
        q = min(m - 1, max(0, cfg.quality_index + step))
        return Configuration(q, cfg.enhancement_index)
    k = min(n1 - 1, max(0, cfg.enhancement_index + step))
    return Configuration(cfg.quality_index, k)


def sa_select(
    profile: SystemProfile,
    sim: SimulationConfig,
    bandwidth_bps: float,
    params: AnnealerParams | None = None,
    initial: Configuration | None = None,
) -> SelectionOutcome:
    params = params or AnnealerParams()
    current = initial if initial is not None else default_initial(profile)
    rng = random.Random(params.rng_seed)
    shape = profile.shape
    budget = sim.latency_budget_s

    u_cur, lat_cur = _evaluate(current, profile, sim, bandwidth_bps)
    evaluations = 1
    best = (current, u_cur) if lat_cur <= budget else None

    temperature = params.initial_temperature
    while temperature > params.min_temperature:
        for _ in range(params.inner_iterations):
            cand = neighbor(current, shape, rng)
            if params.latency_gate == GATE_CANDIDATE:
                lat_gate = total_latency(cand, profile, sim, bandwidth_bps).total_s
            else:
                lat_gate = lat_cur
            if lat_gate > budget:
                continue
            u_cand, lat_cand = _evaluate(cand, profile, sim, bandwidth_bps)
            evaluations += 1
            delta = u_cand - u_cur
            if delta > 0 or rng.random() < accept_probability(delta, temperature):
                current, u_cur, lat_cur = cand, u_cand, lat_cand
                if lat_cur <= budget and (best is None or u_cur > best[1]):
                    best = (current, u_cur)
        temperature *= params.cooling_coefficient

    if best is None:
        fallback = min_latency_select(profile, sim, bandwidth_bps)
        return SelectionOutcome(
            fallback.configuration,
            fallback.utility_value,
            False,
            evaluations + fallback.evaluations,
        )
    return SelectionOutcome(best[0], best[1], True, evaluations)
