import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import cfg, grid_profile
from lowlight_va import generate_synthetic_profile
from lowlight_va.cost_model import SimulationConfig, total_latency
from lowlight_va.errors import ParameterError
from lowlight_va.optimizer import (
    GATE_CURRENT,
    AnnealerParams,
    accept_probability,
    brute_force_select,
    default_initial,
    neighbor,
    sa_select,
)

# golden from the standalone enumeration (tests/oracles.py + closed-form profile)
GOLDEN_100MBPS = (cfg(2, 2), 0.5755171353470825)

ZERO_LATENCY = SimulationConfig(lambda_weight=0.0, inference_latency_s=0.0)


def constructed_2x2():
    return grid_profile([[0.1, 0.5], [0.3, 0.2]], datasize_bits=[1.0, 0.5])


class TestBruteForce:
    def test_constructed_argmax(self):
        out = brute_force_select(constructed_2x2(), ZERO_LATENCY, 1e9)
        assert out.configuration == cfg(0, 1)
        assert out.utility_value == 0.5
        assert out.feasible and out.evaluations == 4

    def test_constructed_feasibility_filter(self):
        # quality 0 + enhancement 1 is the only cell over budget: 0.5 + 0.5 s > 0.8 s
        p = grid_profile([[0.1, 0.5], [0.3, 0.2]], datasize_bits=[0.5, 0.0], flops=[0.0, 0.5 * 34.1e12 / 30])
        sim = SimulationConfig(lambda_weight=0.0, inference_latency_s=0.0)
        out = brute_force_select(p, sim, 1.0)
        assert out.configuration == cfg(1, 0)
        assert out.utility_value == 0.3

    def test_tie_break_prefers_lower_indices(self):
        p = grid_profile([[0.4, 0.4], [0.4, 0.4]], datasize_bits=[1.0, 0.5])
        assert brute_force_select(p, ZERO_LATENCY, 1e12).configuration == cfg(0, 0)

    def test_golden_default_100mbps(self, default_profile, sim):
        out = brute_force_select(default_profile, sim, 100e6)
        assert out.configuration == GOLDEN_100MBPS[0]
        assert out.utility_value == pytest.approx(GOLDEN_100MBPS[1], rel=1e-12)
        assert out.evaluations == 45

    def test_infeasible_fallback_is_min_latency(self, default_profile):
        sim = SimulationConfig(latency_budget_s=0.0)
        out = brute_force_select(default_profile, sim, 2e6)
        assert not out.feasible
        lats = {c: total_latency(c, default_profile, sim, 2e6).total_s for c in default_profile.configurations()}
        assert out.configuration == min(lats, key=lats.get)

    @pytest.mark.parametrize("bw", [1e6, 2e6, 3.3e6, 1e7, 5e7, 1e8])
    def test_matches_reference_enumeration(self, default_profile, sim, bw):
        want = oracles.enumerate_best(default_profile, bw, sim)
        out = brute_force_select(default_profile, sim, bw)
        assert (out.configuration.quality_index, out.configuration.enhancement_index) == want[:2]
        assert out.utility_value == pytest.approx(want[2], rel=1e-12)


class TestAcceptance:
    def test_improvement_always_accepted(self):
        assert accept_probability(1e-9, 1e-6) == 1.0
        assert accept_probability(0.3, 10.0) == 1.0

    def test_deterioration_vanishes_as_temperature_drops(self):
        probs = [accept_probability(-0.01, t) for t in (1.0, 0.1, 0.01, 0.001, 1e-5)]
        assert all(0 <= b < a for a, b in zip(probs, probs[1:]))
        assert probs[-1] < 1e-300 or probs[-1] == 0.0
        assert accept_probability(-0.01, 1.0) == pytest.approx(math.exp(-0.01))


class TestNeighbor:
    def test_single_step_and_clamped(self):
        rng = random.Random(0)
        c = cfg(0, 0)
        for _ in range(500):
            n = neighbor(c, (9, 5), rng)
            dq, dk = n.quality_index - c.quality_index, n.enhancement_index - c.enhancement_index
            assert abs(dq) + abs(dk) <= 1
            assert 0 <= n.quality_index < 9 and 0 <= n.enhancement_index < 5
            c = n

    def test_default_initial_mid_ladder(self, default_profile):
        assert default_initial(default_profile) == cfg(4, 2)


class TestAnnealer:
    def test_params_validation(self):
        with pytest.raises(ParameterError):
            AnnealerParams(cooling_coefficient=1.0)
        with pytest.raises(ParameterError):
            AnnealerParams(min_temperature=2.0)
        with pytest.raises(ParameterError):
            AnnealerParams(inner_iterations=0)
        with pytest.raises(ParameterError):
            AnnealerParams(latency_gate="sometimes")

    def test_single_cell_space(self, sim):
        p = grid_profile([[0.4]], datasize_bits=[1e3])
        out = sa_select(p, sim, 1e6, AnnealerParams(rng_seed=3))
        assert out.configuration == cfg(0, 0) and out.feasible

    def test_zero_budget_falls_back(self, default_profile):
        sim = SimulationConfig(latency_budget_s=0.0)
        out = sa_select(default_profile, sim, 2e6)
        assert not out.feasible
        assert out.configuration == brute_force_select(default_profile, sim, 2e6).configuration

    def test_deterministic(self, default_profile, sim):
        a = sa_select(default_profile, sim, 7e6, AnnealerParams(rng_seed=11))
        b = sa_select(default_profile, sim, 7e6, AnnealerParams(rng_seed=11))
        assert a == b

    def test_near_optimal_default(self, default_profile, sim):
        opt = brute_force_select(default_profile, sim, 100e6).utility_value
        out = sa_select(default_profile, sim, 100e6, AnnealerParams(rng_seed=42))
        assert out.utility_value >= 0.98 * opt

    def test_infeasible_start_still_finds_feasible(self, default_profile, sim):
        # mid-ladder start is over budget at 2 Mbps but borders feasible cells
        start = default_initial(default_profile)
        assert total_latency(start, default_profile, sim, 2e6).total_s > sim.latency_budget_s
        out = sa_select(default_profile, sim, 2e6, AnnealerParams(rng_seed=5), initial=start)
        assert out.feasible
        assert total_latency(out.configuration, default_profile, sim, 2e6).total_s <= sim.latency_budget_s

    def test_isolated_infeasible_start_falls_back(self, default_profile, sim):
        # every neighbour of the greedy corner is also over budget at 2 Mbps
        out = sa_select(default_profile, sim, 2e6, AnnealerParams(rng_seed=5), initial=cfg(0, 4))
        assert not out.feasible
        assert out.evaluations == 1 + 45

    def test_current_gate_switch(self, default_profile, sim):
        ok = sa_select(default_profile, sim, 100e6, AnnealerParams(rng_seed=1, latency_gate=GATE_CURRENT))
        assert ok.feasible
        assert ok.utility_value <= brute_force_select(default_profile, sim, 100e6).utility_value
        # gating on an infeasible incumbent freezes the search
        stuck = sa_select(default_profile, sim, 2e6, AnnealerParams(rng_seed=1, latency_gate=GATE_CURRENT),
                          initial=cfg(0, 4))
        assert stuck.evaluations == 1 + 45 and not stuck.feasible

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 10_000),
        bw=st.floats(1e6, 2e8),
        pivot=st.floats(27.5, 31.5),
        budget=st.floats(0.2, 2.0),
    )
    def test_oracle_dominance_and_feasibility(self, seed, bw, pivot, budget):
        from lowlight_va.profile import SyntheticProfileParams

        profile = generate_synthetic_profile(SyntheticProfileParams(pivot_qp=pivot))
        sim = SimulationConfig(latency_budget_s=budget)
        opt = brute_force_select(profile, sim, bw)
        out = sa_select(profile, sim, bw, AnnealerParams(rng_seed=seed))
        if out.feasible:
            assert out.utility_value <= opt.utility_value
            assert total_latency(out.configuration, profile, sim, bw).total_s <= budget
        else:
            # stranded in an infeasible pocket: reports the minimum-latency cell
            assert out.configuration == min(
                profile.configurations(), key=lambda c: total_latency(c, profile, sim, bw).total_s)


def test_decomposition_matches_joint_search():
    profiles = [
        grid_profile([[0.6, 0.7], [0.5, 0.55]], datasize_bits=[4e6, 1e6], flops=[0.0, 2e11],
                     encode=[0.05, 0.03], decode=[0.02, 0.01]),
        grid_profile([[0.4, 0.3], [0.45, 0.42]], datasize_bits=[3e6, 5e5], flops=[0.0, 4e11],
                     encode=[0.05, 0.03], decode=[0.02, 0.01]),
    ]
    sim = SimulationConfig(segment_count=2)
    bitrates = [8e6, 5e6]
    seq, joint = oracles.joint_best(profiles, bitrates, sim)
    per_segment = [brute_force_select(p, sim, b) for p, b in zip(profiles, bitrates)]
    assert tuple((o.configuration.quality_index, o.configuration.enhancement_index) for o in per_segment) == seq
    assert sum(o.utility_value for o in per_segment) == joint
