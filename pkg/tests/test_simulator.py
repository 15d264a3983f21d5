import math

import pytest

from lowlight_va.cost_model import LatencyBreakdown, SimulationConfig
from lowlight_va.errors import ConfigurationError
from lowlight_va.optimizer import AnnealerParams
from lowlight_va.policies import ALL_POLICIES, PolicyKind, PolicyName
from lowlight_va.profile import SyntheticProfileParams, generate_synthetic_profile
from lowlight_va.simulator import (
    DEFAULT_SWEEP_BPS,
    BandwidthTrace,
    RunSummary,
    load_trace,
    parse_trace,
    run_simulation,
    sweep_bandwidth,
    trace_to_csv,
)

PROPOSED = PolicyKind(PolicyName.PROPOSED)
NO_ENHANCE = PolicyKind(PolicyName.NO_ENHANCE)
GREEDY = PolicyKind(PolicyName.GREEDY)


class TestTrace:
    def test_constant_is_cyclic(self):
        t = BandwidthTrace.constant(5e6)
        t.check_covers(100)
        assert t.at(37) == 5e6

    def test_short_trace_rejected(self):
        t = BandwidthTrace((1e6, 2e6, 3e6))
        with pytest.raises(ConfigurationError, match="3 entries"):
            t.check_covers(10)

    def test_cyclic_repeat(self):
        t = BandwidthTrace((1e6, 2e6, 3e6), cyclic=True)
        assert [t.at(i) for i in range(1, 8)] == [1e6, 2e6, 3e6, 1e6, 2e6, 3e6, 1e6]

    @pytest.mark.parametrize("values", [(), (1e6, 0.0), (float("nan"),)])
    def test_bad_entries(self, values):
        with pytest.raises(ConfigurationError):
            BandwidthTrace(values)

    def test_csv_round_trip(self, tmp_path):
        t = BandwidthTrace((2e6, 4.5e6, 1e8))
        path = tmp_path / "trace.csv"
        path.write_text(trace_to_csv(t))
        assert load_trace(path) == t

    def test_zero_based_index_accepted(self):
        assert parse_trace("segment_index,bitrate_bps\n0,1e6\n1,2e6\n").bitrates_bps == (1e6, 2e6)

    @pytest.mark.parametrize("text", [
        "bitrate_bps\n1e6\n",
        "segment_index,bitrate_bps\n1,fast\n",
        "segment_index,bitrate_bps\n1,1e6\n3,1e6\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ConfigurationError):
            parse_trace(text)


class TestRun:
    def test_single_segment_identity(self, default_profile):
        sim = SimulationConfig(segment_count=1)
        results, summary = run_simulation(default_profile, sim, BandwidthTrace.constant(), PROPOSED)
        assert len(results) == 1
        assert summary.total_utility == results[0].utility_value

    def test_greedy_rows_identical(self, default_profile, sim):
        results, _ = run_simulation(default_profile, sim, BandwidthTrace.constant(), GREEDY)
        assert len(results) == 10
        assert len({r.configuration for r in results}) == 1

    def test_proposed_beats_no_enhance_accuracy(self, default_profile, sim):
        trace = BandwidthTrace.constant()
        _, p = run_simulation(default_profile, sim, trace, PROPOSED, oracle=True)
        _, n = run_simulation(default_profile, sim, trace, NO_ENHANCE)
        assert p.mean_accuracy > n.mean_accuracy
        assert p.total_utility >= n.total_utility

    def test_segment_utility_recomputable(self, default_profile, sim):
        trace = BandwidthTrace((2e6, 9e6, 40e6), cyclic=True)
        results, summary = run_simulation(default_profile, sim, trace, PROPOSED)
        for r in results:
            assert r.utility_value == r.accuracy - sim.lambda_weight * r.latency.total_s
        recomputed = sum(r.accuracy - sim.lambda_weight * r.latency.total_s for r in results)
        assert math.isclose(summary.total_utility, recomputed, rel_tol=1e-12)
        assert [r.segment_index for r in results] == list(range(1, 11))
        assert [r.bandwidth_bps for r in results[:4]] == [2e6, 9e6, 40e6, 2e6]

    def test_per_segment_seeds(self, default_profile, sim):
        # segment t sees seed base + t, so shifting the base by one shifts the segments
        trace = BandwidthTrace.constant(3e6)
        a, _ = run_simulation(default_profile, sim, trace, PROPOSED, AnnealerParams(rng_seed=10))
        b, _ = run_simulation(default_profile, sim, trace, PROPOSED, AnnealerParams(rng_seed=11))
        assert [r.evaluations for r in a[1:]] == [r.evaluations for r in b[:-1]]

    def test_deterministic_across_workers(self, default_profile, sim):
        trace = BandwidthTrace((2e6, 5e6, 8e6, 13e6, 21e6), cyclic=True)
        serial = run_simulation(default_profile, sim, trace, PROPOSED, AnnealerParams(rng_seed=3))
        threaded = run_simulation(default_profile, sim, trace, PROPOSED, AnnealerParams(rng_seed=3), workers=4)
        assert serial == threaded

    def test_trace_too_short(self, default_profile, sim):
        with pytest.raises(ConfigurationError):
            run_simulation(default_profile, sim, BandwidthTrace((1e6,) * 3), PROPOSED)

    def test_per_segment_profiles(self, sim):
        profiles = [generate_synthetic_profile(SyntheticProfileParams(peak_accuracy=0.5 + 0.02 * t)) for t in range(10)]
        results, _ = run_simulation(profiles, sim, BandwidthTrace.constant(), NO_ENHANCE)
        accs = [r.accuracy for r in results]
        assert all(b > a for a, b in zip(accs, accs[1:]))
        with pytest.raises(ConfigurationError):
            run_simulation(profiles[:3], sim, BandwidthTrace.constant(), NO_ENHANCE)

    def test_summary_aggregation(self):
        from lowlight_va.profile import Configuration
        from lowlight_va.simulator import SegmentResult

        def seg(t, acc, total, data, feas):
            lat = LatencyBreakdown(0.0, 0.0, total / 2, 0.0, total / 2)
            return SegmentResult(t, "x", Configuration(0, 0), 7, 0.0, 1e6, acc, lat, data, acc - 0.25 * total, feas, 1)

        s = RunSummary.from_results("x", [seg(1, 0.5, 0.4, 10.0, True), seg(2, 0.7, 1.2, 30.0, False)])
        assert (s.mean_accuracy, s.mean_latency_s, s.mean_datasize_bits, s.feasibility_rate) == (0.6, 0.8, 20.0, 0.5)
        assert s.mean_transmit_s == 0.4
        assert s.total_utility == pytest.approx(0.5 - 0.1 + 0.7 - 0.3)


class TestSweep:
    def test_default_grid_rows(self, default_profile, sim):
        rows = sweep_bandwidth(default_profile, sim)
        assert len(rows) == 7 * 4
        assert [r.bitrate_bps for r in rows[::4]] == list(DEFAULT_SWEEP_BPS)

    def test_shapes(self, default_profile, sim):
        rows = sweep_bandwidth(default_profile, sim, DEFAULT_SWEEP_BPS, ALL_POLICIES)
        by = {}
        for r in rows:
            by.setdefault(r.policy, []).append(r)
        prop = by["proposed"]
        assert all(b.mean_accuracy >= a.mean_accuracy for a, b in zip(prop, prop[1:]))
        assert all(b.mean_transmit_s <= a.mean_transmit_s for a, b in zip(prop, prop[1:]))
        assert all(r.mean_latency_s <= sim.latency_budget_s and r.feasibility_rate == 1.0 for r in prop)
        assert len({r.mean_accuracy for r in by["greedy"]}) == 1
        assert len({r.mean_accuracy for r in by["on-device"]}) == 1

    def test_workers_do_not_change_rows(self, default_profile, sim):
        bitrates = (2e6, 30e6)
        assert sweep_bandwidth(default_profile, sim, bitrates) == sweep_bandwidth(default_profile, sim, bitrates, workers=3)

    @pytest.mark.parametrize("bitrates", [[], [1e6, -2.0]])
    def test_bad_bitrates(self, default_profile, sim, bitrates):
        with pytest.raises(ConfigurationError):
            sweep_bandwidth(default_profile, sim, bitrates)
