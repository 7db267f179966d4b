"""Cost-minimal design: thresholds, feasibility, optimizer and sweeps."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from d2dnet import (
    MissionSpec,
    NetworkParams,
    ParamBounds,
    ThreatModel,
    cost,
    feasible,
    optimize,
    sweep,
    threshold_map,
)
from d2dnet.designer import (
    UnattainableThresholdError,
    certify_infeasible,
    grid_oracle,
)


def make_mission(t1, t2, tc, delta, bounds):
    return MissionSpec(t1=t1, t2=t2, tc=tc, threat=ThreatModel(delta=delta),
                       bounds=bounds)


class TestThresholdMap:
    def test_reference_values(self):
        assert threshold_map(0.8, 1.0) == pytest.approx(5.0, abs=1e-12)
        assert threshold_map(0.6, 0.5) == pytest.approx(5.0, abs=1e-12)

    def test_zero_target_reduces_to_relaxed_threshold(self):
        for alpha in (0.1, 0.5, 1.0):
            assert threshold_map(0.0, alpha) == pytest.approx(1.0 / alpha, abs=1e-12)

    def test_unattainable_inputs(self):
        with pytest.raises(UnattainableThresholdError):
            threshold_map(1.0, 0.5)
        with pytest.raises(UnattainableThresholdError):
            threshold_map(0.5, 0.0)


class TestCost:
    def test_zero_density_costs_nothing(self, section_v_bounds):
        mission = make_mission(0.6, 0.6, 0.8, 0.0, section_v_bounds)
        params = NetworkParams(p=0.4, lam=0.0, r1=1.0, r2=0.5)
        assert cost(params, mission) == 0.0

    def test_reference_value(self, section_v_bounds):
        mission = make_mission(0.6, 0.6, 0.8, 0.0, section_v_bounds)
        params = NetworkParams(p=0.4, lam=15.0, r1=1.0, r2=0.5)
        # 100*6 + 50*9 + 100*(6*1 + 15*0.0625)
        assert cost(params, mission) == pytest.approx(1743.75, abs=1e-9)

    @given(
        p=st.floats(0.0, 0.4),
        lam=st.floats(1.0, 15.0),
        r1=st.floats(0.1, 2.0),
        scale=st.floats(0.05, 1.0),
        bump=st.floats(1e-3, 0.5),
    )
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_each_variable(self, p, lam, r1, scale, bump):
        bounds = ParamBounds()
        mission = make_mission(0.5, 0.5, 0.5, 0.0, bounds)
        params = NetworkParams(p=p, lam=lam, r1=r1, r2=r1 * scale)
        base = cost(params, mission)
        assert cost(NetworkParams(p, lam + bump, r1, r1 * scale), mission) >= base
        assert cost(NetworkParams(p, lam, r1 + bump, r1 * scale), mission) >= base
        r2_up = min(r1, r1 * scale + bump)
        assert cost(NetworkParams(p, lam, r1, r2_up), mission) >= base
        if p + bump <= 1.0:   # w1 >= w2 makes dual-radio devices pricier
            assert cost(NetworkParams(p + bump, lam, r1, r1 * scale), mission) >= base


class TestFeasible:
    def test_intra_layer_slack(self, section_v_bounds):
        mission = make_mission(0.6, 0.6, 0.8, 0.0, section_v_bounds)
        params = NetworkParams(p=0.4, lam=15.0, r1=1.0, r2=0.5)
        slacks = feasible(params, mission)
        # E[K1] = 7.54 against a requirement of 2.5.
        assert slacks["layer1"] == pytest.approx(0.16 * 15 * math.pi - 2.5, abs=1e-9)
        assert slacks["layer1"] > 0.0

    def test_total_jamming_is_infeasible_for_any_box(self, section_v_bounds):
        mission = make_mission(0.2, 0.2, 0.2, 0.999999, section_v_bounds)
        params = NetworkParams(p=0.4, lam=15.0, r1=2.0, r2=0.8)
        slacks = feasible(params, mission)
        assert min(slacks["layer1"], slacks["layer2"], slacks["combined"]) < 0.0

    def test_combined_constraint_implied_by_additivity(self, section_v_bounds):
        # Whenever the combined requirement is below the sum of the
        # intra-layer ones, meeting both intra constraints meets it too.
        mission = make_mission(0.5, 0.5, 0.6, 0.0, section_v_bounds)
        req1, req2, reqc = mission.required_degrees()
        assert reqc <= req1 + req2
        params = NetworkParams(p=0.4, lam=4.0, r1=1.2, r2=0.5)
        slacks = feasible(params, mission)
        if slacks["layer1"] >= 0 and slacks["layer2"] >= 0:
            assert slacks["combined"] >= 0


class TestOptimize:
    def test_intelligence_mission_structure(self, section_v_bounds):
        solution = optimize(make_mission(0.6, 0.6, 0.8, 0.0, section_v_bounds))
        assert solution.status == "optimal"
        params = solution.params
        assert params.r1 >= params.r2
        # Cheaper single-radio followers outnumber dual-radio commanders.
        assert (1 - params.p) * params.lam >= params.p * params.lam
        assert solution.active_set
        assert min(solution.slacks.values()) >= -1e-6

    def test_solution_meets_thresholds_via_mean_field_bound(self, section_v_bounds):
        mission = make_mission(0.6, 0.6, 0.8, 0.2, section_v_bounds)
        solution = optimize(mission)
        params = solution.params
        alpha = 1 - 0.2
        for mean, target in (
            (params.mean_k1(), mission.t1),
            (params.mean_k2(), mission.t2),
            (params.mean_kc(), mission.tc),
        ):
            achieved = 1.0 - 1.0 / (alpha * mean)
            assert achieved >= target - 1e-6

    def test_matches_grid_oracle(self, section_v_bounds):
        mission = make_mission(0.6, 0.6, 0.8, 0.3, section_v_bounds)
        solver = optimize(mission)
        oracle = grid_oracle(mission, n=25)
        assert solver.cost <= oracle.cost * 1.01

    def test_encounter_corner_certificate(self, section_v_bounds):
        # The layer-1 requirement exceeds the best corner degree for high
        # threat, so infeasibility must be certified, not just unsolved.
        mission = make_mission(0.8, 0.8, 0.6, 0.85, section_v_bounds)
        violated = certify_infeasible(mission)
        assert "layer1" in violated
        solution = optimize(mission)
        assert solution.status == "infeasible"

    def test_infeasibility_boundary_location(self, section_v_bounds):
        lo, hi = 0.8, 0.9
        for _ in range(40):
            mid = (lo + hi) / 2
            if certify_infeasible(make_mission(0.8, 0.8, 0.6, mid, section_v_bounds)):
                hi = mid
            else:
                lo = mid
        assert hi == pytest.approx(0.8342, abs=5e-4)

    def test_determinism(self, section_v_bounds):
        mission = make_mission(0.6, 0.6, 0.8, 0.4, section_v_bounds)
        a = optimize(mission)
        b = optimize(mission)
        assert a.cost == b.cost
        assert a.params == b.params


class TestSweep:
    def test_empty_grid(self, section_v_bounds):
        assert sweep(make_mission(0.5, 0.5, 0.5, 0.0, section_v_bounds),
                     "delta", []) == []

    def test_infeasible_points_recorded(self, section_v_bounds):
        rows = sweep(make_mission(0.8, 0.8, 0.6, 0.0, section_v_bounds),
                     "delta", [0.0, 0.9])
        assert rows[0].solution.status == "optimal"
        assert rows[1].solution.status == "infeasible"

    def test_network_wide_sweep_flat_until_additivity_crossover(self, section_v_bounds):
        # With both intra targets at 0.5 the combined requirement only binds
        # once it exceeds the sum of the intra requirements (at tc = 0.75).
        grid = [0.1, 0.4, 0.7, 0.75, 0.8, 0.9]
        rows = sweep(make_mission(0.5, 0.5, 0.5, 0.0, section_v_bounds), "tc", grid)
        base = rows[0].solution.params
        for row in rows:
            params = row.solution.params
            if row.value <= 0.75:
                assert params.lam == pytest.approx(base.lam, rel=1e-3)
                assert params.r1 == pytest.approx(base.r1, rel=1e-3)
                assert params.r2 == pytest.approx(base.r2, rel=1e-3)
            else:
                assert row.solution.cost > rows[0].solution.cost * 1.001

    def test_intra_sweep_grows_density_before_ranges(self, section_v_bounds):
        grid = [0.1, 0.3, 0.5, 0.7, 0.85]
        rows = sweep(make_mission(0.5, 0.5, 0.5, 0.0, section_v_bounds),
                     "t_intra", grid)
        lams = [r.solution.params.lam for r in rows]
        r1s = [r.solution.params.r1 for r in rows]
        assert all(a <= b + 1e-9 for a, b in zip(lams, lams[1:]))
        assert lams[-1] > lams[0]
        assert max(r1s) == pytest.approx(min(r1s), rel=1e-3)

    def test_unknown_variable(self, section_v_bounds):
        with pytest.raises(ValueError):
            sweep(make_mission(0.5, 0.5, 0.5, 0.0, section_v_bounds), "r1", [0.1])
