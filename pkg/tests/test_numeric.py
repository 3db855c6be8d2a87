import math

import numpy as np
import pytest

from conftest import make_linear_system, make_params
from switchbif import (BudgetError, EscapeError, IntegratorConfig, LambdaPoly,
                       MonomialTerm, NoConvergenceError, OriginError,
                       PolyField, Quadrant, SideError, StopAfterEvents,
                       StopAtTime, StopOnReturn, SwitchedSystem, TangencyError,
                       delta, delta_numeric, integrate, poincare_numeric,
                       return_residual)

#: (a, b, c) grid used for the linear-case oracle comparisons
ORACLE_GRID = [(a, b, c) for a in (0.1, 1.0, 2.0) for b in (1.0, 6.0) for c in (1.0, 3.0)]


class TestIntegrate:
    def test_expanding_linear_spiral(self, cfg):
        sys = make_linear_system(0.1, 6.0, 1.0)
        traj = integrate(sys, (1.0, 0.0), 0.0, StopAfterEvents(4), cfg)
        d = delta(sys.params, 0.0)
        assert traj.final_state[0] == pytest.approx(d, rel=1e-9)
        assert traj.final_state[0] == pytest.approx(27.855, abs=1e-3)
        q_period = math.pi / (2.0 * math.sqrt(6.0))
        for k, ev in enumerate(traj.events, start=1):
            assert ev.time == pytest.approx(k * q_period, abs=1e-8)

    def test_clockwise_arc_and_event_sequence(self, cfg):
        sys = make_linear_system(0.5, 2.0, 1.0)
        traj = integrate(sys, (1.0, 0.0), 0.0, StopAfterEvents(8), cfg)
        assert [int(a.quadrant) for a in traj.arcs] == [4, 3, 2, 1, 4, 3, 2, 1]
        expected = [4, 3, 2, 1, 4, 3, 2, 1]
        assert [int(e.to_quadrant) for e in traj.events] == expected[1:] + [4]
        for ev, arc in zip(traj.events, traj.arcs):
            assert ev.from_quadrant == arc.quadrant

    def test_event_states_lie_on_axes(self, cfg):
        sys = make_linear_system(0.3, 4.0, 1.5)
        traj = integrate(sys, (0.7, 0.0), 0.0, StopAfterEvents(6), cfg)
        for ev in traj.events:
            gidx = 1 if ev.from_quadrant in (Quadrant.Q1, Quadrant.Q3) else 0
            scale = max(1.0, abs(ev.state[0]), abs(ev.state[1]))
            assert abs(ev.state[gidx]) < cfg.event_tol * scale

    def test_arcs_are_time_contiguous_and_share_junctions(self, cfg):
        sys = make_linear_system(0.2, 3.0, 1.0)
        traj = integrate(sys, (1.0, 0.5), 0.0, StopAfterEvents(5), cfg)
        for left, right in zip(traj.arcs, traj.arcs[1:]):
            assert left.times[-1] == right.times[0]
            assert np.array_equal(left.states[-1], right.states[0])
        for arc in traj.arcs:
            assert np.all(np.diff(arc.times) > 0.0)

    def test_arc_interiors_match_their_quadrant(self, cfg):
        from switchbif import region_of
        sys = make_linear_system(0.2, 3.0, 1.0)
        traj = integrate(sys, (1.0, 0.0), 0.0, StopAfterEvents(4), cfg)
        for arc in traj.arcs:
            for state in arc.states[1:-1]:
                assert region_of(state) == arc.quadrant

    def test_time_stop_is_exact(self, cfg):
        sys = make_linear_system(0.5, 2.0, 1.0)
        traj = integrate(sys, (1.0, 0.0), 0.0, StopAtTime(1.2345), cfg)
        assert traj.t_final == 1.2345
        assert traj.arcs[-1].times[-1] == 1.2345

    def test_zero_time_gives_single_point(self, cfg):
        sys = make_linear_system(0.5, 2.0, 1.0)
        traj = integrate(sys, (1e-3, 0.0), 0.0, StopAtTime(0.0), cfg)
        assert traj.events == []
        assert len(traj.arcs) == 1
        assert traj.arcs[0].states.shape == (1, 2)
        assert traj.t_final == 0.0

    def test_quadratic_decay_on_every_arc(self, cfg):
        a, b, c = 0.25, 4.0, 1.5
        sys = make_linear_system(a, b, c)
        traj = integrate(sys, (1.0, 0.0), 0.0, StopAfterEvents(4), cfg)
        for arc in traj.arcs:
            w1, w2 = (c, b) if arc.quadrant in (Quadrant.Q1, Quadrant.Q3) else (b, c)
            q_vals = w1 * arc.states[:, 0] ** 2 + w2 * arc.states[:, 1] ** 2
            expected = q_vals[0] * np.exp(-2.0 * a * (arc.times - arc.times[0]))
            assert np.allclose(q_vals, expected, rtol=1e-8)

    def test_origin_start_rejected(self, cfg):
        sys = make_linear_system(0.5, 2.0, 1.0)
        with pytest.raises(OriginError):
            integrate(sys, (0.0, 0.0), 0.0, StopAtTime(1.0), cfg)

    def test_escape_raises(self):
        sys = make_linear_system(0.1, 6.0, 1.0)  # stability index ~27.9, expanding
        cfg = IntegratorConfig(escape_radius=100.0)
        with pytest.raises(EscapeError):
            integrate(sys, (1.0, 0.0), 0.0, StopAtTime(50.0), cfg)

    def test_event_budget_raises(self, cfg):
        sys = make_linear_system(0.5, 2.0, 1.0)
        tight = IntegratorConfig(max_arcs=3)
        with pytest.raises(BudgetError):
            integrate(sys, (1.0, 0.0), 0.0, StopAfterEvents(10), tight)

    def test_sliding_contact_raises(self, cfg):
        # third-quadrant field pushes back across the negative x2-axis:
        # crossing from quadrant 4 has disagreeing fields -> sliding
        pushy = PolyField(comp1=(MonomialTerm(LambdaPoly.constant(10.0), 0, 2),))
        sys = SwitchedSystem(make_params(0.1, 1.0, 1.0),
                             (PolyField.zero(), PolyField.zero(), pushy, PolyField.zero()))
        with pytest.raises(TangencyError):
            integrate(sys, (1.0, 0.0), 0.0, StopAfterEvents(2), cfg)

    def test_ambiguous_axis_departure_raises(self, cfg):
        # fourth-quadrant field pushes up at the positive x1-axis while the
        # first-quadrant field pushes down: no consistent side to enter
        pushy = PolyField(comp2=(MonomialTerm(LambdaPoly.constant(4.0), 2, 0),))
        sys = SwitchedSystem(make_params(0.1, 2.0, 1.0),
                             (PolyField.zero(), PolyField.zero(), PolyField.zero(), pushy))
        with pytest.raises(TangencyError):
            integrate(sys, (1.0, 0.0), 0.0, StopAtTime(1.0), cfg)

    def test_interior_start_quadrant(self, cfg):
        sys = make_linear_system(0.3, 2.0, 1.0)
        traj = integrate(sys, (-0.5, 0.8), 0.0, StopAfterEvents(1), cfg)
        assert traj.arcs[0].quadrant == Quadrant.Q2
        assert traj.events[0].to_quadrant == Quadrant.Q1


class TestPoincareNumeric:
    @pytest.mark.parametrize("a,b,c", ORACLE_GRID)
    def test_linear_oracle_grid(self, a, b, c, cfg):
        sys = make_linear_system(a, b, c)
        d = delta(sys.params, 0.0)
        for x1 in (0.1, 1.0):
            s = poincare_numeric(sys, x1, 0.0, cfg)
            assert s.x1_out / s.x1_in == pytest.approx(d, rel=1e-6)
            assert s.period == pytest.approx(2.0 * math.pi / math.sqrt(b * c), rel=1e-8)

    def test_exactly_four_events(self, paper_system, cfg):
        from switchbif import StopOnReturn, integrate
        traj = integrate(paper_system, (0.5, 0.0), 0.2, StopOnReturn(), cfg)
        assert len(traj.events) == 4

    def test_homogeneity_linear(self, cfg):
        sys = make_linear_system(0.4, 3.0, 1.2)
        for x1 in (0.05, 0.3, 2.0):
            s1 = poincare_numeric(sys, x1, 0.0, cfg)
            s2 = poincare_numeric(sys, 2.0 * x1, 0.0, cfg)
            assert s2.x1_out == pytest.approx(2.0 * s1.x1_out, rel=1e-8)

    def test_requires_positive_amplitude(self, paper_system, cfg):
        with pytest.raises(SideError):
            poincare_numeric(paper_system, -1.0, 0.0, cfg)
        with pytest.raises(SideError):
            poincare_numeric(paper_system, 0.0, 0.0, cfg)

    def test_paper_small_amplitude_ratio_tends_to_one(self, paper_system, cfg):
        # ratio -> stability index = 1 as the amplitude shrinks
        r_coarse = poincare_numeric(paper_system, 1e-1, 0.0, cfg)
        r_fine = poincare_numeric(paper_system, 1e-3, 0.0, cfg)
        assert abs(r_fine.x1_out / r_fine.x1_in - 1.0) < abs(
            r_coarse.x1_out / r_coarse.x1_in - 1.0)
        assert r_fine.x1_out / r_fine.x1_in == pytest.approx(1.0, abs=1e-5)

    def test_trajectory_spirals_onto_periodic_orbit(self, paper_system, cfg):
        # off-critical start relaxes onto the attracting orbit: successive
        # positive-x1-axis crossings converge to the branch amplitude
        traj = integrate(paper_system, (1.0, 0.0), 0.1, StopAtTime(30.0), cfg)
        crossings = [ev.state[0] for ev in traj.events
                     if ev.from_quadrant == Quadrant.Q1 and ev.state[0] > 0.0]
        assert len(crossings) > 10
        assert min(crossings) > 0.2  # bounded away from the origin
        gaps = [abs(x - 0.22252914490521986) for x in crossings]
        assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] < gaps[0] / 10.0


class TestReturnResidual:
    def test_zero_for_critical_linear_system(self, paper_params, cfg):
        sys = SwitchedSystem.linear(paper_params)
        for x1 in (0.1, 1.0, 3.0):
            assert abs(return_residual(sys, x1, 0.0, cfg)) <= 1e-8

    def test_negative_for_contracting_system(self, cfg):
        sys = make_linear_system(1.0, 1.0, 1.0)
        for x1 in (0.2, 1.0):
            assert return_residual(sys, x1, 0.0, cfg) < 0.0

    def test_sign_change_brackets_orbit(self, paper_system, cfg):
        vals = [return_residual(paper_system, x1, 0.1, cfg)
                for x1 in (0.05, 0.1, 0.3, 0.5)]
        assert vals[0] > 0.0 and vals[1] > 0.0
        assert vals[2] < 0.0 and vals[3] < 0.0


class TestDeltaNumeric:
    @pytest.mark.parametrize("a,b,c", ORACLE_GRID[:4])
    def test_linear_matches_closed_form(self, a, b, c, cfg):
        sys = make_linear_system(a, b, c)
        est = delta_numeric(sys, 0.0, cfg)
        assert est == pytest.approx(delta(sys.params, 0.0), rel=1e-6)

    def test_paper_example_critical(self, paper_system, cfg):
        assert delta_numeric(paper_system, 0.0, cfg) == pytest.approx(1.0, abs=1e-6)

    def test_paper_example_off_critical(self, paper_system, cfg):
        d = delta(paper_system.params, 0.1)
        assert delta_numeric(paper_system, 0.1, cfg) == pytest.approx(d, rel=1e-6)

    def test_no_convergence_reports_sequence(self, paper_system, cfg):
        with pytest.raises(NoConvergenceError) as exc_info:
            delta_numeric(paper_system, 0.0, cfg, max_halvings=2)
        assert len(exc_info.value.sequence) == 2


class TestIntegratorConfig:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            IntegratorConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(max_arcs=0)

    def test_warns_on_loose_event_tol(self):
        with pytest.warns(UserWarning):
            IntegratorConfig(event_tol=1e-6, abs_tol=1e-10)

    def test_amplitude_scaling(self):
        cfg = IntegratorConfig()
        small = cfg.scaled_for_amplitude(1e-3)
        assert small.abs_tol == cfg.abs_tol * 1e-3
        assert small.event_tol == cfg.event_tol * 1e-3
        assert cfg.scaled_for_amplitude(5.0) is cfg
