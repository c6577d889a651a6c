"""Closed forms, exhaustive game values, bound checks, and the SPE certificate."""

import math
from dataclasses import replace

import numpy as np
import pytest

from consensus_interdiction import (
    ControlPair,
    EnumerationGuardError,
    Graph,
    UNIT_KERNEL,
    adjoint_integrate,
    brute_force_value,
    cost,
    sensitivity_bound_check,
    integrate,
    sensitivity_bound,
    meeting_time_bound,
    run,
    spe_check,
    two_node_cost,
)

from conftest import base_config, path3, random_connected_graph, random_schedule, two_node

E4 = math.exp(-4.0)

SPE_GRAPH = Graph(3, ((1, 2, 1.0), (2, 3, 10.0)))
SPE_X0 = (1.0, 0.0, -1.0)
SPE_HORIZON = 2.0 / 3.0


def test_two_node_cost_examples():
    assert two_node_cost(1.0, 0.0, 2.0, 1.0) == pytest.approx(0.5 * (1.0 - E4), rel=1e-15)
    assert two_node_cost(1.0, 1.0, 2.0, 1.0) == pytest.approx(
        0.25 * (1.0 - math.exp(-8.0)), rel=1e-15
    )
    assert two_node_cost(1.0, 0.0, 0.0, 1.0) == 0.0
    with pytest.raises(ValueError, match="positive"):
        two_node_cost(1.0, -1.0, 2.0, 1.0)


def test_two_node_cost_agrees_with_integrator():
    for boost in (0.0, 0.5, 1.0):
        control = ControlPair(boosts={(1, 2): boost} if boost else {})
        traj = integrate(two_node(), (1.0, -1.0), [control], 1.0, 1e-3)
        measured = cost(traj, UNIT_KERNEL)
        assert measured == pytest.approx(two_node_cost(1.0, boost, 2.0, 1.0), rel=1e-6)


def test_sensitivity_bound_examples():
    assert sensitivity_bound(2, 1.0, (1.0, -1.0)) == 8.0
    assert sensitivity_bound(3, 2.0 / 3.0, (1.0, 0.0, -1.0)) == 8.0
    assert sensitivity_bound(3, 1.0, (0.0, 0.0, 0.0)) == 0.0
    with pytest.raises(ValueError, match="length"):
        sensitivity_bound(2, 1.0, (1.0, 0.0, -1.0))


def test_sensitivity_bound_two_node_closed_form():
    g = two_node()
    traj = integrate(g, (1.0, -1.0), [ControlPair.null()], 1.0, 1e-3)
    adj = adjoint_integrate(g, traj, UNIT_KERNEL)
    report = sensitivity_bound_check(traj, adj, g, 8.0)
    assert report.ok
    # closed form: |f(t)| = 2 (exp(-4t) - exp(-4)), maximal at t = 0
    assert report.max_abs_f == pytest.approx(2.0 * (1.0 - E4), abs=1e-6)
    assert report.worst_edge == (1, 2)
    assert report.worst_time == 0.0
    assert report.worst_ratio == pytest.approx(report.max_abs_f / 8.0, rel=1e-12)


def test_sensitivity_bound_trivial_and_violated():
    g = two_node()
    flat = integrate(g, (0.5, 0.5), [ControlPair.null()], 1.0, 1e-2)
    adj = adjoint_integrate(g, flat, UNIT_KERNEL)
    report = sensitivity_bound_check(flat, adj, g, 8.0)
    assert report.ok and report.worst_ratio == 0.0
    excited = integrate(g, (1.0, -1.0), [ControlPair.null()], 1.0, 1e-2)
    adj2 = adjoint_integrate(g, excited, UNIT_KERNEL)
    violated = sensitivity_bound_check(excited, adj2, g, 0.0)
    assert not violated.ok
    assert violated.worst_ratio == math.inf


def test_sensitivity_bound_randomized_runs():
    rng = np.random.default_rng(77)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        m_max = n * (n - 1) // 2
        g = random_connected_graph(rng, n, int(rng.integers(n - 1, m_max + 1)))
        x0 = rng.normal(size=n)
        horizon = 1.0
        schedule = random_schedule(rng, g, min(2, g.edge_count), 1.0, 2)
        traj = integrate(g, x0, schedule, horizon, 2e-3)
        adj = adjoint_integrate(g, traj, UNIT_KERNEL)
        bound = sensitivity_bound(n, horizon, x0)
        assert sensitivity_bound_check(traj, adj, g, bound).ok


def test_meeting_time_degenerate_two_node():
    matrix = np.array([[-1.0, 1.0], [1.0, -1.0]])
    report = meeting_time_bound(matrix, (2.0, 1.0), 0.0)
    assert report.candidates == (None,)
    assert report.suggested_horizon is None


def test_meeting_time_star_like_example():
    matrix = np.array([[-3.0, 2.0, 1.0], [2.0, -2.0, 0.0], [1.0, 0.0, -1.0]])
    report = meeting_time_bound(matrix, (4.0, 2.0, 1.0), 0.0)
    assert report.candidates[0] == pytest.approx(math.log(4.0), rel=1e-12)
    assert report.candidates[1] == pytest.approx(math.log(4.0), rel=1e-12)
    assert report.suggested_horizon == pytest.approx(math.log(4.0), rel=1e-12)


def test_meeting_time_log_domain_and_sorting():
    matrix = np.array([[-3.0, 2.0, 1.0], [2.0, -2.0, 0.0], [1.0, 0.0, -1.0]])
    report = meeting_time_bound(matrix, (4.0, 2.0, -1.0), 0.0)
    assert report.candidates == (None, None)
    with pytest.raises(ValueError, match="sorted"):
        meeting_time_bound(matrix, (1.0, 2.0, 3.0), 0.0)


def test_meeting_time_offset_start():
    matrix = np.array([[-3.0, 2.0, 1.0], [2.0, -2.0, 0.0], [1.0, 0.0, -1.0]])
    report = meeting_time_bound(matrix, (4.0, 2.0, 1.0), 0.5)
    assert report.suggested_horizon == pytest.approx(0.5 + math.log(4.0), rel=1e-12)


def test_spe_certificate_satisfied_fixture():
    cert = spe_check(SPE_GRAPH, SPE_X0, SPE_HORIZON, 1.0, 1.5)
    assert cert.bound_m == pytest.approx(8.0, abs=1e-12)
    assert cert.gamma == pytest.approx(8.0, abs=1e-12)
    assert cert.bound_b == pytest.approx(2.0, abs=1e-12)
    assert cert.side_conditions_ok
    assert cert.satisfied
    assert cert.witness is None
    assert "SATISFIED" in cert.verdict_line()


def test_spe_certificate_bound_exceeded():
    cert = spe_check(SPE_GRAPH, SPE_X0, SPE_HORIZON, 1.0, 3.0)
    assert not cert.satisfied
    assert cert.side_conditions_ok
    assert cert.witness == ((1, 2), (2, 3))  # the pair attaining the bound


def test_spe_certificate_equal_weights_fail_side_conditions():
    g = Graph(3, ((1, 2, 1.0), (2, 3, 1.0)))
    cert = spe_check(g, SPE_X0, SPE_HORIZON, 1.0, 0.1)
    assert not cert.side_conditions_ok
    assert not cert.satisfied
    assert cert.witness is not None


def test_spe_certificate_gamma_guard_and_degenerate():
    with pytest.raises(ValueError, match="gamma"):
        spe_check(SPE_GRAPH, SPE_X0, SPE_HORIZON, 100.0, 1.0)
    with pytest.raises(ValueError, match="positive"):
        spe_check(SPE_GRAPH, SPE_X0, SPE_HORIZON, 0.0, 1.0)
    cert = spe_check(two_node(), (1.0, -1.0), 1.0, 1.0, 0.5)
    assert cert.degenerate
    assert not cert.satisfied
    assert cert.bound_b is None
    assert "DEGENERATE" in cert.verdict_line()


def test_spe_certificate_monotone_in_b():
    satisfied_at = [
        b
        for b in np.linspace(0.0, 4.0, 41)
        if spe_check(SPE_GRAPH, SPE_X0, SPE_HORIZON, 1.0, float(b)).satisfied
    ]
    assert satisfied_at
    assert max(satisfied_at) == pytest.approx(2.0, abs=1e-12)
    # satisfied at b implies satisfied at every smaller b on the grid
    assert satisfied_at == [b for b in np.linspace(0.0, 4.0, 41) if b <= max(satisfied_at)]


def test_brute_force_two_node_maxmin():
    g = two_node()
    cfg = base_config(g, x0=(1.0, -1.0), mode="maxmin")
    report = brute_force_value(g, cfg)
    assert report.value == pytest.approx(2.0, abs=1e-9)
    assert report.enumerated == 4  # two break choices times two boost choices
    assert report.action_sequence[0][0] == ((1, 2),)


def test_brute_force_every_interval_breaks_the_link():
    g = two_node()
    cfg = base_config(g, x0=(1.0, -1.0), mode="maxmin", switching_count=2)
    report = brute_force_value(g, cfg)
    assert report.value == pytest.approx(2.0, abs=1e-9)
    assert all(broken == ((1, 2),) for broken, _ in report.action_sequence)
    assert report.enumerated == 16


def test_brute_force_equilibrium_start():
    g = path3()
    cfg = base_config(g, x0=(0.5, 0.5, 0.5), mode="maxmin", dt=1e-2)
    assert brute_force_value(g, cfg).value == 0.0


def test_brute_force_uncontrolled_matches_cost_exactly():
    g = path3()
    cfg = base_config(g, x0=(1.0, 0.0, -1.0), mode="uncontrolled", dt=1e-2)
    report = brute_force_value(g, cfg)
    direct = run(g, cfg)
    assert report.value == direct.value
    assert report.enumerated == 1


def test_brute_force_matches_greedy_on_short_horizons():
    g = path3(1.0, 2.0)
    cfg = base_config(
        g, x0=(1.0, 0.0, -1.0), mode="minmax", horizon=0.2, dt=1e-3, b=0.5
    )
    for mode in ("maxmin", "minmax"):
        mode_cfg = replace(cfg, mode=mode)
        exact = brute_force_value(g, mode_cfg).value
        greedy = run(g, mode_cfg).value
        assert greedy == pytest.approx(exact, rel=1e-3)


def test_brute_force_single_player_modes():
    g = two_node()
    for mode, expected in (("adversary_only", 2.0), ("designer_only", 0.25 * (1 - math.exp(-8.0)))):
        cfg = base_config(g, x0=(1.0, -1.0), mode=mode)
        report = brute_force_value(g, cfg)
        assert report.value == pytest.approx(expected, rel=1e-9)
        assert report.value == pytest.approx(run(g, cfg).value, rel=1e-12)


def test_refining_dt_does_not_close_interval_length_gaps():
    # With one long interval the exact best response can disagree with the
    # instantaneous ranking (it prefers isolating the far-from-average node).
    # The resulting greedy-vs-exact gap is a property of the interval length,
    # not of integration accuracy, so halving dt must leave it intact.
    g = Graph(3, ((1, 2, 1.0), (2, 3, 2.0)))
    cfg = base_config(
        g,
        x0=(math.sqrt(10.0), 0.0, -2.0),
        b=4.0,
        horizon=1.0,
        dt=2e-3,
        switching_count=1,
        mode="minmax",
    )
    gaps = []
    for dt in (2e-3, 1e-3):
        c = replace(cfg, dt=dt)
        exact = brute_force_value(g, c).value
        greedy = run(g, c).value
        gaps.append(abs(greedy - exact) / exact)
    assert gaps[0] > 1e-3
    assert gaps[1] == pytest.approx(gaps[0], rel=1e-4)


def test_brute_force_handles_exponential_kernel():
    from consensus_interdiction import Kernel

    g = path3(1.0, 2.0)
    cfg = base_config(
        g,
        x0=(1.0, 0.0, -1.0),
        b=0.5,
        horizon=0.2,
        dt=1e-3,
        switching_count=2,
        kernel=Kernel("exponential", -1.5),
        mode="uncontrolled",
    )
    assert brute_force_value(g, cfg).value == run(g, cfg).value
    for mode in ("maxmin", "minmax"):
        mode_cfg = replace(cfg, mode=mode)
        assert run(g, mode_cfg).value == pytest.approx(
            brute_force_value(g, mode_cfg).value, rel=1e-9
        )


def test_brute_force_guard():
    rng = np.random.default_rng(55)
    g = random_connected_graph(rng, 5, 8)
    cfg = base_config(
        g, x0=tuple(rng.normal(size=5)), ell=2, mode="maxmin", switching_count=2, dt=1e-2
    )
    with pytest.raises(EnumerationGuardError, match="guard"):
        brute_force_value(g, cfg, guard=100)


def test_brute_force_report_round_trips_to_json():
    import json

    g = two_node()
    report = brute_force_value(g, base_config(g, x0=(1.0, -1.0), mode="maxmin"))
    payload = json.loads(json.dumps(report.to_record()))
    assert payload["mode"] == "maxmin"
    assert payload["enumerated"] == 4
