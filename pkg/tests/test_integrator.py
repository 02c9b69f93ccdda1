import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twin_isle import integrator as integ
from twin_isle.integrator import (
    ConvergedToAttractor,
    Direction,
    Edge,
    ExitedDomain,
    IntegratorConfig,
    NoCrossing,
    ReachedTMax,
    StopCondition,
    Trajectory,
    converge_batch,
    integrate,
    refine_boundary_crossing,
)
from twin_isle.model import EpidemicParams, PhasePoint, Regime

ORIGIN, ONE = PhasePoint(0.0, 0.0), PhasePoint(1.0, 1.0)
inner = st.floats(0.05, 0.95)
unit = st.floats(0.0, 1.0)


def cubic_time(x, x0, nu, q):
    """Exact time for nu*x(1-x)(x-q) to carry x0 to x (partial fractions)."""
    return (-math.log(x / x0) / q - math.log((1 - x) / (1 - x0)) / (1 - q)
            + math.log((x - q) / (x0 - q)) / (q * (1 - q))) / nu


@pytest.mark.parametrize("kwargs", [
    dict(rel_tol=0.0), dict(abs_tol=-1.0), dict(max_step=0.0), dict(t_max=0.0), dict(rel_tol=1e-15),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_fixed_point_stays_put(params):
    traj = integrate(ORIGIN, params, Regime.GLOBALIZED, IntegratorConfig(t_max=10))
    assert isinstance(traj.terminal, ReachedTMax)
    assert np.all(traj.x == 0.0)
    assert traj.t[-1] == pytest.approx(10.0)


def test_recovers_from_small_shock(params):
    stop = StopCondition(attractors=(ORIGIN, ONE))
    traj = integrate(PhasePoint(0.1, 0.1), params, Regime.GLOBALIZED, stop=stop)
    assert traj.terminal == ConvergedToAttractor(0, ORIGIN)
    assert math.hypot(*traj.final) < 1e-4


def test_diagonal_matches_exact_cubic_time(params):
    stop = StopCondition(attractors=(ORIGIN, ONE))
    traj = integrate(PhasePoint(0.5, 0.5), params, Regime.GLOBALIZED, stop=stop)
    assert traj.terminal == ConvergedToAttractor(1, ONE)
    assert np.all(traj.x[:, 0] == traj.x[:, 1])
    for t, (x, _) in zip(traj.t[1::25], traj.x[1::25]):
        assert t == pytest.approx(cubic_time(x, 0.5, params.nu, params.q), rel=1e-6)


def test_time_monotone_both_directions(params):
    fwd = integrate(PhasePoint(0.6, 0.2), params, Regime.GLOBALIZED, IntegratorConfig(t_max=20))
    assert np.all(np.diff(fwd.t) > 0)
    bwd = integrate(PhasePoint(0.45, 0.35), params, Regime.PIECE_SUB, IntegratorConfig(t_max=20),
                    Direction.BACKWARD, StopCondition(on_exit=True))
    assert np.all(np.diff(bwd.t) < 0)
    assert isinstance(bwd.terminal, ExitedDomain)


def test_refine_on_hand_built_bracket():
    traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.38, 1e-5], [0.381, -1e-5]]), ReachedTMax())
    p = refine_boundary_crossing(traj, Edge.BOTTOM)
    assert abs(p.x_b) <= 1e-10
    assert p.x_a == pytest.approx(0.3805, abs=1e-9)


def test_refine_without_bracket_raises():
    traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.3, 0.2], [0.4, 0.1]]), ReachedTMax())
    with pytest.raises(NoCrossing):
        refine_boundary_crossing(traj, Edge.BOTTOM)


@pytest.mark.parametrize("q, edge", [(0.2, Edge.BOTTOM), (0.5, Edge.RIGHT)])
def test_backward_sub_trace_exit_edge(q, edge):
    # oracle: the tangent line test nu >= q/(2(1-q)^2) picks the bottom edge
    p = EpidemicParams.identical(0.7, q)
    slope = 2 * 0.7 * (1 - q)
    start = PhasePoint(q + 1e-6 / math.hypot(1, slope), q - 1e-6 * slope / math.hypot(1, slope))
    traj = integrate(start, p, Regime.PIECE_SUB, IntegratorConfig(), Direction.BACKWARD,
                     StopCondition(on_exit=True))
    assert traj.terminal.edge is edge
    crossing = refine_boundary_crossing(traj, edge)
    pinned = crossing.x_b if edge is Edge.BOTTOM else crossing.x_a - 1
    assert abs(pinned) <= 1e-10


def test_trajectory_csv_header(params):
    traj = integrate(PhasePoint(0.2, 0.1), params, Regime.GLOBALIZED, IntegratorConfig(t_max=0.05))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,x_a,x_b"
    assert lines[1] == "0,0.2,0.1"


@given(unit, unit, inner, inner, st.sampled_from([Regime.GLOBALIZED, Regime.AUTARKY]))
def test_unit_square_invariance(a, b, nu, q, regime):
    p = EpidemicParams.identical(nu, q)
    traj = integrate(PhasePoint(a, b), p, regime, IntegratorConfig(t_max=30))
    assert traj.x.min() >= -1e-6 and traj.x.max() <= 1 + 1e-6


@given(unit, inner, inner)
def test_diagonal_invariance(x, nu, q):
    p = EpidemicParams.identical(nu, q)
    traj = integrate(PhasePoint(x, x), p, Regime.GLOBALIZED, IntegratorConfig(t_max=30))
    assert np.max(np.abs(traj.x[:, 0] - traj.x[:, 1])) <= 1e-9


@given(unit, unit, inner, inner)
def test_region_invariance(a, b, nu, q):
    p = EpidemicParams.identical(nu, q)
    traj = integrate(PhasePoint(a, b), p, Regime.GLOBALIZED, IntegratorConfig(t_max=30))
    gap = traj.x[:, 0] - traj.x[:, 1]
    if a > b:
        assert gap.min() >= -1e-9
    elif a < b:
        assert gap.max() <= 1e-9


@given(unit, unit, inner, inner)
def test_tolerance_halving_changes_little(a, b, nu, q):
    p = EpidemicParams.identical(nu, q)
    cfg = IntegratorConfig(t_max=5)
    coarse = integrate(PhasePoint(a, b), p, Regime.GLOBALIZED, cfg).final
    fine = integrate(PhasePoint(a, b), p, Regime.GLOBALIZED, cfg.tightened()).final
    assert abs(coarse.x_a - fine.x_a) <= 1e-6 and abs(coarse.x_b - fine.x_b) <= 1e-6


def test_batch_agrees_with_scalar(params):
    rng = np.random.default_rng(3)
    pts = rng.random((40, 2))
    res = converge_batch(pts, params, Regime.GLOBALIZED, [ORIGIN, ONE], threads=1)
    stop = StopCondition(attractors=(ORIGIN, ONE))
    for (a, b), idx in zip(pts, res.index):
        traj = integrate(PhasePoint(a, b), params, Regime.GLOBALIZED, stop=stop)
        assert traj.terminal.index == idx


def test_batch_bitwise_identical_across_threads(params, monkeypatch):
    monkeypatch.setattr(integ, "CHUNK", 64)
    pts = np.random.default_rng(5).random((300, 2))
    one = converge_batch(pts, params, Regime.GLOBALIZED, [ORIGIN, ONE], threads=1)
    many = converge_batch(pts, params, Regime.GLOBALIZED, [ORIGIN, ONE], threads=4)
    for field in ("index", "final", "t", "lo", "hi", "max_offdiag"):
        assert np.array_equal(getattr(one, field), getattr(many, field))


def test_batch_empty_input(params):
    res = converge_batch(np.empty((0, 2)), params, Regime.GLOBALIZED, [ORIGIN, ONE])
    assert res.index.shape == (0,)


def test_batch_unresolved_on_tiny_budget(params):
    res = converge_batch([[0.3, 0.6]], params, Regime.GLOBALIZED, [ORIGIN, ONE],
                         IntegratorConfig(t_max=0.5))
    assert res.index[0] == -1
