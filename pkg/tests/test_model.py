import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twin_isle.model import (
    EpidemicParams,
    GeneralTwoLocation,
    PhasePoint,
    PriceCostSpec,
    Regime,
    RegimeParamMismatch,
    export_fractions,
    field,
    globalized_arrays,
    parse_regime,
    piece_diagonal_arrays,
    piece_sub_arrays,
    piece_super_arrays,
    single_location_rhs,
)

unit = st.floats(0.0, 1.0)
inner = st.floats(0.01, 0.99)


@pytest.mark.parametrize("x, nu, q, expected", [
    (0.0, 0.8, 0.2, 0.0),
    (0.2, 0.8, 0.2, 0.0),
    (0.5, 0.8, 0.2, 0.06),
])
def test_single_location_rhs(x, nu, q, expected):
    assert single_location_rhs(x, nu, q) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_params_reject_out_of_range(bad):
    with pytest.raises(ValueError):
        EpidemicParams(bad, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        EpidemicParams(0.5, 0.5, 0.5, bad)


def test_symmetric_accessors():
    p = EpidemicParams.identical(0.7, 0.4)
    assert p.symmetric() and p.nu == 0.7 and p.q == 0.4
    asym = EpidemicParams(0.7, 0.6, 0.4, 0.4)
    assert not asym.symmetric()
    with pytest.raises(RegimeParamMismatch):
        asym.q


@pytest.mark.parametrize("p, expected", [
    ((0.5, 0.5), (0.0, 0.0)),
    ((0.7, 0.2), (0.5, 0.0)),
    ((1.0, 0.0), (1.0, 0.0)),
])
def test_export_fractions_linear_uniform(p, expected):
    f = export_fractions(PhasePoint(*p), PriceCostSpec.linear_uniform())
    assert f == pytest.approx(expected, abs=1e-15)


def test_field_examples(params):
    assert field(PhasePoint(0, 0), params, Regime.GLOBALIZED) == (0.0, 0.0)
    # V_B(x_a, 0) = nu * x_a^2
    assert field(PhasePoint(0.5, 0), params, Regime.GLOBALIZED)[1] == pytest.approx(0.175, abs=1e-15)
    for nu, q in [(0.1, 0.9), (0.7, 0.4), (0.9, 0.1)]:
        p = EpidemicParams.identical(nu, q)
        assert field(PhasePoint(1, 0.5), p, Regime.GLOBALIZED)[0] == pytest.approx(-0.5, abs=1e-15)


def test_autarky_is_uncoupled():
    p = EpidemicParams(0.3, 0.8, 0.2, 0.6)
    v = field(PhasePoint(0.5, 0.7), p, Regime.AUTARKY)
    assert v == (single_location_rhs(0.5, 0.3, 0.2), single_location_rhs(0.7, 0.8, 0.6))


def test_single_location_regime_ignores_b():
    p = EpidemicParams.identical(0.8, 0.2)
    assert field(PhasePoint(0.5, 0.9), p, Regime.SINGLE_LOCATION) == pytest.approx((0.06, 0.0))


@pytest.mark.parametrize("regime", [Regime.GLOBALIZED, Regime.PIECE_SUB, Regime.PIECE_SUPER,
                                    Regime.PIECE_DIAGONAL])
def test_symmetric_only_regimes_reject_asymmetric(regime):
    with pytest.raises(RegimeParamMismatch):
        field(PhasePoint(0.2, 0.1), EpidemicParams(0.7, 0.6, 0.4, 0.4), regime)


def test_parse_regime_aliases():
    assert parse_regime("global") is Regime.GLOBALIZED
    assert parse_regime("autarky") is Regime.AUTARKY
    with pytest.raises(ValueError):
        parse_regime("nope")


@given(unit, unit, inner, inner)
def test_general_system_matches_linear_pieces(a, b, nu, q):
    p = EpidemicParams.identical(nu, q)
    general = field(PhasePoint(a, b), p, GeneralTwoLocation(PriceCostSpec.linear_uniform()))
    assert general == pytest.approx(field(PhasePoint(a, b), p, Regime.GLOBALIZED), abs=1e-14)


@given(unit, unit, inner, inner)
def test_swap_symmetry(a, b, nu, q):
    p = EpidemicParams.identical(nu, q)
    va, vb = field(PhasePoint(a, b), p, Regime.GLOBALIZED)
    assert field(PhasePoint(b, a), p, Regime.GLOBALIZED) == (vb, va)


@given(unit, inner, inner)
def test_pieces_continuous_on_diagonal(x, nu, q):
    d = piece_diagonal_arrays(x, x, nu, q)
    for piece in (piece_sub_arrays, piece_super_arrays):
        v = piece(x, x, nu, q)
        assert abs(v[0] - d[0]) <= 1e-15 and abs(v[1] - d[1]) <= 1e-15


@given(st.floats(0.001, 0.999), inner, inner)
def test_cubic_sign_pattern(x, nu, q):
    v = single_location_rhs(x, nu, q)
    if math.isclose(x, q, abs_tol=1e-12):
        return
    assert (v < 0) == (x < q)


@given(unit, unit)
def test_one_directional_export(a, b):
    f_a, f_b = export_fractions(PhasePoint(a, b), PriceCostSpec.linear_uniform())
    assert f_a == 0 or f_b == 0


@given(unit, inner, inner)
def test_boundary_inflow(y, nu, q):
    p = EpidemicParams.identical(nu, q)
    for regime in (Regime.GLOBALIZED, Regime.AUTARKY):
        assert field(PhasePoint(0.0, y), p, regime)[0] >= 0
        assert field(PhasePoint(1.0, y), p, regime)[0] <= 0
        assert field(PhasePoint(y, 0.0), p, regime)[1] >= 0
        assert field(PhasePoint(y, 1.0), p, regime)[1] <= 0


def test_globalized_arrays_match_scalar_field(params):
    rng = np.random.default_rng(0)
    pts = rng.random((200, 2))
    pts[:20, 1] = pts[:20, 0]
    va, vb = globalized_arrays(pts[:, 0], pts[:, 1], params.nu, params.q)
    for (a, b), x, y in zip(pts, va, vb):
        assert (x, y) == field(PhasePoint(a, b), params, Regime.GLOBALIZED)
