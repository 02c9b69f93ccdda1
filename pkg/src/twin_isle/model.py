"""Vector fields for the one- and two-location epidemic dynamics.

Every field here is a pure function of the state. The smooth pieces
(diagonal, sub-diagonal, super-diagonal) are polynomials defined on the
whole plane; restricting states to the unit square is the caller's job.

Array-valued helpers (``*_arrays``) accept numpy arrays of any matching
shape and are what the integrator evaluates in bulk.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np


class RegimeParamMismatch(ValueError):
    """A symmetric-only regime was given asymmetric parameters."""


@dataclass(frozen=True)
class EpidemicParams:
    """Contagiousness and quarantine of locations A and B.

    All four values must lie strictly inside (0, 1).
    """

    nu_a: float
    nu_b: float
    q_a: float
    q_b: float

    def __post_init__(self):
        for name in ("nu_a", "nu_b", "q_a", "q_b"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name}={value!r} must lie in (0, 1)")

    @classmethod
    def identical(cls, nu: float, q: float) -> "EpidemicParams":
        return cls(nu, nu, q, q)

    def symmetric(self) -> bool:
        return self.nu_a == self.nu_b and self.q_a == self.q_b

    @property
    def nu(self) -> float:
        self._require_symmetric()
        return self.nu_a

    @property
    def q(self) -> float:
        self._require_symmetric()
        return self.q_a

    def _require_symmetric(self):
        if not self.symmetric():
            raise RegimeParamMismatch(f"asymmetric parameters {self}")


@dataclass(frozen=True)
class PhasePoint:
    """Infected fractions (x_a, x_b); also used for shock vectors."""

    x_a: float
    x_b: float

    def swapped(self) -> "PhasePoint":
        return PhasePoint(self.x_b, self.x_a)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_a, self.x_b], dtype=float)

    def __iter__(self):
        yield self.x_a
        yield self.x_b


def uniform_cost_cdf(c):
    """CDF of a cost uniform on [0, 1]."""
    return np.clip(c, 0.0, 1.0)


@dataclass(frozen=True)
class PriceCostSpec:
    """Prices in each market and export-cost distributions.

    ``price_a``/``price_b`` map a PhasePoint to the gross utility of trading
    in A/B. ``cost_cdf_a``/``cost_cdf_b`` are CDFs of export costs; they must
    be non-decreasing, zero for non-positive arguments and at most one.
    """

    price_a: Callable[[PhasePoint], float]
    price_b: Callable[[PhasePoint], float]
    cost_cdf_a: Callable[[float], float]
    cost_cdf_b: Callable[[float], float]

    @classmethod
    def linear_uniform(cls) -> "PriceCostSpec":
        return cls(
            price_a=lambda p: 1.0 - p.x_a,
            price_b=lambda p: 1.0 - p.x_b,
            cost_cdf_a=uniform_cost_cdf,
            cost_cdf_b=uniform_cost_cdf,
        )


class Regime(enum.Enum):
    SINGLE_LOCATION = "single"
    GLOBALIZED = "globalized"
    AUTARKY = "autarky"
    PIECE_DIAGONAL = "diagonal"
    PIECE_SUB = "sub"
    PIECE_SUPER = "super"


@dataclass(frozen=True)
class GeneralTwoLocation:
    """The coupled system driven by an arbitrary price/cost specification."""

    spec: PriceCostSpec


RegimeLike = Union[Regime, GeneralTwoLocation]

SYMMETRIC_ONLY = frozenset(
    {Regime.GLOBALIZED, Regime.PIECE_DIAGONAL, Regime.PIECE_SUB, Regime.PIECE_SUPER}
)


def single_location_rhs(x, nu, q):
    return nu * x * (1 - x) * (x - q)


def export_fractions(p: PhasePoint, spec: PriceCostSpec) -> tuple[float, float]:
    """Fractions of A's and B's agents willing to export."""
    pa = spec.price_a(p)
    pb = spec.price_b(p)
    return float(spec.cost_cdf_a(pb - pa)), float(spec.cost_cdf_b(pa - pb))


def general_rhs(x_a, x_b, f_a, f_b, params: EpidemicParams):
    """Two-location field given the export fractions f_a, f_b."""
    mixed = x_a + x_b - 2 * (x_a * x_b)
    v_a = params.nu_a * (1 - f_a) * (
        x_a * (1 - x_a) * (x_a - params.q_a) * (1 - f_a) + mixed * f_b
    ) - x_a * f_a
    v_b = params.nu_b * (1 - f_b) * (
        x_b * (1 - x_b) * (x_b - params.q_b) * (1 - f_b) + mixed * f_a
    ) - x_b * f_b
    return v_a, v_b


def piece_diagonal_arrays(a, b, nu, q):
    return single_location_rhs(a, nu, q), single_location_rhs(b, nu, q)


def piece_sub_arrays(a, b, nu, q):
    # region x_a > x_b: A exports a fraction (x_a - x_b), B does not
    d = a - b
    u = 1 - d
    v_a = nu * u * (a * (1 - a) * (a - q) * u) - a * d
    v_b = nu * (b * (1 - b) * (b - q) + (a + b - 2 * (a * b)) * d)
    return v_a, v_b


def piece_super_arrays(a, b, nu, q):
    d = b - a
    u = 1 - d
    v_a = nu * (a * (1 - a) * (a - q) + (a + b - 2 * (a * b)) * d)
    v_b = nu * u * (b * (1 - b) * (b - q) * u) - b * d
    return v_a, v_b


def globalized_arrays(a, b, nu, q):
    """Linear-uniform coupled field, piece chosen by the side of the diagonal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sub = piece_sub_arrays(a, b, nu, q)
    sup = piece_super_arrays(a, b, nu, q)
    diag = piece_diagonal_arrays(a, b, nu, q)
    out = []
    for i in range(2):
        out.append(np.where(a > b, sub[i], np.where(a < b, sup[i], diag[i])))
    return out[0], out[1]


def autarky_arrays(a, b, params: EpidemicParams):
    return (
        single_location_rhs(a, params.nu_a, params.q_a),
        single_location_rhs(b, params.nu_b, params.q_b),
    )


def check_regime(params: EpidemicParams, regime: RegimeLike):
    if regime in SYMMETRIC_ONLY and not params.symmetric():
        raise RegimeParamMismatch(f"{regime.value} requires symmetric parameters, got {params}")


def field(p: PhasePoint, params: EpidemicParams, regime: RegimeLike) -> tuple[float, float]:
    """Time derivative (v_a, v_b) of the state ``p`` under ``regime``.

    For ``Regime.SINGLE_LOCATION`` the state lives in ``x_a`` alone (with
    location A's parameters) and ``v_b`` is zero.
    """
    check_regime(params, regime)
    a, b = float(p.x_a), float(p.x_b)
    if isinstance(regime, GeneralTwoLocation):
        f_a, f_b = export_fractions(p, regime.spec)
        v = general_rhs(a, b, f_a, f_b, params)
    elif regime is Regime.SINGLE_LOCATION:
        v = (single_location_rhs(a, params.nu_a, params.q_a), 0.0)
    elif regime is Regime.AUTARKY:
        v = autarky_arrays(a, b, params)
    elif regime is Regime.GLOBALIZED:
        if a == b:
            v = piece_diagonal_arrays(a, b, params.nu, params.q)
        elif a > b:
            v = piece_sub_arrays(a, b, params.nu, params.q)
        else:
            v = piece_super_arrays(a, b, params.nu, params.q)
    else:
        v = PIECES[regime](a, b, params.nu, params.q)
    return float(v[0]), float(v[1])


PIECES = {
    Regime.PIECE_DIAGONAL: piece_diagonal_arrays,
    Regime.PIECE_SUB: piece_sub_arrays,
    Regime.PIECE_SUPER: piece_super_arrays,
}


def parse_regime(name: str) -> Regime:
    aliases = {"global": Regime.GLOBALIZED, "linear": Regime.GLOBALIZED}
    if name in aliases:
        return aliases[name]
    return Regime(name)
