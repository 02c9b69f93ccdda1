"""Closed-form geometry of the linearized separatrix.

Near the saddle (q, q) the sub-diagonal stable manifold is replaced by its
tangent line, whose slope in (x_a, x_b) is -2 nu (1-q). Inside the
rectangle [q,1]x[0,q] the line cuts off either a triangle (it hits the
bottom edge) or a trapezoid (it hits the right edge). Everything below is
an explicit formula in (nu, q).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import EpidemicParams, PhasePoint
from .output import csv_text

BOUNDARY_TOL = 1e-12
# the q-form threshold is compared only away from this band around it
_QFORM_BAND = 1e-10


class AtBoundary(ArithmeticError):
    """Derivative requested exactly on the triangle/trapezoid boundary."""


class Case(enum.Enum):
    TRIANGLE = "Triangle"
    TRAPEZOID = "Trapezoid"
    BOUNDARY = "Boundary"


def nu_threshold(q: float) -> float:
    return q / (2 * (1 - q) ** 2)


def q_threshold(nu: float) -> float:
    return (1 + 4 * nu - math.sqrt(8 * nu + 1)) / (4 * nu)


def case_condition(params: EpidemicParams) -> Case:
    nu, q = params.nu, params.q
    gap = nu - nu_threshold(q)
    if abs(gap) <= BOUNDARY_TOL:
        return Case.BOUNDARY
    case = Case.TRIANGLE if gap > 0 else Case.TRAPEZOID
    qt = q_threshold(nu)
    if abs(q - qt) > _QFORM_BAND and (q > qt) != (case is Case.TRAPEZOID):
        raise ArithmeticError(f"nu- and q-forms of the case test disagree at {params}")
    return case


@dataclass(frozen=True)
class LinearSeparatrix:
    """Tangent lines to both stable branches at the saddle."""

    nu: float
    q: float

    @classmethod
    def from_params(cls, params: EpidemicParams) -> "LinearSeparatrix":
        return cls(params.nu, params.q)

    @property
    def anchor(self) -> PhasePoint:
        return PhasePoint(self.q, self.q)

    @property
    def slope_sub(self) -> float:
        return -2 * self.nu * (1 - self.q)

    @property
    def slope_super(self) -> float:
        return 1 / self.slope_sub

    def sub_line(self, x_a):
        return self.q + self.slope_sub * (np.asarray(x_a) - self.q)

    def super_line(self, x_a):
        return self.q + self.slope_super * (np.asarray(x_a) - self.q)

    def distance_to_sub(self, p) -> float:
        """Euclidean distance from ``p`` to the sub-diagonal tangent line."""
        dx, dy = p[0] - self.q, p[1] - self.q
        return abs(self.slope_sub * dx - dy) / math.hypot(1.0, self.slope_sub)


def p_minus(params: EpidemicParams) -> PhasePoint:
    """Where the sub tangent line leaves the rectangle [q,1]x[0,q]."""
    nu, q = params.nu, params.q
    if case_condition(params) is Case.TRAPEZOID:
        return PhasePoint(1.0, q - 2 * nu * (1 - q) ** 2)
    return PhasePoint(q / (2 * nu * (1 - q)) + q, 0.0)


def p_plus(params: EpidemicParams) -> PhasePoint:
    return p_minus(params).swapped()


def region_area(params: EpidemicParams) -> float:
    """Area between x_a = q and the tangent line inside the rectangle."""
    nu, q = params.nu, params.q
    case = case_condition(params)
    if case is Case.BOUNDARY:
        return q * (1 - q) / 2
    if case is Case.TRIANGLE:
        return q * q / (4 * nu * (1 - q))
    return (1 - q) * (q - nu * (1 - q) ** 2)


def ratio_tilde(params: EpidemicParams) -> float:
    """Recovering share of the rectangle, clamped to [0, 1]."""
    q = params.q
    if case_condition(params) is Case.BOUNDARY:
        return 0.5
    r = region_area(params) / (q * (1 - q))
    if -1e-15 <= r < 0:
        r = 0.0
    return r


@dataclass(frozen=True)
class RatioDerivatives:
    d_dq: float
    d_dnu: float


def ratio_tilde_derivatives(params: EpidemicParams) -> RatioDerivatives:
    nu, q = params.nu, params.q
    case = case_condition(params)
    if case is Case.BOUNDARY:
        raise AtBoundary(f"ratio is not differentiable on the case boundary at {params}")
    if case is Case.TRIANGLE:
        return RatioDerivatives((1 + q) / (4 * nu * (1 - q) ** 3), -q / (4 * (1 - q) ** 2 * nu ** 2))
    return RatioDerivatives((1 / q ** 2 - 1) * nu, -(1 - q) ** 2 / q)


@dataclass(frozen=True)
class RegionGeometry:
    case: Case
    p_minus: PhasePoint
    area: float
    ratio: float


def region_geometry(params: EpidemicParams) -> RegionGeometry:
    return RegionGeometry(case_condition(params), p_minus(params), region_area(params),
                          ratio_tilde(params))


def dAT_dq(params: EpidemicParams) -> float:
    nu, q = params.nu, params.q
    return q * (2 - q) / (4 * nu * (1 - q) ** 2)


def dAQ_dq(params: EpidemicParams) -> float:
    nu, q = params.nu, params.q
    return 1 - 2 * q + 3 * nu * (1 - q) ** 2


def dAQ_dq_positive(params: EpidemicParams) -> bool:
    """Whether the trapezoid area grows with q, from the sign of dA/dq.

    Positive exactly when nu > (2q-1)/(3(1-q)^2), so always for q <= 1/2.
    """
    nu, q = params.nu, params.q
    return nu * 3 * (1 - q) ** 2 > 2 * q - 1


def dAQ_dq_positive_stated(params: EpidemicParams) -> bool:
    """The compound condition as originally published, split at q = 2/7.

    It uses (1-2q)/(3(1-q)^2) where the sign analysis gives (2q-1)/(3(1-q)^2),
    so it disagrees with ``dAQ_dq_positive`` for some trapezoid parameters.
    Kept for comparison only.
    """
    nu, q = params.nu, params.q
    lo = (1 - 2 * q) / (3 * (1 - q) ** 2)
    hi = nu_threshold(q)
    if q > 2 / 7:
        return lo < nu < hi
    if q < 2 / 7:
        return nu < hi or nu > lo
    return False


def area_report_tilde(params: EpidemicParams) -> float:
    """Approximate area of the origin's basin: two regions plus [0,q]^2."""
    return 2 * region_area(params) + params.q ** 2


def tangency_constants(trace_polyline: np.ndarray, params: EpidemicParams,
                       radii: Sequence[float] = (0.02, 0.04, 0.08)) -> dict[float, float]:
    """K_r = dist(curve point at radius r, tangent line) / r^2.

    ``trace_polyline`` is the traced sub branch starting next to the saddle;
    the curve point at radius r is linearly interpolated along it.
    """
    line = LinearSeparatrix.from_params(params)
    q = params.q
    rad = np.hypot(trace_polyline[:, 0] - q, trace_polyline[:, 1] - q)
    out = {}
    for r in radii:
        idx = np.nonzero(rad >= r)[0]
        if idx.size == 0 or idx[0] == 0:
            raise ValueError(f"trace does not cross radius {r}")
        k = idx[0]
        w = (r - rad[k - 1]) / (rad[k] - rad[k - 1])
        p = trace_polyline[k - 1] + w * (trace_polyline[k] - trace_polyline[k - 1])
        out[r] = float(line.distance_to_sub(p) / r ** 2)
    return out


SWEEP_HEADER = ("q", "nu", "case", "area_tilde", "ratio_tilde")


def sweep_rows(q_values: Iterable[float], nu_values: Iterable[float]) -> list[tuple]:
    nus = list(nu_values)
    rows = []
    for q in q_values:
        for nu in nus:
            p = EpidemicParams.identical(nu, q)
            rows.append((q, nu, case_condition(p).value, area_report_tilde(p), ratio_tilde(p)))
    return rows


def sweep_csv(q_values: Iterable[float], nu_values: Iterable[float]) -> str:
    return csv_text(SWEEP_HEADER, sweep_rows(q_values, nu_values))
