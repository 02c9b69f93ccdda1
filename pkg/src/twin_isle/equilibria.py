"""Fixed points, Jacobians and stability of every regime."""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import (
    EpidemicParams,
    GeneralTwoLocation,
    PhasePoint,
    PIECES,
    Regime,
    RegimeLike,
    check_regime,
    field,
    single_location_rhs,
)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
DEDUP_TOL = 1e-8
DOMAIN_TOL = 1e-9


class ConvergenceFailure(RuntimeWarning):
    """Some Newton seeds did not converge (reported, never fatal)."""


class StabilityClass(enum.Enum):
    STABLE_NODE = "StableNode"
    SADDLE = "Saddle"
    SOURCE = "Source"


@dataclass(frozen=True)
class EquilibriumInfo:
    """A fixed point with its linearization.

    Eigenvalues are sorted ascending; eigenvectors are unit length with a
    non-negative second component (non-negative first one if that is zero).
    Single-location equilibria keep the state in ``location.x_a`` and carry
    one eigenvalue.
    """

    location: PhasePoint
    eigenvalues: tuple[float, ...]
    eigenvectors: tuple[tuple[float, ...], ...]
    stability: StabilityClass

    def to_dict(self) -> dict:
        return {
            "location": [self.location.x_a, self.location.x_b],
            "eigenvalues": list(self.eigenvalues),
            "eigenvectors": [list(v) for v in self.eigenvectors],
            "class": self.stability.value,
        }


def classify(eigenvalues) -> StabilityClass:
    if any(ev == 0 for ev in eigenvalues):
        raise ValueError(f"non-hyperbolic point, eigenvalues {eigenvalues}")
    if all(ev < 0 for ev in eigenvalues):
        return StabilityClass.STABLE_NODE
    if all(ev > 0 for ev in eigenvalues):
        return StabilityClass.SOURCE
    return StabilityClass.SADDLE


def _orient(v) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    v = v / np.hypot(v[0], v[1])
    if v[1] < 0 or (v[1] == 0 and v[0] < 0):
        v = -v
    return float(v[0]), float(v[1])


def eig2x2(jac) -> tuple[tuple[float, float], tuple[tuple[float, float], tuple[float, float]]]:
    """Real eigenpairs of a 2x2 matrix from its trace and determinant."""
    a, b, c, d = (float(v) for v in np.ravel(jac))
    half_tr = 0.5 * (a + d)
    disc = 0.25 * (a - d) ** 2 + b * c
    if disc < 0:
        raise ValueError(f"complex eigenvalues for {jac}")
    s = math.sqrt(disc)
    big = half_tr + math.copysign(s, half_tr)
    det = a * d - b * c
    other = det / big if big != 0 else half_tr - s
    lams = sorted((big, other))
    if b == 0 and c == 0:
        basis = (0, 1) if a <= d else (1, 0)
        vecs = [_orient(np.eye(2)[k]) for k in basis]
    else:
        vecs = []
        for lam in lams:
            v1 = np.array([b, lam - a])
            v2 = np.array([lam - d, c])
            vecs.append(_orient(v1 if np.hypot(*v1) >= np.hypot(*v2) else v2))
    return (lams[0], lams[1]), (vecs[0], vecs[1])


def _dg(x, nu, q):
    """Derivative of nu*x(1-x)(x-q)."""
    return nu * ((2 - 3 * x) * x + q * (2 * x - 1))


def _sub_jacobian(a, b, nu, q):
    u = 1 - a + b
    g = a * (1 - a) * (a - q)
    dg = (2 - 3 * a) * a + q * (2 * a - 1)
    h = a + b - 2 * a * b
    return np.array([
        [nu * (-2 * u * g + u * u * dg) - (2 * a - b), nu * 2 * u * g + a],
        [nu * ((1 - 2 * b) * (a - b) + h), _dg(b, nu, q) + nu * ((1 - 2 * a) * (a - b) - h)],
    ])


def jacobian_closed_form(at: PhasePoint, params: EpidemicParams, piece: Regime) -> np.ndarray:
    """Analytic Jacobian of the sub/super piece or of the uncoupled field."""
    a, b = at.x_a, at.x_b
    if piece in (Regime.AUTARKY, Regime.PIECE_DIAGONAL):
        check_regime(params, piece)
        return np.diag([_dg(a, params.nu_a, params.q_a), _dg(b, params.nu_b, params.q_b)])
    check_regime(params, piece)
    if piece is Regime.PIECE_SUB:
        return _sub_jacobian(a, b, params.nu, params.q)
    if piece is Regime.PIECE_SUPER:
        m = _sub_jacobian(b, a, params.nu, params.q)
        return m[::-1, ::-1].copy()
    raise ValueError(f"no closed-form Jacobian for {piece}")


def jacobian_numeric(at: PhasePoint, params: EpidemicParams, regime: RegimeLike,
                     step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of ``field``."""
    jac = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        hi = field(PhasePoint(at.x_a + e[0], at.x_b + e[1]), params, regime)
        lo = field(PhasePoint(at.x_a - e[0], at.x_b - e[1]), params, regime)
        jac[:, j] = (np.array(hi) - np.array(lo)) / (2 * step)
    return jac


def newton(fun: Callable, jac: Callable, x0, tol: float = NEWTON_TOL,
           max_iter: int = NEWTON_MAX_ITER) -> tuple[np.ndarray, bool]:
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        fx = np.asarray(fun(x), dtype=float)
        if not np.any(fx):
            return x, True
        try:
            dx = np.linalg.solve(np.atleast_2d(jac(x)), np.atleast_1d(fx))
        except np.linalg.LinAlgError:
            return x, False
        x = x - dx.reshape(x.shape)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e6:
            return x, False
        if np.max(np.abs(dx)) <= tol:
            return x, True
    return x, False


def _in_square(x) -> bool:
    return bool(np.all(x >= -DOMAIN_TOL) and np.all(x <= 1 + DOMAIN_TOL))


def _dedup(roots):
    kept = []
    for r in roots:
        if all(np.max(np.abs(r - k)) > DEDUP_TOL for k in kept):
            kept.append(r)
    return sorted(kept, key=lambda r: tuple(r))


def _info(root, jac) -> EquilibriumInfo:
    lams, vecs = eig2x2(jac)
    return EquilibriumInfo(PhasePoint(float(root[0]), float(root[1])), lams, vecs, classify(lams))


def find_equilibria(params: EpidemicParams, regime: RegimeLike, seed_grid_n: int = 11,
                    failures: Optional[list] = None) -> list[EquilibriumInfo]:
    """Fixed points of ``regime`` inside the unit square, with stability.

    Newton runs from an n-by-n grid of seeds over [0,1]^2 (n seeds on [0,1]
    for the single-location cubic). For the globalized field each seed uses
    the smooth piece of its own region and only roots in that region's
    closure count; points on the diagonal take the sub-diagonal Jacobian,
    whose eigenvalues the super-diagonal piece shares. Seeds that fail to
    converge are appended to ``failures`` when given, otherwise reported
    with a ConvergenceFailure warning.
    """
    check_regime(params, regime)
    if seed_grid_n < 1:
        raise ValueError("seed_grid_n must be positive")
    grid = np.linspace(0.0, 1.0, seed_grid_n)
    unconverged = []

    if regime is Regime.SINGLE_LOCATION:
        nu, q = params.nu_a, params.q_a
        roots = []
        for s in grid:
            x, ok = newton(lambda x: single_location_rhs(x, nu, q),
                           lambda x: _dg(x, nu, q), [s])
            if not ok:
                unconverged.append(PhasePoint(float(s), 0.0))
            elif _in_square(x):
                roots.append(np.array([x[0], 0.0]))
        out = []
        for r in _dedup(roots):
            lam = float(_dg(r[0], nu, q))
            out.append(EquilibriumInfo(PhasePoint(float(r[0]), 0.0), (lam,), ((1.0, 0.0),),
                                       classify((lam,))))
        _report(unconverged, failures)
        return out

    def piece_fun(piece):
        if isinstance(regime, GeneralTwoLocation):
            return lambda x: field(PhasePoint(*x), params, regime)
        if piece is Regime.AUTARKY:
            return lambda x: field(PhasePoint(*x), params, Regime.AUTARKY)
        pf = PIECES[piece]
        return lambda x: pf(x[0], x[1], params.nu, params.q)

    def piece_jac(piece):
        if isinstance(regime, GeneralTwoLocation):
            return lambda x: jacobian_numeric(PhasePoint(*x), params, regime)
        return lambda x: jacobian_closed_form(PhasePoint(*x), params, piece)

    roots = []
    for sa in grid:
        for sb in grid:
            if regime is Regime.GLOBALIZED:
                piece = (Regime.PIECE_SUB if sa > sb else
                         Regime.PIECE_SUPER if sa < sb else Regime.PIECE_DIAGONAL)
            else:
                piece = regime
            x, ok = newton(piece_fun(piece), piece_jac(piece), [sa, sb])
            if not ok:
                unconverged.append(PhasePoint(float(sa), float(sb)))
                continue
            if not _in_square(x):
                continue
            if regime is Regime.GLOBALIZED:
                gap = x[0] - x[1]
                if (piece is Regime.PIECE_SUB and gap < -DOMAIN_TOL) or \
                   (piece is Regime.PIECE_SUPER and gap > DOMAIN_TOL) or \
                   (piece is Regime.PIECE_DIAGONAL and abs(gap) > DOMAIN_TOL):
                    continue
            roots.append(x)

    out = []
    for r in _dedup(roots):
        at = PhasePoint(float(r[0]), float(r[1]))
        if isinstance(regime, GeneralTwoLocation):
            jac = jacobian_numeric(at, params, regime)
        elif regime is Regime.GLOBALIZED:
            side = Regime.PIECE_SUPER if r[0] < r[1] - DOMAIN_TOL else Regime.PIECE_SUB
            jac = jacobian_closed_form(at, params, side)
        else:
            jac = jacobian_closed_form(at, params, regime)
        out.append(_info(r, jac))
    _report(unconverged, failures)
    return out


def _report(unconverged, failures):
    if not unconverged:
        return
    log.debug("%d Newton seeds did not converge: %s", len(unconverged), unconverged)
    if failures is not None:
        failures.extend(unconverged)
    else:
        warnings.warn(f"{len(unconverged)} Newton seeds did not converge", ConvergenceFailure,
                      stacklevel=3)


def attractors(params: EpidemicParams, regime: RegimeLike) -> list[PhasePoint]:
    return [e.location for e in find_equilibria(params, regime)
            if e.stability is StabilityClass.STABLE_NODE]


def saddle_stable_direction(params: EpidemicParams, side: Regime) -> tuple[float, float]:
    """Unit stable eigendirection of the saddle (q, q) for the sub/super piece."""
    nu, q = params.nu, params.q
    slope = -2 * (1 - q) * nu
    if side is Regime.PIECE_SUB:
        return _orient((1 / slope, 1.0))
    if side is Regime.PIECE_SUPER:
        return _orient((slope, 1.0))
    raise ValueError(f"side must be PIECE_SUB or PIECE_SUPER, got {side}")


def saddle_unstable_direction() -> tuple[float, float]:
    return _orient((1.0, 1.0))
