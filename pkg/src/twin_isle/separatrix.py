"""Stable manifold of the saddle (q, q) and where it leaves the unit square.

The sub-diagonal branch is traced backward in time under the sub-diagonal
piece from a point just off the saddle along its stable eigendirection.
It leaves the square either through the bottom edge at ``(eta, 0)`` or
through the right edge at ``(1, zeta)``. The super-diagonal branch is its
mirror image.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .equilibria import saddle_stable_direction
from .integrator import (
    Direction,
    Edge,
    ExitedDomain,
    IntegratorConfig,
    StopCondition,
    integrate,
    refine_boundary_crossing,
)
from .model import EpidemicParams, PhasePoint, Regime
from .output import csv_text, resolve_threads


class ExitThroughUnexpectedEdge(RuntimeError):
    pass


@dataclass(frozen=True)
class Eta:
    value: float
    kind = "eta"


@dataclass(frozen=True)
class Zeta:
    value: float
    kind = "zeta"


Exit = Union[Eta, Zeta]

# (edge, exit type, coordinate holding the exit value) per branch
_EXPECTED = {
    Regime.PIECE_SUB: {Edge.BOTTOM: (Eta, 0), Edge.RIGHT: (Zeta, 1)},
    Regime.PIECE_SUPER: {Edge.LEFT: (Eta, 1), Edge.TOP: (Zeta, 0)},
}


@dataclass
class SeparatrixTrace:
    side: Regime
    polyline: np.ndarray
    exit: Exit
    params: EpidemicParams

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(float(a), float(b)) for a, b in self.polyline]

    def to_csv(self) -> str:
        return csv_text(("x_a", "x_b"), self.polyline)


def trace_separatrix(
    params: EpidemicParams,
    side: Regime = Regime.PIECE_SUB,
    offset: float = 1e-6,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> SeparatrixTrace:
    if side not in _EXPECTED:
        raise ValueError(f"side must be PIECE_SUB or PIECE_SUPER, got {side}")
    if not (1e-9 <= offset <= 1e-3):
        raise ValueError(f"offset {offset!r} outside [1e-9, 1e-3]")
    q = params.q
    d = np.array(saddle_stable_direction(params, side))
    if side is Regime.PIECE_SUB:
        d = -d  # the stored direction points up-left, into the other region
    start = PhasePoint(*(np.array([q, q]) + offset * d))
    traj = integrate(start, params, side, cfg, Direction.BACKWARD, StopCondition(on_exit=True))
    if not isinstance(traj.terminal, ExitedDomain):
        raise ExitThroughUnexpectedEdge(
            f"separatrix did not leave the unit square within t_max={cfg.t_max}"
        )
    edge = traj.terminal.edge
    if edge not in _EXPECTED[side]:
        raise ExitThroughUnexpectedEdge(f"{side.value} branch left through {edge.value}")
    point = refine_boundary_crossing(traj, edge)
    kind, coord = _EXPECTED[side][edge]
    value = (point.x_a, point.x_b)[coord]
    if (kind is Eta and not value > q) or (kind is Zeta and not value < q):
        raise ExitThroughUnexpectedEdge(f"{kind.kind}={value!r} on the wrong side of q={q!r}")
    poly = traj.x.copy()
    poly[-1] = (point.x_a, point.x_b)
    return SeparatrixTrace(side, poly, kind(value), params)


def recovery_area(trace: SeparatrixTrace) -> float:
    """Area of the origin's basin inside the rectangle beside the diagonal.

    For the sub branch this is the part of [q,1]x[0,q] lying between the
    line x_a = q and the traced curve (shoelace formula on the closed
    polygon). The super branch gives the same number by symmetry.
    """
    q = trace.params.q
    poly = trace.polyline
    if trace.side is Regime.PIECE_SUPER:
        poly = poly[:, ::-1]
    tail = [[1.0, 0.0], [q, 0.0]] if isinstance(trace.exit, Zeta) else [[q, 0.0]]
    pts = np.vstack([[[q, q]], poly, tail])
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def basin_area_from_trace(params: EpidemicParams, cfg: IntegratorConfig = IntegratorConfig()) -> float:
    """Area of the origin's basin: both rectangles plus the square [0,q]^2."""
    return 2 * recovery_area(trace_separatrix(params, cfg=cfg)) + params.q ** 2


@dataclass(frozen=True)
class SweepPoint:
    q: float
    exit: Optional[Exit]
    error: Optional[str] = None


@dataclass
class SweepResult:
    nu: float
    points: list[SweepPoint]
    threshold: Optional[float]

    def to_csv(self) -> str:
        rows = []
        for p in self.points:
            if p.exit is None:
                rows.append((p.q, "error", float("nan")))
            else:
                rows.append((p.q, p.exit.kind, p.exit.value))
        return csv_text(("q", "exit_type", "exit_value"), rows)


def _exit_or_error(nu: float, q: float, cfg: IntegratorConfig) -> SweepPoint:
    try:
        return SweepPoint(q, trace_separatrix(EpidemicParams.identical(nu, q), cfg=cfg).exit)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return SweepPoint(q, None, f"{type(exc).__name__}: {exc}")


def eta_zeta_sweep(
    nu: float,
    q_values: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
    threshold_tol: float = 1e-3,
    threads: Optional[int] = None,
) -> SweepResult:
    """Exit point of the sub branch for each q, plus the eta-to-zeta switch.

    The switch is bisected in q between the first adjacent pair of sweep
    points whose exit types differ, until the bracket is narrower than
    ``threshold_tol``; ``threshold`` is None when no flip is seen.
    """
    qs = sorted(float(q) for q in q_values)
    workers = threads if threads is not None else resolve_threads()
    if workers > 1 and len(qs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda q: _exit_or_error(nu, q, cfg), qs))
    else:
        points = [_exit_or_error(nu, q, cfg) for q in qs]

    threshold = None
    ok = [p for p in points if p.exit is not None]
    for lo_pt, hi_pt in zip(ok, ok[1:]):
        if type(lo_pt.exit) is not type(hi_pt.exit):
            lo, hi = lo_pt.q, hi_pt.q
            lo_kind = type(lo_pt.exit)
            while hi - lo > threshold_tol:
                mid = 0.5 * (lo + hi)
                probe = _exit_or_error(nu, mid, cfg)
                if probe.exit is None:
                    break
                if type(probe.exit) is lo_kind:
                    lo = mid
                else:
                    hi = mid
            threshold = 0.5 * (lo + hi)
            break
    return SweepResult(nu, points, threshold)
