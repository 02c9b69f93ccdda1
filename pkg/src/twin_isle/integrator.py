"""Adaptive Dormand-Prince 5(4) integration of the epidemic fields.

Two front ends share one vectorized stepping kernel:

* :func:`integrate` follows a single trajectory, records every accepted
  step, splits steps at diagonal crossings of the globalized field, clamps
  tiny overshoots of the unit square and locates boundary exits.
* :func:`converge_batch` pushes many initial states at once until each is
  within ``delta`` of one of the given attractors; basin classification
  runs on it.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .model import (
    EpidemicParams,
    GeneralTwoLocation,
    PhasePoint,
    PIECES,
    Regime,
    RegimeLike,
    autarky_arrays,
    check_regime,
    export_fractions,
    general_rhs,
    piece_diagonal_arrays,
    piece_sub_arrays,
    piece_super_arrays,
    single_location_rhs,
)
from .output import csv_text, resolve_threads

# Dormand & Prince (1980) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

MIN_STEP = 1e-14
DIAGONAL_T_TOL = 1e-12
CROSSING_TOL = 1e-10


class StepSizeUnderflow(RuntimeError):
    def __init__(self, t: float, state: PhasePoint):
        super().__init__(f"step size fell below {MIN_STEP:g} at t={t!r}, state={state}")
        self.t = t
        self.state = state


class NonFiniteState(RuntimeError):
    pass


class NoCrossing(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = 0.1
    clamp_tol: float = 1e-9
    t_max: float = 5000.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "clamp_tol", "t_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rel_tol < 1e-14:
            raise ValueError("rel_tol must be >= 1e-14")

    def tightened(self, factor: float = 0.5) -> "IntegratorConfig":
        return IntegratorConfig(
            self.rel_tol * factor, self.abs_tol * factor, self.max_step,
            self.clamp_tol, self.t_max,
        )


class Direction(enum.Enum):
    FORWARD = 1
    BACKWARD = -1


class Edge(enum.Enum):
    """Sides of the unit square, named by the coordinate they pin."""

    BOTTOM = "x_b=0"
    TOP = "x_b=1"
    LEFT = "x_a=0"
    RIGHT = "x_a=1"

    def margin(self, y) -> float:
        """Signed distance inside the edge (negative means outside)."""
        y = np.asarray(y, dtype=float)
        if self is Edge.BOTTOM:
            return y[..., 1]
        if self is Edge.TOP:
            return 1.0 - y[..., 1]
        if self is Edge.LEFT:
            return y[..., 0]
        return 1.0 - y[..., 0]


@dataclass(frozen=True)
class StopCondition:
    """When to end a run besides the ``t_max`` budget of the config.

    ``attractors``: stop once within ``delta`` (Euclidean) of any of them.
    ``on_exit``: stop when the trajectory leaves the unit square.
    """

    attractors: tuple[PhasePoint, ...] = ()
    delta: float = 1e-4
    on_exit: bool = False


@dataclass(frozen=True)
class ReachedTMax:
    pass


@dataclass(frozen=True)
class ConvergedToAttractor:
    index: int
    attractor: PhasePoint


@dataclass(frozen=True)
class ExitedDomain:
    edge: Edge
    point: PhasePoint


TerminalReason = Union[ReachedTMax, ConvergedToAttractor, ExitedDomain]


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    terminal: TerminalReason
    # first state found beyond the square, kept so the exit can be re-bracketed
    overshoot: Optional[tuple[float, np.ndarray]] = None
    _stepper: Optional[Callable] = dc_field(default=None, repr=False, compare=False)

    @property
    def samples(self) -> list[tuple[float, PhasePoint]]:
        return [(float(t), PhasePoint(float(a), float(b))) for t, (a, b) in zip(self.t, self.x)]

    @property
    def final(self) -> PhasePoint:
        return PhasePoint(float(self.x[-1, 0]), float(self.x[-1, 1]))

    def to_csv(self) -> str:
        return csv_text(("t", "x_a", "x_b"), ((t, a, b) for t, (a, b) in zip(self.t, self.x)))


# -- vector fields in batch form ------------------------------------------------

SUB, DIAG, SUPER = 1, 0, -1


def side_of(y: np.ndarray) -> np.ndarray:
    """+1 below the diagonal (x_a > x_b), -1 above, 0 on it."""
    return np.sign(y[..., 0] - y[..., 1]).astype(int)


def batch_rhs(params: EpidemicParams, regime: RegimeLike) -> Callable:
    """Return ``f(y, side) -> dy`` on arrays of shape (N, 2).

    ``side`` only matters for the globalized field: each row is evaluated on
    the smooth piece for its side, so a step never mixes pieces.
    """
    check_regime(params, regime)

    def stack(va, vb, y):
        out = np.empty_like(y)
        out[:, 0] = va
        out[:, 1] = vb
        return out

    if isinstance(regime, GeneralTwoLocation):
        spec = regime.spec

        def f(y, side):
            out = np.empty_like(y)
            for i, (a, b) in enumerate(y):
                fa, fb = export_fractions(PhasePoint(a, b), spec)
                out[i] = general_rhs(a, b, fa, fb, params)
            return out

        return f

    if regime is Regime.SINGLE_LOCATION:
        return lambda y, side: stack(
            single_location_rhs(y[:, 0], params.nu_a, params.q_a), 0.0, y
        )
    if regime is Regime.AUTARKY:
        return lambda y, side: stack(*autarky_arrays(y[:, 0], y[:, 1], params), y)
    nu, q = params.nu, params.q
    if regime is Regime.GLOBALIZED:

        def f(y, side):
            a, b = y[:, 0], y[:, 1]
            if np.all(side == SUB):
                return stack(*piece_sub_arrays(a, b, nu, q), y)
            if np.all(side == SUPER):
                return stack(*piece_super_arrays(a, b, nu, q), y)
            out = np.empty_like(y)
            for s, piece in ((SUB, piece_sub_arrays), (SUPER, piece_super_arrays),
                             (DIAG, piece_diagonal_arrays)):
                m = side == s
                if m.any():
                    va, vb = piece(a[m], b[m], nu, q)
                    out[m, 0] = va
                    out[m, 1] = vb
            return out

        return f
    piece = PIECES[regime]
    return lambda y, side: stack(*piece(y[:, 0], y[:, 1], nu, q), y)


def dopri_step(f: Callable, y: np.ndarray, h: np.ndarray, side) -> tuple[np.ndarray, np.ndarray]:
    """One Dormand-Prince attempt; returns (5th-order state, error estimate)."""
    hh = h[:, None]
    k = []
    for row in _A:
        yi = y
        for a_ij, kj in zip(row, k):
            if a_ij:
                yi = yi + hh * (a_ij * kj)
        k.append(f(yi, side))
    y5 = y + hh * sum(b * kj for b, kj in zip(_B5, k) if b)
    err = hh * sum(e * kj for e, kj in zip(_E, k) if e)
    return y5, err


def error_norm(err, y0, y1, cfg: IntegratorConfig) -> np.ndarray:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return np.sqrt(np.mean((err / scale) ** 2, axis=-1))


def step_factor(en: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        fac = 0.9 * np.maximum(en, 1e-10) ** -0.2
    return np.clip(fac, 0.2, 5.0)


def _clamps(regime, direction: Direction) -> bool:
    return direction is Direction.FORWARD and regime in (Regime.GLOBALIZED, Regime.AUTARKY)


def _bisect_fraction(g: Callable[[float], float], lo: float, hi: float, done) -> float:
    """Find s in (lo, hi] with g changing sign, g(lo) >= 0 > g(hi)."""
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return hi
        gm = g(mid)
        if gm >= 0:
            lo = mid
        else:
            hi = mid
        if done(lo, hi, gm):
            return hi if gm < 0 else mid


def integrate(
    x0: PhasePoint,
    params: EpidemicParams,
    regime: RegimeLike,
    cfg: IntegratorConfig = IntegratorConfig(),
    direction: Direction = Direction.FORWARD,
    stop: StopCondition = StopCondition(),
) -> Trajectory:
    """Integrate one trajectory from ``x0`` and record every accepted step.

    Raises StepSizeUnderflow or NonFiniteState.
    """
    f = batch_rhs(params, regime)
    sgn = direction.value
    globalized = regime is Regime.GLOBALIZED
    clamp = _clamps(regime, direction)
    attractors = np.array([a.as_array() for a in stop.attractors]).reshape(-1, 2)

    def rk(y, dt, side):
        y5, err = dopri_step(f, y[None, :], np.array([dt]), np.array([side]))
        return y5[0], err[0]

    def stepper(y, dt):
        return rk(np.asarray(y, dtype=float), dt, int(side_of(np.asarray(y))) if globalized else 0)[0]

    y = x0.as_array()
    t = 0.0
    ts, xs = [t], [y.copy()]
    h = min(cfg.max_step, 0.01)
    terminal: TerminalReason = ReachedTMax()
    overshoot = None

    def near_attractor(p):
        if not len(attractors):
            return None
        d = np.hypot(*(attractors - p).T)
        i = int(np.argmin(d))
        return i if d[i] < stop.delta else None

    hit = near_attractor(y)
    if hit is not None:
        terminal = ConvergedToAttractor(hit, stop.attractors[hit])

    while hit is None and abs(t) < cfg.t_max:
        h = min(h, cfg.t_max - abs(t))
        side = int(side_of(y)) if globalized else 0
        y_new, err = rk(y, sgn * h, side)
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(f"non-finite state after step from t={t!r}, x={y}")
        en = float(error_norm(err, y, y_new, cfg))
        if en > 1.0:
            h *= float(step_factor(np.array(en)))
            if h < MIN_STEP:
                raise StepSizeUnderflow(t, PhasePoint(*y))
            continue
        taken = h
        if globalized and side != DIAG and int(side_of(y_new)) == -side:
            # stay on one smooth piece: cut the step where it meets the diagonal
            def g(s):
                z = rk(y, sgn * h * s, side)[0]
                return side * (z[0] - z[1])

            s = _bisect_fraction(g, 0.0, 1.0, lambda lo, hi, gm: (hi - lo) * h <= DIAGONAL_T_TOL)
            taken = s * h
            y_new = rk(y, sgn * taken, side)[0]
            y_new[:] = 0.5 * (y_new[0] + y_new[1])
        outside = (y_new < 0.0) | (y_new > 1.0)
        if outside.any():
            over = np.maximum(-y_new, y_new - 1.0).max()
            if clamp and over <= cfg.clamp_tol:
                y_new = np.clip(y_new, 0.0, 1.0)
            elif stop.on_exit:
                overshoot = (t + sgn * taken, y_new.copy())
                edge, s = _first_exit(lambda s: rk(y, sgn * taken * s, side)[0], y_new)
                y_new = rk(y, sgn * taken * s, side)[0]
                t += sgn * taken * s
                ts.append(t)
                xs.append(y_new)
                terminal = ExitedDomain(edge, PhasePoint(float(y_new[0]), float(y_new[1])))
                break
        t += sgn * taken
        y = y_new
        ts.append(t)
        xs.append(y.copy())
        hit = near_attractor(y)
        if hit is not None:
            terminal = ConvergedToAttractor(hit, stop.attractors[hit])
            break
        h = min(cfg.max_step, h * float(step_factor(np.array(en))))
    return Trajectory(np.array(ts), np.array(xs), terminal, overshoot, stepper)


def _first_exit(path: Callable[[float], np.ndarray], y_end: np.ndarray) -> tuple[Edge, float]:
    """Earliest edge crossed along ``path(s)``, s in [0, 1], and its fraction."""
    best = None
    for edge in Edge:
        if edge.margin(y_end) >= 0:
            continue
        s = _bisect_fraction(
            lambda s: float(edge.margin(path(s))), 0.0, 1.0,
            lambda lo, hi, gm: abs(gm) <= CROSSING_TOL or hi - lo <= 1e-16,
        )
        if best is None or s < best[1]:
            best = (edge, s)
    return best


def refine_boundary_crossing(traj: Trajectory, edge: Edge) -> PhasePoint:
    """Locate where ``traj`` crosses ``edge``, to 1e-10 in the pinned coordinate.

    The first pair of consecutive samples (inside, then outside) brackets the
    crossing. Trajectories produced by :func:`integrate` are re-stepped with
    the integrator over the bracketing step; otherwise the step is linearly
    interpolated. Raises NoCrossing if no bracket exists.
    """
    ts = list(traj.t)
    xs = [np.asarray(p, dtype=float) for p in traj.x]
    if traj.overshoot is not None:
        ts.append(traj.overshoot[0])
        xs.append(np.asarray(traj.overshoot[1], dtype=float))
    for i in range(len(xs) - 1):
        if edge.margin(xs[i]) >= 0 and edge.margin(xs[i + 1]) < 0:
            y0, y1 = xs[i], xs[i + 1]
            dt = ts[i + 1] - ts[i]
            if traj._stepper is not None:
                path = lambda s: traj._stepper(y0, dt * s)  # noqa: E731
            else:
                path = lambda s: y0 + s * (y1 - y0)  # noqa: E731
            s = _bisect_fraction(
                lambda s: float(edge.margin(path(s))), 0.0, 1.0,
                lambda lo, hi, gm: abs(gm) <= CROSSING_TOL or hi - lo <= 1e-16,
            )
            z = path(s)
            return PhasePoint(float(z[0]), float(z[1]))
    raise NoCrossing(f"trajectory never crosses {edge.value}")


# -- batched convergence --------------------------------------------------------

CHUNK = 16384


@dataclass
class BatchResult:
    """Per-row outcome of :func:`converge_batch`.

    ``index`` is the attractor reached, or -1 if unresolved (t_max hit,
    step underflow or non-finite state). ``lo``/``hi`` are coordinate-wise
    extremes over all accepted states; ``max_offdiag`` is the largest
    |x_a - x_b| seen.
    """

    index: np.ndarray
    final: np.ndarray
    t: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    max_offdiag: np.ndarray


def _converge_chunk(f, y0, attractors, delta, cfg, clamp, globalized):
    n = len(y0)
    y = y0.copy()
    side = side_of(y) if globalized else np.zeros(n, dtype=int)
    t = np.zeros(n)
    h = np.full(n, min(cfg.max_step, 0.01))
    index = np.full(n, -1)
    lo, hi = y.copy(), y.copy()
    offd = np.abs(y[:, 0] - y[:, 1])

    def check(rows):
        if not len(attractors):
            return np.zeros(len(rows), dtype=bool)
        d = np.hypot(y[rows, 0, None] - attractors[None, :, 0],
                     y[rows, 1, None] - attractors[None, :, 1])
        j = np.argmin(d, axis=1)
        close = d[np.arange(len(rows)), j] < delta
        index[rows[close]] = j[close]
        return close

    active = np.arange(n)
    active = active[~check(active)]
    while active.size:
        ya, ha = y[active], h[active]
        y_new, err = dopri_step(f, ya, ha, side[active])
        en = error_norm(err, ya, y_new, cfg)
        finite = np.all(np.isfinite(y_new), axis=1) & np.isfinite(en)
        ok = finite & (en <= 1.0)
        if clamp:
            over = np.maximum(-y_new, y_new - 1.0).max(axis=1)
            snap = ok & (over > 0) & (over <= cfg.clamp_tol)
            y_new[snap] = np.clip(y_new[snap], 0.0, 1.0)
        rows = active[ok]
        y[rows] = y_new[ok]
        t[rows] += ha[ok]
        lo[rows] = np.minimum(lo[rows], y_new[ok])
        hi[rows] = np.maximum(hi[rows], y_new[ok])
        offd[rows] = np.maximum(offd[rows], np.abs(y_new[ok, 0] - y_new[ok, 1]))
        fac = step_factor(np.where(finite, en, np.inf))
        h[active] = np.minimum(cfg.max_step, ha * fac)
        h[active] = np.minimum(h[active], np.maximum(cfg.t_max - t[active], 0.0))
        converged = np.zeros(active.size, dtype=bool)
        converged[ok] = check(rows)
        dead = (h[active] < MIN_STEP) | (t[active] >= cfg.t_max) | ~finite
        active = active[~(converged | dead)]
    return index, y, t, lo, hi, offd


def converge_batch(
    x0: np.ndarray,
    params: EpidemicParams,
    regime: RegimeLike,
    attractors: Sequence[PhasePoint],
    cfg: IntegratorConfig = IntegratorConfig(),
    delta: float = 1e-4,
    threads: Optional[int] = None,
) -> BatchResult:
    """Integrate every row of ``x0`` forward until it nears an attractor.

    Rows are independent and processed in fixed-size chunks, so the result
    is bitwise identical for any thread count.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1, 2)
    f = batch_rhs(params, regime)
    att = np.array([a.as_array() for a in attractors]).reshape(-1, 2)
    clamp = _clamps(regime, Direction.FORWARD)
    globalized = regime is Regime.GLOBALIZED
    chunks = [x0[i:i + CHUNK] for i in range(0, len(x0), CHUNK)]
    run = lambda c: _converge_chunk(f, c, att, delta, cfg, clamp, globalized)  # noqa: E731
    workers = threads if threads is not None else resolve_threads()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    if not parts:
        empty = np.empty((0, 2))
        return BatchResult(np.empty(0, int), empty, np.empty(0), empty, empty, np.empty(0))
    cols = [np.concatenate(p) for p in zip(*parts)]
    return BatchResult(*cols)
