"""Which stable state each initial condition converges to.

Grids sample cell centers ((i+0.5)/n, (j+0.5)/n) and store the label of
center (x_a_i, x_b_j) at ``labels[j, i]``, so row 0 is the smallest x_b.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .equilibria import attractors as find_attractors
from .integrator import IntegratorConfig, converge_batch
from .model import EpidemicParams, PhasePoint, Regime, RegimeLike
from .output import csv_text, json_text

ATTRACTOR_TOL = 1e-6


class Label(enum.IntEnum):
    TO_ORIGIN = 0
    TO_ONE = 1
    TO_ZERO_ONE = 2
    TO_ONE_ZERO = 3
    UNRESOLVED = 9

    @property
    def title(self) -> str:
        return {0: "ToOrigin", 1: "ToOne", 2: "ToZeroOne", 3: "ToOneZero", 9: "Unresolved"}[self.value]

    def swapped(self) -> "Label":
        return _SWAP.get(self, self)


_SWAP = {Label.TO_ZERO_ONE: Label.TO_ONE_ZERO, Label.TO_ONE_ZERO: Label.TO_ZERO_ONE}
_CORNERS = {(0, 0): Label.TO_ORIGIN, (1, 1): Label.TO_ONE,
            (0, 1): Label.TO_ZERO_ONE, (1, 0): Label.TO_ONE_ZERO}
PARTIAL = (Label.TO_ZERO_ONE, Label.TO_ONE_ZERO)


class OnBoundary(ValueError):
    """Point too close to a line x = q for the rectangle oracle."""


def swap_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel after exchanging the two locations (2 <-> 3)."""
    out = labels.copy()
    out[labels == Label.TO_ZERO_ONE] = Label.TO_ONE_ZERO
    out[labels == Label.TO_ONE_ZERO] = Label.TO_ZERO_ONE
    return out


def label_of_attractor(p: PhasePoint) -> Label:
    for (a, b), lab in _CORNERS.items():
        if abs(p.x_a - a) <= ATTRACTOR_TOL and abs(p.x_b - b) <= ATTRACTOR_TOL:
            return lab
    raise ValueError(f"stable state {p} is not a corner of the square")


@functools.lru_cache(maxsize=64)
def _attractor_table(params: EpidemicParams, regime: RegimeLike):
    pts = find_attractors(params, regime)
    return tuple(pts), np.array([label_of_attractor(p) for p in pts] + [Label.UNRESOLVED])


def classify_points(points, params: EpidemicParams, regime: RegimeLike,
                    cfg: IntegratorConfig = IntegratorConfig(), delta: float = 1e-4,
                    threads: Optional[int] = None) -> np.ndarray:
    """Labels (int array) for every row of an (N, 2) array of initial states."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("initial states must lie in [0,1]^2")
    att, table = _attractor_table(params, regime)
    res = converge_batch(pts, params, regime, att, cfg, delta=delta, threads=threads)
    return table[res.index]  # index -1 picks the trailing Unresolved entry


def classify_point(x0: PhasePoint, params: EpidemicParams, regime: RegimeLike,
                   cfg: IntegratorConfig = IntegratorConfig()) -> Label:
    return Label(int(classify_points([tuple(x0)], params, regime, cfg, threads=1)[0]))


def cell_centers(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def grid_points(n: int) -> np.ndarray:
    c = cell_centers(n)
    xa, xb = np.meshgrid(c, c)  # xa varies along columns, xb along rows
    return np.column_stack([xa.ravel(), xb.ravel()])


@dataclass
class BasinGrid:
    resolution: int
    params: EpidemicParams
    regime: RegimeLike
    labels: np.ndarray

    def fraction(self, label: Label) -> float:
        return float(np.mean(self.labels == label))

    def transpose_symmetric(self) -> bool:
        return bool(np.array_equal(self.labels.T, swap_labels(self.labels)))

    def to_csv(self) -> str:
        return "".join(",".join(str(int(v)) for v in row) + "\n" for row in self.labels)


def classify_grid(params: EpidemicParams, regime: RegimeLike, n: int,
                  cfg: IntegratorConfig = IntegratorConfig(),
                  threads: Optional[int] = None) -> BasinGrid:
    if n < 2:
        raise ValueError("grid resolution must be at least 2")
    labels = classify_points(grid_points(n), params, regime, cfg, threads=threads)
    return BasinGrid(n, params, regime, labels.reshape(n, n))


def autarky_oracle(x0: PhasePoint, q: float, margin: float = 0.0) -> Label:
    a, b = x0
    if abs(a - q) <= margin or abs(b - q) <= margin:
        raise OnBoundary(f"{x0} within {margin} of x = {q}")
    return _CORNERS[(int(a > q), int(b > q))]


def autarky_oracle_grid(n: int, q: float) -> np.ndarray:
    """Rectangle labels on the n x n cell centers (no margin check)."""
    c = cell_centers(n) > q
    codes = np.array([[Label.TO_ORIGIN, Label.TO_ZERO_ONE], [Label.TO_ONE_ZERO, Label.TO_ONE]])
    return codes[c[None, :].astype(int), c[:, None].astype(int)]


@dataclass(frozen=True)
class AreaReport:
    area_to_origin: float
    area_to_one: float
    dark_ratio: float
    unresolved_fraction: float

    def to_json(self) -> str:
        return json_text(self.__dict__)


def off_diagonal_rectangles(points: np.ndarray, q: float) -> np.ndarray:
    """Mask of states in [q,1]x[0,q] or [0,q]x[q,1], strict at x = q."""
    a, b = points[:, 0], points[:, 1]
    return ((a > q) & (b < q)) | ((a < q) & (b > q))


def area_report(points: np.ndarray, labels: np.ndarray, q: Optional[float]) -> AreaReport:
    labels = np.ravel(labels)
    dark = float("nan")
    if q is not None:
        mask = off_diagonal_rectangles(points, q)
        if mask.any():
            dark = float(np.mean(labels[mask] == Label.TO_ONE))
    return AreaReport(float(np.mean(labels == Label.TO_ORIGIN)), float(np.mean(labels == Label.TO_ONE)),
                      dark, float(np.mean(labels == Label.UNRESOLVED)))


def grid_area_report(grid: BasinGrid) -> AreaReport:
    q = grid.params.q if grid.params.symmetric() else None
    return area_report(grid_points(grid.resolution), grid.labels, q)


def gray_area_ratio(params: EpidemicParams, n: int, cfg: IntegratorConfig = IntegratorConfig(),
                    threads: Optional[int] = None) -> AreaReport:
    """Area report of the globalized grid; ``dark_ratio`` is the share of the
    two off-diagonal rectangles whose shocks end fully infected."""
    if not params.symmetric():
        raise ValueError("gray_area_ratio needs symmetric parameters")
    return grid_area_report(classify_grid(params, Regime.GLOBALIZED, n, cfg, threads))


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def uniform_sampler(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.random((k, 2))


def monte_carlo_points(samples: int, seed: int = 42, sampler: Sampler = uniform_sampler) -> np.ndarray:
    if samples < 1:
        raise ValueError("need at least one sample")
    return np.asarray(sampler(np.random.default_rng(seed), samples), dtype=float).reshape(-1, 2)


def monte_carlo_areas(params: EpidemicParams, regime: RegimeLike, samples: int, seed: int = 42,
                      cfg: IntegratorConfig = IntegratorConfig(), sampler: Sampler = uniform_sampler,
                      threads: Optional[int] = None) -> AreaReport:
    pts = monte_carlo_points(samples, seed, sampler)
    labels = classify_points(pts, params, regime, cfg, threads=threads)
    return area_report(pts, labels, params.q if params.symmetric() else None)


def points_csv(points: np.ndarray, labels: np.ndarray) -> str:
    return csv_text(("x_a", "x_b", "label"), ((a, b, int(l)) for (a, b), l in zip(points, labels)))
