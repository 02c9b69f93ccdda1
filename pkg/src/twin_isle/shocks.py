"""Compare where a shock ends up with and without trade between locations."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .basins import (
    PARTIAL,
    Label,
    Sampler,
    classify_points,
    grid_points,
    monte_carlo_points,
    uniform_sampler,
)
from .integrator import IntegratorConfig
from .model import EpidemicParams, PhasePoint, Regime
from .output import csv_text, json_text

ORACLE_MARGIN = 1e-6


class Category(enum.Enum):
    BOTH_RECOVER = "BothRecover"
    BOTH_INFECTED = "BothInfected"
    GLOB_ADVANTAGE = "GlobAdvantage"
    GLOB_DISADVANTAGE = "GlobDisadvantage"
    INDETERMINATE = "Indeterminate"


def categorize(autarky: Label, globalized: Label) -> Category:
    if autarky is Label.UNRESOLVED or globalized is Label.UNRESOLVED:
        return Category.INDETERMINATE
    if autarky is Label.TO_ORIGIN and globalized is Label.TO_ORIGIN:
        return Category.BOTH_RECOVER
    if autarky is Label.TO_ONE and globalized is Label.TO_ONE:
        return Category.BOTH_INFECTED
    if autarky in PARTIAL and globalized is Label.TO_ORIGIN:
        return Category.GLOB_ADVANTAGE
    if autarky in PARTIAL and globalized is Label.TO_ONE:
        return Category.GLOB_DISADVANTAGE
    # any other pairing falls outside the four-way taxonomy
    return Category.INDETERMINATE


@dataclass(frozen=True)
class ShockOutcome:
    shock: PhasePoint
    autarky_label: Label
    globalized_label: Label
    category: Category


def autarky_labels(points: np.ndarray, params: EpidemicParams, cfg: IntegratorConfig,
                   margin: float = ORACLE_MARGIN, threads: Optional[int] = None) -> np.ndarray:
    """Rectangle oracle per location, integrating only points near x = q."""
    a, b = points[:, 0], points[:, 1]
    labels = np.full(len(points), int(Label.UNRESOLVED))
    near = (np.abs(a - params.q_a) <= margin) | (np.abs(b - params.q_b) <= margin)
    hi_a, hi_b = (a > params.q_a), (b > params.q_b)
    codes = np.array([[Label.TO_ORIGIN, Label.TO_ZERO_ONE], [Label.TO_ONE_ZERO, Label.TO_ONE]])
    labels[~near] = codes[hi_a[~near].astype(int), hi_b[~near].astype(int)]
    if near.any():
        labels[near] = classify_points(points[near], params, Regime.AUTARKY, cfg, threads=threads)
    return labels


def classify_shocks(points, params: EpidemicParams, cfg: IntegratorConfig = IntegratorConfig(),
                    threads: Optional[int] = None) -> tuple[np.ndarray, np.ndarray, list[Category]]:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    aut = autarky_labels(pts, params, cfg, threads=threads)
    glob = classify_points(pts, params, Regime.GLOBALIZED, cfg, threads=threads)
    cats = [categorize(Label(int(x)), Label(int(y))) for x, y in zip(aut, glob)]
    return aut, glob, cats


def classify_shock(s: PhasePoint, params: EpidemicParams,
                   cfg: IntegratorConfig = IntegratorConfig()) -> ShockOutcome:
    aut, glob, cats = classify_shocks([tuple(s)], params, cfg, threads=1)
    return ShockOutcome(s, Label(int(aut[0])), Label(int(glob[0])), cats[0])


@dataclass(frozen=True)
class Grid:
    n: int


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int = 42
    sampler: Sampler = uniform_sampler


Estimator = Union[Grid, MonteCarlo]


def estimator_points(estimator: Estimator) -> np.ndarray:
    if isinstance(estimator, Grid):
        if estimator.n < 2:
            raise ValueError("grid resolution must be at least 2")
        return grid_points(estimator.n)
    return monte_carlo_points(estimator.samples, estimator.seed, estimator.sampler)


@dataclass
class ShockTable:
    points: np.ndarray
    autarky: np.ndarray
    globalized: np.ndarray
    categories: list[Category]

    def measures(self) -> dict[Category, float]:
        n = len(self.categories)
        counts = {c: 0 for c in Category}
        for c in self.categories:
            counts[c] += 1
        return {c: counts[c] / n for c in Category}

    def to_csv(self) -> str:
        rows = ((a, b, Label(int(x)).title, Label(int(y)).title, c.value)
                for (a, b), x, y, c in zip(self.points, self.autarky, self.globalized, self.categories))
        return csv_text(("s_a", "s_b", "autarky", "globalized", "category"), rows)

    def summary_json(self) -> str:
        return json_text({c.value: m for c, m in self.measures().items()})


def shock_table(params: EpidemicParams, estimator: Estimator,
                cfg: IntegratorConfig = IntegratorConfig(), threads: Optional[int] = None) -> ShockTable:
    pts = estimator_points(estimator)
    aut, glob, cats = classify_shocks(pts, params, cfg, threads)
    return ShockTable(pts, aut, glob, cats)


def category_measures(params: EpidemicParams, estimator: Estimator,
                      cfg: IntegratorConfig = IntegratorConfig(),
                      threads: Optional[int] = None) -> dict[Category, float]:
    """Share of shocks in each category (areas, for uniform shocks)."""
    return shock_table(params, estimator, cfg, threads).measures()


def disadvantage_share(measures: dict[Category, float]) -> float:
    bad = measures[Category.GLOB_DISADVANTAGE]
    good = measures[Category.GLOB_ADVANTAGE]
    return bad / (bad + good) if bad + good > 0 else float("nan")
