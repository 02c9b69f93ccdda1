"""Epidemic dynamics of two locations, isolated or linked by trade."""

from .model import EpidemicParams, PhasePoint, PriceCostSpec, Regime, GeneralTwoLocation, field
from .integrator import IntegratorConfig, Direction, StopCondition, integrate, converge_batch
from .equilibria import EquilibriumInfo, StabilityClass, find_equilibria
from .separatrix import Eta, Zeta, trace_separatrix, eta_zeta_sweep
from .basins import Label, classify_point, classify_grid, autarky_oracle, gray_area_ratio
from .linear_approx import Case, case_condition, p_minus, region_area, ratio_tilde, area_report_tilde
from .shocks import Category, Grid, MonteCarlo, classify_shock, category_measures

__all__ = [
    "EpidemicParams", "PhasePoint", "PriceCostSpec", "Regime", "GeneralTwoLocation", "field",
    "IntegratorConfig", "Direction", "StopCondition", "integrate", "converge_batch",
    "EquilibriumInfo", "StabilityClass", "find_equilibria",
    "Eta", "Zeta", "trace_separatrix", "eta_zeta_sweep",
    "Label", "classify_point", "classify_grid", "autarky_oracle", "gray_area_ratio",
    "Case", "case_condition", "p_minus", "region_area", "ratio_tilde", "area_report_tilde",
    "Category", "Grid", "MonteCarlo", "classify_shock", "category_measures",
]
