"""Command-line front end.

Each subcommand builds a list of named artifacts (tables or JSON documents).
With ``--out-dir`` they are written as files; otherwise they are printed to
standard output in order, separated by a blank line. Exit codes: 0 success,
2 invalid arguments, 1 computation failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import basins, linear_approx, separatrix, shocks
from .equilibria import find_equilibria
from .integrator import Direction, IntegratorConfig, StopCondition, integrate
from .model import EpidemicParams, PhasePoint, Regime, field, parse_regime
from .output import csv_text, json_text, records_json, write_text

METRICS = ("eta", "zeta", "dark-ratio", "area", "area-tilde", "ratio-tilde")
REGIME_NAMES = [r.value for r in Regime] + ["global", "linear"]


@dataclass
class Table:
    name: str
    header: Sequence[str]
    rows: list


@dataclass
class Doc:
    name: str
    body: object


@dataclass
class Raw:
    """Pre-rendered CSV text (the basin label matrix has no header)."""

    name: str
    text: str
    body: object


Artifact = Union[Table, Doc, Raw]


def render(art: Artifact, fmt: str) -> tuple[str, str]:
    if isinstance(art, Doc):
        return f"{art.name}.json", json_text(art.body)
    if isinstance(art, Raw):
        if fmt == "json":
            return f"{art.name}.json", json_text(art.body)
        return f"{art.name}.csv", art.text
    if fmt == "json":
        return f"{art.name}.json", records_json(art.header, art.rows)
    return f"{art.name}.csv", csv_text(art.header, art.rows)


# -- argument parsing ---------------------------------------------------------

def unit_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (0.0 < v < 1.0):
        raise argparse.ArgumentTypeError(f"{v} must lie in (0, 1)")
    return v


def positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"{v} must be positive")
    return v


def min_int(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"{v} must be at least {lo}")
        return v
    return parse


def point(text: str) -> PhasePoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected XA,XB, got {text!r}")
    try:
        a, b = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two numbers, got {text!r}")
    if not all(math.isfinite(v) for v in (a, b)):
        raise argparse.ArgumentTypeError(f"non-finite coordinate in {text!r}")
    return PhasePoint(a, b)


def unit_point(text: str) -> PhasePoint:
    p = point(text)
    if not all(0.0 <= v <= 1.0 for v in p):
        raise argparse.ArgumentTypeError(f"{text!r} must lie in [0,1]^2")
    return p


def value_range(text: str) -> list[float]:
    """Inclusive range A:B:STEP, every value inside (0, 1)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected A:B:STEP, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in {text!r}")
    if not (step > 0 and b >= a):
        raise argparse.ArgumentTypeError(f"need STEP > 0 and B >= A in {text!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    values = [round(a + k * step, 12) for k in range(count)]
    if not all(0.0 < v < 1.0 for v in values):
        raise argparse.ArgumentTypeError(f"range {text!r} leaves (0, 1)")
    return values


def regime_arg(text: str) -> Regime:
    try:
        return parse_regime(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown regime {text!r}; choose from {REGIME_NAMES}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help="write artifacts here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=42)

    parser = argparse.ArgumentParser(prog="twin-isle", description="Two-location epidemic dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, nu=True, q=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if nu:
            p.add_argument("--nu", type=unit_float, required=True)
        if q:
            p.add_argument("--q", type=unit_float, required=True)
        return p

    p = add("field", "evaluate the vector field at one state")
    p.add_argument("--regime", type=regime_arg, required=True)
    p.add_argument("--at", type=point, required=True)

    p = add("integrate", "integrate a trajectory")
    p.add_argument("--regime", type=regime_arg, required=True)
    p.add_argument("--x0", type=unit_point, required=True)
    p.add_argument("--t-max", type=positive_float, required=True)
    p.add_argument("--backward", action="store_true")

    p = add("equilibria", "fixed points and their stability")
    p.add_argument("--regime", type=regime_arg, required=True)

    p = add("separatrix", "trace the stable manifold of (q,q)")
    p.add_argument("--offset", type=positive_float, default=1e-6)
    p.add_argument("--linear", action="store_true", help="emit the tangent-line approximation")

    p = add("basins", "classify a grid of initial states")
    p.add_argument("--regime", type=regime_arg, required=True)
    p.add_argument("--resolution", type=min_int(2), required=True)

    p = add("shocks", "shock taxonomy under both regimes")
    est = p.add_mutually_exclusive_group(required=True)
    est.add_argument("--grid", type=min_int(2))
    est.add_argument("--samples", type=min_int(1))

    p = add("sweep", "one metric over a parameter grid", nu=False, q=False)
    p.add_argument("--metric", choices=METRICS, required=True)
    nu = p.add_mutually_exclusive_group(required=True)
    nu.add_argument("--nu", type=unit_float)
    nu.add_argument("--nu-range", type=value_range)
    p.add_argument("--q-range", type=value_range, required=True)
    p.add_argument("--resolution", type=min_int(2), default=201,
                   help="grid size for dark-ratio and area")

    p = add("approx-compare", "numeric vs closed-form basin area", nu=False, q=False)
    p.add_argument("--nu-range", type=value_range, required=True)
    p.add_argument("--q-range", type=value_range, required=True)
    p.add_argument("--resolution", type=min_int(2), required=True)
    return parser


# -- subcommands -----------------------------------------------------------------

def _params(args) -> EpidemicParams:
    return EpidemicParams.identical(args.nu, args.q)


def cmd_field(args) -> list[Artifact]:
    v_a, v_b = field(args.at, _params(args), args.regime)
    return [Raw("field", csv_text(("v_a", "v_b"), [(v_a, v_b)]).split("\n", 1)[1],
                {"v_a": v_a, "v_b": v_b})]


def cmd_integrate(args) -> list[Artifact]:
    cfg = IntegratorConfig(t_max=args.t_max)
    direction = Direction.BACKWARD if args.backward else Direction.FORWARD
    stop = StopCondition(on_exit=args.backward)
    traj = integrate(args.x0, _params(args), args.regime, cfg, direction, stop)
    rows = [(t, a, b) for t, (a, b) in zip(traj.t, traj.x)]
    return [Table("trajectory", ("t", "x_a", "x_b"), rows)]


def cmd_equilibria(args) -> list[Artifact]:
    eqs = find_equilibria(_params(args), args.regime, failures=[])
    return [Doc("equilibria", [e.to_dict() for e in eqs])]


def cmd_separatrix(args) -> list[Artifact]:
    params = _params(args)
    if args.linear:
        line = linear_approx.LinearSeparatrix.from_params(params)
        geo = linear_approx.region_geometry(params)
        pm, pp = geo.p_minus, linear_approx.p_plus(params)
        rows = [(pp.x_a, pp.x_b), (params.q, params.q), (pm.x_a, pm.x_b)]
        info = {
            "case": geo.case.value,
            "slope_sub": line.slope_sub,
            "slope_super": line.slope_super,
            "anchor": [params.q, params.q],
            "p_minus": [pm.x_a, pm.x_b],
            "p_plus": [pp.x_a, pp.x_b],
            "region_area": geo.area,
            "ratio_tilde": geo.ratio,
            "area_tilde": linear_approx.area_report_tilde(params),
        }
        return [Table("separatrix_linear", ("x_a", "x_b"), rows), Doc("separatrix_linear_info", info)]
    sub_trace = separatrix.trace_separatrix(params, offset=args.offset)
    sup_trace = separatrix.trace_separatrix(params, Regime.PIECE_SUPER, offset=args.offset)
    rows = [(a, b) for a, b in sup_trace.polyline[::-1]] + [(params.q, params.q)] + \
           [(a, b) for a, b in sub_trace.polyline]
    info = {
        "exit_type": sub_trace.exit.kind,
        "exit_value": sub_trace.exit.value,
        "exit_sub": [float(v) for v in sub_trace.polyline[-1]],
        "exit_super": [float(v) for v in sup_trace.polyline[-1]],
        "basin_area": 2 * separatrix.recovery_area(sub_trace) + params.q ** 2,
    }
    return [Table("separatrix", ("x_a", "x_b"), rows), Doc("separatrix_exit", info)]


def cmd_basins(args) -> list[Artifact]:
    params = _params(args)
    grid = basins.classify_grid(params, args.regime, args.resolution)
    report = basins.grid_area_report(grid)
    labels = grid.labels.tolist()
    return [Raw("basins", grid.to_csv(), {"labels": labels}), Doc("basins_report", report.__dict__)]


def cmd_shocks(args) -> list[Artifact]:
    est = shocks.Grid(args.grid) if args.grid else shocks.MonteCarlo(args.samples, args.seed)
    table = shocks.shock_table(_params(args), est)
    rows = [(a, b, basins.Label(int(x)).title, basins.Label(int(y)).title, c.value)
            for (a, b), x, y, c in zip(table.points, table.autarky, table.globalized, table.categories)]
    summary = {c.value: m for c, m in table.measures().items()}
    return [Table("shocks", ("s_a", "s_b", "autarky", "globalized", "category"), rows),
            Doc("shocks_summary", summary)]


def _metric(metric: str, nu: float, q: float, resolution: int) -> float:
    params = EpidemicParams.identical(nu, q)
    if metric in ("eta", "zeta"):
        ex = separatrix.trace_separatrix(params).exit
        return ex.value if ex.kind == metric else float("nan")
    if metric == "dark-ratio":
        return basins.gray_area_ratio(params, resolution).dark_ratio
    if metric == "area":
        return basins.gray_area_ratio(params, resolution).area_to_origin
    if metric == "area-tilde":
        return linear_approx.area_report_tilde(params)
    return linear_approx.ratio_tilde(params)


def cmd_sweep(args) -> list[Artifact]:
    nus = [args.nu] if args.nu is not None else args.nu_range
    rows = [(q, nu, _metric(args.metric, nu, q, args.resolution)) for q in args.q_range for nu in nus]
    return [Table("sweep", ("q", "nu", "value"), rows)]


def cmd_approx_compare(args) -> list[Artifact]:
    rows = []
    for q in args.q_range:
        for nu in args.nu_range:
            params = EpidemicParams.identical(nu, q)
            numeric = basins.gray_area_ratio(params, args.resolution).area_to_origin
            tilde = linear_approx.area_report_tilde(params)
            rows.append((q, nu, numeric, tilde, abs(numeric - tilde)))
    return [Table("approx_compare", ("q", "nu", "area_numeric", "area_tilde", "abs_diff"), rows)]


COMMANDS = {
    "field": cmd_field,
    "integrate": cmd_integrate,
    "equilibria": cmd_equilibria,
    "separatrix": cmd_separatrix,
    "basins": cmd_basins,
    "shocks": cmd_shocks,
    "sweep": cmd_sweep,
    "approx-compare": cmd_approx_compare,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        artifacts = COMMANDS[args.command](args)
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"twin-isle {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    rendered = [render(a, args.format) for a in artifacts]
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for name, text in rendered:
            write_text(os.path.join(args.out_dir, name), text)
    else:
        sys.stdout.write("\n".join(text for _, text in rendered))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
