"""Category measures of uniform shocks as q varies (fixed nu)."""

import argparse

import numpy as np

from twin_isle.model import EpidemicParams
from twin_isle.output import csv_text, write_text
from twin_isle.shocks import Category, Grid, MonteCarlo, category_measures, disadvantage_share


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nu", type=float, default=0.7)
    ap.add_argument("--q", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    ap.add_argument("--grid", type=int, default=101)
    ap.add_argument("--samples", type=int, default=0, help="use Monte Carlo instead of a grid")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", default="shock_taxonomy.csv")
    args = ap.parse_args()

    est = MonteCarlo(args.samples, args.seed) if args.samples else Grid(args.grid)
    rows = []
    for q in args.q:
        m = category_measures(EpidemicParams.identical(args.nu, q), est)
        share = disadvantage_share(m)
        rows.append((q, args.nu, *(m[c] for c in Category), share))
        print(f"q={q:.2f} " + " ".join(f"{c.value}={m[c]:.4f}" for c in Category)
              + f" dark/(dark+light)={share:.4f}")
    header = ("q", "nu", *(c.value for c in Category), "disadvantage_share")
    write_text(args.out, csv_text(header, rows))


if __name__ == "__main__":
    main()
