"""Exit points of the sub-diagonal separatrix over q, and the eta/zeta switch."""

import argparse

import numpy as np

from twin_isle.output import write_text
from twin_isle.separatrix import eta_zeta_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nu", type=float, default=0.7)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--out", default="eta_zeta.csv")
    args = ap.parse_args()

    qs = np.round(np.arange(args.step, 1.0, args.step), 10)
    res = eta_zeta_sweep(args.nu, qs)
    write_text(args.out, res.to_csv())
    failed = [p.q for p in res.points if p.exit is None]
    print(f"nu={args.nu}: switch at q* = {res.threshold}  ({len(qs)} traces, {len(failed)} failed)")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
