#!/usr/bin/env python3
"""Plot columns of a szilard CSV against one another.

    szilard sweep --config configs/balance_work_vs_t.conf | scripts/plot_csv.py t W_balance_kT --logx
    scripts/plot_csv.py x F_m F_avg -i forces.csv -o forces.png

Rows are grouped by the `t` column when --by t is given (useful for 2-D sweeps).
"""
import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("x")
    ap.add_argument("y", nargs="+")
    ap.add_argument("-i", "--input", default="-")
    ap.add_argument("-o", "--output", default="plot.png")
    ap.add_argument("--by", help="column whose values split the rows into curves")
    ap.add_argument("--logx", action="store_true")
    args = ap.parse_args()

    src = sys.stdin if args.input == "-" else open(args.input, newline="")
    rows = [r for r in csv.DictReader(line for line in src if not line.startswith("#"))]
    groups = defaultdict(list)
    for r in rows:
        if r.get("error"):
            continue
        groups[r[args.by] if args.by else ""].append(r)

    fig, ax = plt.subplots()
    for key, rs in groups.items():
        xs = [float(r[args.x]) for r in rs]
        for col in args.y:
            label = f"{col} {args.by}={float(key):.3g}" if args.by else col
            ax.plot(xs, [float(r[col]) if r[col] else float("nan") for r in rs], label=label)
    ax.axhline(0.0, color="grey", lw=0.5)
    if args.logx:
        ax.set_xscale("log")
    ax.set_xlabel(args.x)
    ax.legend(fontsize="small")
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
