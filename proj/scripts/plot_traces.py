#!/usr/bin/env python3
"""Plot convergence traces produced by the qnlab CLI.

Reads one or more trace CSVs (or every *.csv in a directory), draws the
weighted distance ratio per iteration on a log axis, and overlays the
(1/sqrt(k))^k envelope column where the trace carries one. This is an
example consumer of the CSV schema, not part of the toolchain; the only
non-stdlib dependency is matplotlib.

Usage:
    qnlab figure fig1 --out traces/
    python3 scripts/plot_traces.py traces/ --out fig1.png
"""

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_trace(path):
    """Returns (label, rows) where rows maps column name -> list of floats.

    Comment lines starting with '#' echo the run configuration; the method
    name found there labels the curve. Empty cells (columns that do not
    apply at that iteration, e.g. tau on the final row) are skipped.
    """
    label = path.stem
    hdr = []
    with open(path, newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                hdr.append(line[1:].strip())
                continue
            data_lines.append(line)
        for entry in hdr:
            if entry.startswith("method "):
                label = entry.split(None, 1)[1]
        reader = csv.DictReader(data_lines)
        rows = {name: [] for name in reader.fieldnames}
        for rec in reader:
            for name, cell in rec.items():
                rows[name].append(float(cell) if cell not in ("", None) else None)
    return label, rows


def series(rows, x_name, y_name):
    xs, ys = [], []
    for x, y in zip(rows[x_name], rows.get(y_name, [])):
        if x is None or y is None or y <= 0.0:
            continue
        xs.append(x)
        ys.append(y)
    return xs, ys


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+", type=Path,
                    help="trace CSV files or directories containing them")
    ap.add_argument("--out", type=Path, default=Path("traces.png"),
                    help="output image path (default traces.png)")
    ap.add_argument("--column", default="ratio",
                    help="trace column to plot (default ratio)")
    args = ap.parse_args()

    paths = []
    for item in args.inputs:
        if item.is_dir():
            paths.extend(sorted(item.glob("*.csv")))
        else:
            paths.append(item)
    if not paths:
        sys.exit("no trace CSVs found")

    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    envelope_drawn = False
    for path in paths:
        label, rows = read_trace(path)
        xs, ys = series(rows, "k", args.column)
        if not xs:
            print(f"skipping {path}: no positive '{args.column}' values")
            continue
        ax.semilogy(xs, ys, marker=".", label=label)
        if not envelope_drawn and args.column == "ratio":
            ex, ey = series(rows, "k", "env")
            if ex:
                ax.semilogy(ex, ey, "k--", label="(1/sqrt(k))^k")
                envelope_drawn = True

    ax.set_xlabel("iteration k")
    ax.set_ylabel(args.column)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
