#!/usr/bin/env python3
"""Plot ROC curves from a roc.csv produced by `loojam roc` or `loojam sweep`.

The CSV is the contract; this plot is a convenience view of it.

Usage:
    python3 scripts/plot_roc.py out/roc.csv [-o roc.png]
"""

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("roc_csv", help="path to roc.csv")
    parser.add_argument("-o", "--output", default="roc.png",
                        help="output image path (default: roc.png)")
    args = parser.parse_args()

    curves = defaultdict(list)  # (n, snr_db, jsr_db) -> [(p_f, p_d)]
    with open(args.roc_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            p_f, p_d = row["p_f"], row["p_d"]
            if p_f == "nan" or p_d == "nan":
                continue
            key = (int(row["n"]), float(row["snr_db"]), float(row["jsr_db"]))
            curves[key].append((float(p_f), float(p_d)))

    if not curves:
        print(f"no plottable rows in {args.roc_csv}", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(6, 6))
    for (n, snr_db, jsr_db), pts in sorted(curves.items()):
        pts = sorted(set(pts))
        xs = [0.0] + [p for p, _ in pts] + [1.0]
        ys = [0.0] + [d for _, d in pts] + [1.0]
        ax.plot(xs, ys, marker="o", markersize=3,
                label=f"N={n}, SNR {snr_db:g} dB, JSR {jsr_db:g} dB")
    ax.plot([0, 1], [0, 1], linestyle=":", color="gray", label="chance")
    ax.set_xlabel("false-alarm probability")
    ax.set_ylabel("detection probability")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("Loss-of-orthogonality detector ROC")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
