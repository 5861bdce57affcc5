"""Plot a sweep CSV: gap ratio against alpha_star, one curve per depth.

    treebound sweep --depth 2 3 4 --alpha-star-grid 0.001,0.999,0.001 --out s.csv
    python scripts/plot_sweep.py s.csv ratio.png

Needs matplotlib (``pip install .[plot]``).  Rows with beta_star != 0 are
ignored.  Not covered by the test suite.
"""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main(src, dst):
    curves = defaultdict(list)
    with open(src, newline="") as fh:
        for row in csv.DictReader(fh):
            if float(row["beta_star"]) == 0.0:
                curves[int(row["T"])].append((float(row["alpha_star"]),
                                              float(row["gap_ratio"])))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for T, pts in sorted(curves.items()):
        x, y = zip(*pts)
        ax.plot(x, y, label=f"T = {T}")
    ax.set_xlabel("alpha_star")
    ax.set_ylabel("gap ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:3])
