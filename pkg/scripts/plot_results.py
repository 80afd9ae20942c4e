"""Figures from the CSV reports written by ``nikishin compare`` and ``nikishin zeros``.

usage: python3 scripts/plot_results.py results/default [results/flat ...]

Needs matplotlib (``pip install -e .[plots]``).  Writes errors.png and zeros.png
next to the CSV files.
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_errors(folder: Path):
    series = defaultdict(list)
    with open(folder / "compare.csv") as fh:
        for row in csv.DictReader(fh):
            key = (row["region"].split(":")[0], row["re_z"], row["im_z"])
            series[key].append((int(row["index_n"]) + int(row["index_m"]), float(row["rel_err"])))
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
    for ax, quantity in zip(axes, ("B", "form", "P")):
        for (q, re, im), pts in sorted(series.items()):
            if q != quantity:
                continue
            pts.sort()
            ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"z = {float(re):g}{float(im):+g}i")
        ax.set_title(quantity)
        ax.set_xlabel("n + m")
    axes[0].set_ylabel("relative error")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(folder / "errors.png", dpi=120)
    plt.close(fig)


def plot_zeros(folder: Path):
    data = defaultdict(list)
    with open(folder / "zeros.csv") as fh:
        for row in csv.DictReader(fh):
            data[(row["polynomial"], int(row["index_n"]), int(row["index_m"]))].append(
                (float(row["zero"]), float(row["counting_cdf"]), float(row["equilibrium_cdf"])))
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.6))
    for ax, poly in zip(axes, ("P", "B")):
        for (p, n, m), rows in sorted(data.items()):
            if p != poly:
                continue
            rows.sort()
            ax.step([r[0] for r in rows], [r[1] for r in rows], where="post", label=f"({n},{m})")
        last = max((k for k in data if k[0] == poly), key=lambda k: k[1] + k[2], default=None)
        if last:
            rows = sorted(data[last])
            ax.plot([r[0] for r in rows], [r[2] for r in rows], "k--", label="equilibrium")
        ax.set_title(f"zeros of {poly}")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(folder / "zeros.png", dpi=120)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("folders", nargs="+", type=Path)
    for folder in parser.parse_args().folders:
        if (folder / "compare.csv").exists():
            plot_errors(folder)
        if (folder / "zeros.csv").exists():
            plot_zeros(folder)
        print(f"wrote figures in {folder}")


if __name__ == "__main__":
    main()
