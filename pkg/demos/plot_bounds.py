"""Render a ``--plot-data`` CSV from ``costcap bounds`` as a rate-vs-n figure.

    costcap bounds --channel bsc:0.11 --beta 0.25 --n 50:1000:50 \\
        --plot-data rates.csv -q > /dev/null
    python3 demos/plot_bounds.py rates.csv rates.png

Needs matplotlib (``pip install costcap[plot]``).
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("data")
    ap.add_argument("figure")
    ap.add_argument("--capacity", type=float, help="draw a horizontal line at this rate")
    args = ap.parse_args()

    with open(args.data, newline="") as f:
        rows = list(csv.DictReader(f))
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, style in (("converse", "-"), ("achievability", "--"), ("normal", ":")):
        ax.plot([int(r[f"{name}_n"]) for r in rows], [float(r[f"{name}_rate"]) for r in rows],
                style, label=name)
    if args.capacity is not None:
        ax.axhline(args.capacity, color="gray", lw=0.8)
    ax.set_xlabel("blocklength n")
    ax.set_ylabel("rate")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.figure, dpi=120)


if __name__ == "__main__":
    main()
