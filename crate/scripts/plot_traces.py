#!/usr/bin/env python3
"""Plot objective gap against effective passes for every trace in a run directory.

    python3 scripts/plot_traces.py out/ridge_lr_sweep -o ridge.png
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_trace(path, x_key):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    has_gap = any(r["gap"] for r in rows)
    xs = [float(r[x_key]) for r in rows]
    ys = [float(r["gap"]) if r["gap"] else float(r["objective"]) for r in rows]
    return xs, ys, has_gap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("run_dir", type=Path)
    ap.add_argument("-o", "--output", type=Path, default=Path("traces.png"))
    ap.add_argument("--x", choices=["passes", "seconds"], default="passes")
    args = ap.parse_args()

    groups = defaultdict(list)
    for path in sorted(args.run_dir.glob("*_seed*.csv")):
        groups[path.stem.rsplit("_seed", 1)[0]].append(path)
    if not groups:
        raise SystemExit(f"no traces in {args.run_dir}")

    x_key = "effective_passes" if args.x == "passes" else "wall_seconds"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    has_gap = False
    for label, paths in groups.items():
        color = None
        for path in paths:
            xs, ys, gap = read_trace(path, x_key)
            has_gap |= gap
            # gaps at the rounding floor cannot go on a log axis
            pts = [(x, y) for x, y in zip(xs, ys) if y > 0]
            if not pts:
                continue
            (line,) = ax.plot(*zip(*pts), color=color, alpha=0.9 if color is None else 0.35,
                              label=label if color is None else None)
            color = line.get_color()
    ax.set_yscale("log")
    ax.set_xlabel("effective passes" if args.x == "passes" else "seconds")
    ax.set_ylabel("objective gap" if has_gap else "objective")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
