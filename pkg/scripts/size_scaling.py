#!/usr/bin/env python3
"""Measure how much of each graph the resonance count actually sees.

For a family of single-vertex graphs this fits the effective size from the
resonance-counting ladder and prints it next to the metric length, flagging
the graphs whose count grows slower than their size would suggest.
"""

import argparse

import numpy as np

from qgres import Edge, Kirchhoff, MetricGraph, Vertex, report


def flower(n_loops: int, n_leads: int, length: float, flux: float = 0.0) -> MetricGraph:
    return MetricGraph(
        vertices=(Vertex("c", Kirchhoff()),),
        edges=tuple(Edge("c", "c", length, flux) for _ in range(n_loops)),
        leads=("c",) * n_leads,
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rmin", type=float, default=50.0)
    ap.add_argument("--rmax", type=float, default=400.0)
    ap.add_argument("--steps", type=int, default=8)
    args = ap.parse_args()

    cases = [
        ("loop + 1 lead", flower(1, 1, 1.0)),
        ("loop + 2 leads", flower(1, 2, 1.0)),
        ("loop + 2 leads, flux pi/3", flower(1, 2, 1.0, np.pi / 3)),
        ("loop + 2 leads, flux pi/2", flower(1, 2, 1.0, np.pi / 2)),
        ("2 loops + 1 lead", flower(2, 1, 0.8)),
    ]
    print(f"# ladder {args.rmin} -> {args.rmax} in {args.steps} radii")
    header = f"{'graph':28s} {'class':9s} {'V':>6s} {'W':>9s} {'W/V':>7s}"
    print(header)
    for name, g in cases:
        rep = report(g, rmin=args.rmin, rmax=args.rmax, steps=args.steps)
        ratio = rep.fit.size / rep.volume
        line = (
            f"{name:28s} {rep.classification.label:9s} "
            f"{rep.volume:6.2f} {rep.fit.size:9.4f} {ratio:7.3f}"
        )
        if not rep.consistent:
            line += f"  ! {rep.note}"
        print(line)


if __name__ == "__main__":
    main()
