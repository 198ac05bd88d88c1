#!/usr/bin/env python3
"""Count lasso resonances as the loop flux winds through a full period.

The loop-with-two-leads graph loses all of its resonances at one special
flux; this script sweeps the flux, prints the census in a fixed disk, and
reports the flux the library predicts should empty the disk.
"""

import argparse

import numpy as np

from qgres import (
    Edge,
    MetricGraph,
    SecularFunction,
    Vertex,
    assemble_global,
    count_in_disk,
    gauge_transform,
    resonance_killing_flux,
)


def lasso(flux: float, length: float) -> MetricGraph:
    return MetricGraph(
        vertices=(Vertex("c"),),
        edges=(Edge("c", "c", length, flux),),
        leads=("c", "c"),
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=float, default=40.0)
    ap.add_argument("--steps", type=int, default=17)
    ap.add_argument("--length", type=float, default=1.0)
    args = ap.parse_args()

    base = lasso(0.0, args.length)
    predicted = resonance_killing_flux(
        gauge_transform(assemble_global(base), base)
    )
    print(f"# lasso, length {args.length}, disk radius {args.radius}")
    print("phi/pi,count")
    for phi in np.linspace(0.0, np.pi, args.steps):
        sf = SecularFunction.from_graph(lasso(float(phi), args.length))
        n = count_in_disk(sf, args.radius)
        marker = "  <- predicted kill" if (
            isinstance(predicted, float) and abs(phi - predicted) < 1e-9
        ) else ""
        print(f"{phi / np.pi:.4f},{n}{marker}")
    if isinstance(predicted, float):
        print(f"# killing flux: {predicted:.9f} rad ({predicted / np.pi:.4f} pi)")
    else:
        print(f"# no killing flux: {predicted.reason}")


if __name__ == "__main__":
    main()
