"""Command-line front end: classify, locate, count, and flux-tune graphs.

Exit codes: 0 success, 2 unusable input (file, format, flags), 3 numerical
failure inside a computation, 4 operation not applicable to the graph.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .asymptotics import count_in_disk, report, resonances_in
from .effective import (
    NearPoleError,
    NotApplicable,
    classify_weyl,
    one_edge_zero_size,
    resonance_killing_flux,
)
from .finder import Disk, FinderError, Rect
from .graphs import (
    GraphFormatError,
    load_graph,
    total_internal_length,
    with_flux,
)
from .secular import SecularFunction

_EXIT_OK = 0
_EXIT_INPUT = 2
_EXIT_NUMERICAL = 3
_EXIT_INAPPLICABLE = 4


def _f6(x: float) -> str:
    if abs(x) < 5e-7:
        x = 0.0
    return f"{x:.6f}"


def _trim(x: float) -> str:
    s = f"{x:.6f}".rstrip("0")
    return s + "0" if s.endswith(".") else s


def _normalize_flux(phi: float) -> float:
    """Report fluxes in the principal range (-pi, pi]."""
    r = math.remainder(phi, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def _emit_csv(header: str, rows: list[str], out_path: str | None):
    text = "\n".join([header, *rows]) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_classify(args, graph) -> int:
    sf = SecularFunction.from_graph(graph)
    cls = classify_weyl(sf.coupling, rtol=args.tol_det)
    fields = [
        f"class={cls.label}",
        f"V={_trim(total_internal_length(graph))}",
        f"branch={','.join(cls.branches) if cls.branches else 'none'}",
    ]
    if graph.n_edges == 1:
        fields.append(
            f"zero_size={'true' if one_edge_zero_size(sf.coupling, rtol=args.tol_det) else 'false'}"
        )
    print(" ".join(fields))
    return _EXIT_OK


def _cmd_resonances(args, graph) -> int:
    if (args.radius is None) == (args.rect is None):
        print("error: give exactly one of --radius or --rect")
        return _EXIT_INPUT
    if args.radius is not None:
        region = Disk(0.0, args.radius)
        desc = f"radius={_f6(args.radius)}"
    else:
        try:
            parts = [float(p) for p in args.rect.split(",")]
            if len(parts) != 4:
                raise ValueError
            region = Rect(*parts)
        except ValueError:
            print("error: --rect wants re_min,re_max,im_min,im_max")
            return _EXIT_INPUT
        desc = f"rect={args.rect}"
    sf = SecularFunction.from_graph(graph)
    found = resonances_in(sf, region)
    total = sum(r.multiplicity for r in found)
    print(f"# resonances={total} distinct={len(found)} {desc}")
    rows = [
        f"{_f6(r.k.real)},{_f6(r.k.imag)},{r.multiplicity}" for r in found
    ]
    _emit_csv("re,im,multiplicity", rows, args.out)
    return _EXIT_OK


def _cmd_asymptotics(args, graph) -> int:
    rep = report(graph, rmin=args.rmin, rmax=args.rmax, steps=args.steps)
    ratio = rep.fit.size / rep.volume if rep.volume > 0 else float("nan")
    print(
        f"# W={_f6(rep.fit.size)}"
        f" V={_trim(rep.volume)}"
        f" ratio={_f6(ratio)}"
        f" class={rep.classification.label}"
        f" consistent={'true' if rep.consistent else 'false'}"
    )
    if rep.note:
        print(f"# note: {rep.note}")
    rows = [f"{_f6(r)},{n}" for r, n in rep.points]
    _emit_csv("R,N", rows, args.out)
    return _EXIT_OK


def _cmd_kill_flux(args, graph) -> int:
    sf = SecularFunction.from_graph(graph)
    result = resonance_killing_flux(sf.coupling, rtol=args.tol_det)
    if isinstance(result, NotApplicable):
        print(f"not-applicable reason={result.reason}")
    else:
        print(f"phi={_f6(_normalize_flux(result))}")
    return _EXIT_OK


def _cmd_sweep_flux(args, graph) -> int:
    if args.steps < 2:
        print("error: --steps must be at least 2")
        return _EXIT_INPUT
    if not 0 <= args.edge < graph.n_edges:
        print(f"error: graph has no edge {args.edge}")
        return _EXIT_INAPPLICABLE
    grid = np.linspace(args.phi_from, args.phi_to, args.steps)
    rows = []
    for phi in grid:
        sf = SecularFunction.from_graph(with_flux(graph, args.edge, float(phi)))
        rows.append(
            f"{_f6(_normalize_flux(float(phi)))},{count_in_disk(sf, args.radius)}"
        )
    print(f"# edge={args.edge} radius={_f6(args.radius)}")
    _emit_csv("phi,count", rows, args.out)
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qgres",
        description="Resonances of metric graphs with leads: class, "
        "location, counting asymptotics, and flux tuning.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        q = sub.add_parser(name, help=help_)
        q.add_argument("graph", help="path to a JSON graph description")
        q.set_defaults(func=fn)
        return q

    q = add("classify", _cmd_classify, "full- or reduced-rate resonance counting")
    q.add_argument("--tol-det", type=float, default=1e-9,
                   help="relative tolerance for identical vanishing")

    q = add("resonances", _cmd_resonances, "locate resonances in a region")
    q.add_argument("--radius", type=float, help="disk |k| <= R about the origin")
    q.add_argument("--rect", help="re_min,re_max,im_min,im_max")
    q.add_argument("--out", help="write CSV here instead of stdout")

    q = add("asymptotics", _cmd_asymptotics, "counting ladder and size fit")
    q.add_argument("--rmin", type=float, default=50.0)
    q.add_argument("--rmax", type=float, default=400.0)
    q.add_argument("--steps", type=int, default=8)
    q.add_argument("--out", help="write CSV here instead of stdout")

    q = add("kill-flux", _cmd_kill_flux, "flux cancelling all resonances")
    q.add_argument("--tol-det", type=float, default=1e-9,
                   help="relative tolerance for identical vanishing")

    q = add("sweep-flux", _cmd_sweep_flux, "resonance count along a flux range")
    q.add_argument("--edge", type=int, default=0)
    q.add_argument("--from", dest="phi_from", type=float, required=True)
    q.add_argument("--to", dest="phi_to", type=float, required=True)
    q.add_argument("--steps", type=int, default=9)
    q.add_argument("--radius", type=float, default=40.0)
    q.add_argument("--out", help="write CSV here instead of stdout")

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        graph = load_graph(args.graph)
    except (GraphFormatError, OSError) as exc:
        print(f"error: {exc}")
        return _EXIT_INPUT
    try:
        return args.func(args, graph)
    except (FinderError, NearPoleError) as exc:
        print(f"error: {exc}")
        return _EXIT_NUMERICAL
    except ValueError as exc:
        # Domain preconditions (one-edge operations, k=0 evaluations).
        print(f"error: {exc}")
        return _EXIT_INAPPLICABLE


if __name__ == "__main__":
    sys.exit(main())
