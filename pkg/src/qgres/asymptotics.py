"""Resonance counting in growing disks and the effective-size fit.

The count N(R) of resonances in the disk |k| <= R grows linearly; the slope,
rescaled by pi/2, measures the size the graph presents to the counting
problem.  Graphs with reduced-rate coupling structure come out strictly
smaller than their total edge length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .effective import AsymptoticsClass, classify_weyl
from .finder import Disk, Region, Resonance, localize, robust_winding
from .graphs import MetricGraph, total_internal_length
from .secular import SecularFunction

_INNER_RADIUS = 1e-3


class _Reduced:
    """Finder-facing view of a secular function without its origin factor."""

    def __init__(self, sf: SecularFunction):
        self.log_values = sf.reduced_log_values
        self.phase_rate = sf.phase_rate
        self.poly_degree = sf.poly_degree


def count_in_disk(
    sf: SecularFunction, radius: float, rng: np.random.Generator | None = None
) -> int:
    """Resonances (with multiplicity) in |k| <= radius, origin excluded.

    A small disk of radius 1e-3 around k = 0 is always subtracted: zeros
    pinned to the origin reflect the threshold structure of the graph, not
    scattering resonances, and their order varies from graph to graph.
    """
    fn = _Reduced(sf)
    outer, _ = robust_winding(fn, Disk(0.0, float(radius)))
    inner, _ = robust_winding(fn, Disk(0.0, _INNER_RADIUS))
    return outer - inner


def ladder(
    sf: SecularFunction, rmin: float = 50.0, rmax: float = 400.0, steps: int = 8
) -> list[tuple[float, int]]:
    """(R, N(R)) along equally spaced radii; the origin is subtracted once."""
    if steps < 2:
        raise ValueError("ladder needs at least two radii")
    if not 0 < rmin < rmax:
        raise ValueError("need 0 < rmin < rmax")
    fn = _Reduced(sf)
    inner, _ = robust_winding(fn, Disk(0.0, _INNER_RADIUS))
    out = []
    for r in np.linspace(rmin, rmax, steps):
        outer, _ = robust_winding(fn, Disk(0.0, float(r)))
        out.append((float(r), outer - inner))
    return out


@dataclass(frozen=True)
class SizeFit:
    """Least-squares line through a counting ladder, in size units."""

    size: float  # pi/2 times the fitted slope
    intercept: float
    residual: float  # max |N - fit|
    slope_sigma: float  # OLS standard error of the slope
    span: float  # radii range covered by the ladder

    @property
    def uncertainty(self) -> float:
        """Size-units error bar on the fitted size.

        OLS slope error plus residual spread, floored by one count over the
        span: integer staircases can sit exactly on a line (zero residual)
        while their slope still differs from the density by a quantization
        bias of that order.
        """
        return float(
            np.pi / 2.0 * (self.slope_sigma + (self.residual + 1.0) / self.span)
        )


def fit_effective_size(points: list[tuple[float, int]]) -> SizeFit:
    """Fit N(R) ~ slope * R + b and convert the slope to a size.

    residual is the worst absolute deviation of the counts from the line;
    slope_sigma the usual OLS error.  Together they bound how much the
    measured size should be trusted.
    """
    if len(points) < 2:
        raise ValueError("need at least two ladder points")
    rs = np.array([p[0] for p in points], dtype=float)
    ns = np.array([p[1] for p in points], dtype=float)
    if rs.max() == rs.min():
        raise ValueError("ladder radii are all equal")
    slope, intercept = np.polyfit(rs, ns, 1)
    fitted = slope * rs + intercept
    residual = float(np.max(np.abs(ns - fitted)))
    if len(points) > 2:
        s2 = float(np.sum((ns - fitted) ** 2) / (len(points) - 2))
        denom = float(np.sum((rs - rs.mean()) ** 2))
        slope_sigma = float(np.sqrt(s2 / denom)) if denom > 0 else 0.0
    else:
        slope_sigma = 0.0
    return SizeFit(
        size=float(np.pi / 2.0 * slope),
        intercept=float(intercept),
        residual=residual,
        slope_sigma=slope_sigma,
        span=float(rs.max() - rs.min()),
    )


@dataclass(frozen=True)
class AsymptoticsReport:
    volume: float
    classification: AsymptoticsClass
    points: tuple[tuple[float, int], ...]
    fit: SizeFit
    consistent: bool
    note: str


def report(
    graph: MetricGraph,
    rmin: float = 50.0,
    rmax: float = 400.0,
    steps: int = 8,
) -> AsymptoticsReport:
    """Measure the counting size of a graph and check it against its class.

    Reduced-rate graphs must measure strictly below their total length
    (beyond three fit uncertainties); full-rate graphs must match it within
    three.  Disagreement is reported in the note rather than raised: it
    usually means the radii straddle too few resonances.
    """
    sf = SecularFunction.from_graph(graph)
    cls = classify_weyl(sf.coupling)
    vol = total_internal_length(graph)
    points = ladder(sf, rmin=rmin, rmax=rmax, steps=steps)
    fit = fit_effective_size(points)
    u = 3.0 * fit.uncertainty
    if cls.is_weyl:
        consistent = abs(fit.size - vol) <= u
        note = "" if consistent else (
            f"full-rate graph measured {fit.size:.6f} against length {vol:.6f}"
        )
    else:
        consistent = fit.size < vol - u
        note = "" if consistent else (
            f"reduced-rate graph did not measure below its length "
            f"({fit.size:.6f} vs {vol:.6f})"
        )
    return AsymptoticsReport(
        volume=vol,
        classification=cls,
        points=tuple(points),
        fit=fit,
        consistent=consistent,
        note=note,
    )


def resonances_in(
    sf: SecularFunction, region: Region, rng: np.random.Generator | None = None
) -> tuple[Resonance, ...]:
    """Locate resonances of a graph's secular function in a region.

    Zeros within 1e-3 of the origin are dropped, matching count_in_disk.
    """
    found = localize(_Reduced(sf), region, rng=rng)
    return tuple(r for r in found if abs(r.k) > _INNER_RADIUS)
