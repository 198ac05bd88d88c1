"""Argument-principle root location for holomorphic functions.

Works on any object exposing log_values(ks) -> LogEval (see secular.py);
plain callables can be wrapped with as_log_function.  Winding numbers come
from phase tracking along boundaries with adaptive refinement, roots from
jittered quadrisection handed off to Newton iteration, multiplicities are
verified by small-circle windings so the output always accounts for every
zero the outer contour saw.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence, Union

import numpy as np

from .secular import LogEval

_DIP_LOG = np.log(1e-8)
_MAX_BOUNDARY_SAMPLES = 2**20
_MIN_SEGMENT = 1e-12
_DILATION = 1e-4
_RETRIES = 8
_MERGE_SCALE = 1e-6
_HANDOFF_SCALE = 1e-2
_FLOOR_SCALE = 1e-8
_NEWTON_STEPS = 100


class FinderError(RuntimeError):
    """Root search failed in a way retries could not absorb."""


class BoundaryZero(FinderError):
    """A zero sits on (or hugs) the integration contour."""

    def __init__(self, point: complex):
        super().__init__(f"zero on or next to the contour near k={point}")
        self.point = point


class StepCapExceeded(FinderError):
    """Phase tracking would need more boundary samples than allowed."""


class _BadPartition(Exception):
    """A cell's recorded count contradicts clean windings of its children.

    Raised (and caught) inside the subdivision tree only: it means a zero
    hugging some ancestor's cut line aliased a full phase turn across the
    shared edge, so the ancestor must cut along fresh lines.
    """


class LogFunction(Protocol):
    def log_values(self, ks) -> LogEval: ...


class _PlainLog:
    def __init__(self, f: Callable):
        self._f = f

    def log_values(self, ks) -> LogEval:
        v = np.atleast_1d(np.asarray(self._f(np.asarray(ks, dtype=complex))))
        mag = np.abs(v)
        zero = mag == 0
        log_abs = np.where(zero, -np.inf, np.log(np.where(zero, 1.0, mag)))
        phase = np.where(zero, 0.0 + 0.0j, v / np.where(zero, 1.0, mag))
        return LogEval(log_abs, phase, log_abs.copy())


def as_log_function(f: Union[Callable, LogFunction]) -> LogFunction:
    """Wrap a plain vectorized complex function for the finder."""
    if hasattr(f, "log_values"):
        return f
    return _PlainLog(f)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned closed rectangle [re_min, re_max] x [im_min, im_max]."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("rectangle must have positive width and height")

    @property
    def center(self) -> complex:
        return complex(
            0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max)
        )

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.re_max - self.re_min, self.im_max - self.im_min))

    def contains(self, z: complex) -> bool:
        return (
            self.re_min <= z.real <= self.re_max
            and self.im_min <= z.imag <= self.im_max
        )

    def boundary(self, ts: np.ndarray) -> np.ndarray:
        """Counterclockwise boundary point for each parameter in [0, 1)."""
        ts = np.asarray(ts, dtype=float)
        w = self.re_max - self.re_min
        h = self.im_max - self.im_min
        per = 2.0 * (w + h)
        d = (ts % 1.0) * per
        z = np.empty(ts.shape, dtype=complex)
        m0 = d < w
        z[m0] = self.re_min + d[m0] + 1j * self.im_min
        m1 = (~m0) & (d < w + h)
        z[m1] = self.re_max + 1j * (self.im_min + (d[m1] - w))
        m2 = (~m0) & (~m1) & (d < 2 * w + h)
        z[m2] = self.re_max - (d[m2] - w - h) + 1j * self.im_max
        m3 = ~(m0 | m1 | m2)
        z[m3] = self.re_min + 1j * (self.im_max - (d[m3] - 2 * w - h))
        return z

    def dilated(self, factor: float) -> "Rect":
        c = self.center
        hw = 0.5 * (self.re_max - self.re_min) * factor
        hh = 0.5 * (self.im_max - self.im_min) * factor
        return Rect(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk needs a positive radius")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) <= self.radius

    def boundary(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return self.center + self.radius * np.exp(2j * np.pi * ts)

    def dilated(self, factor: float) -> "Disk":
        return Disk(self.center, self.radius * factor)

    def bounding_rect(self) -> Rect:
        c, r = self.center, self.radius
        return Rect(c.real - r, c.real + r, c.imag - r, c.imag + r)


Region = Union[Rect, Disk]


def region_seed(region: Region, salt: int = 0) -> int:
    """Deterministic seed derived from region geometry (stable across runs)."""
    if isinstance(region, Rect):
        raw = struct.pack(
            "<4d", region.re_min, region.re_max, region.im_min, region.im_max
        )
    else:
        raw = struct.pack("<3d", region.center.real, region.center.imag, region.radius)
    return zlib.crc32(raw) ^ salt


def _phase_steps(phases: np.ndarray) -> np.ndarray:
    ratio = phases[1:] * np.conj(phases[:-1])
    return np.angle(ratio)


def _perimeter(region: Region) -> float:
    if isinstance(region, Rect):
        return 2.0 * ((region.re_max - region.re_min) + (region.im_max - region.im_min))
    return 2.0 * np.pi * region.radius


def _initial_samples(fn: LogFunction, region: Region, floor: int) -> int:
    """Grid fine enough that the smooth phase rate cannot alias.

    Secular determinants advertise their exponential phase rate (the largest
    |s| in e^{iks} terms) and polynomial degree; the boundary grid must beat
    both, otherwise a 2 pi phase turn between neighbors reads as a small
    step and the refinement loop never looks at it.
    """
    rate = float(getattr(fn, "phase_rate", 0.0))
    degree = int(getattr(fn, "poly_degree", 0))
    by_rate = int(np.ceil(_perimeter(region) * rate * 2.0 / np.pi)) * 2
    return max(floor, by_rate, 4 * degree)


def winding_count(
    fn: LogFunction,
    region: Region,
    max_samples: int = _MAX_BOUNDARY_SAMPLES,
    initial: int = 128,
) -> int:
    """Number of zeros (with multiplicity) inside the region boundary.

    Tracks the argument of fn along the boundary, refining any step whose
    phase jump reaches pi/2 by inserting midpoints.  Before accepting a
    result the whole grid is doubled once more; any refinement triggered by
    that doubling restarts the loop, so phase turns hiding between samples
    at one resolution still surface.  Raises BoundaryZero if the values dip
    to rounding level relative to their natural scale or a phase jump
    persists at vanishing parameter separation; raises StepCapExceeded when
    refinement would pass max_samples points.
    """
    n0 = _initial_samples(fn, region, initial)
    ts = np.linspace(0.0, 1.0, n0, endpoint=False)
    ts = np.append(ts, 1.0)  # closing point duplicates t=0 for the loop sum
    ev = fn.log_values(region.boundary(ts))
    phases = ev.phase.copy()
    _check_boundary_values(ev, region, ts)
    verified = False

    def insert(mids: np.ndarray):
        nonlocal ts, phases
        mev = fn.log_values(region.boundary(mids))
        _check_boundary_values(mev, region, mids)
        order = np.argsort(np.concatenate([ts, mids]), kind="stable")
        ts = np.concatenate([ts, mids])[order]
        phases = np.concatenate([phases, mev.phase])[order]

    while True:
        steps = _phase_steps(phases)
        bad = np.abs(steps) >= 0.5 * np.pi
        if not np.any(bad):
            if verified:
                break
            if 2 * len(ts) > max_samples:
                raise StepCapExceeded(
                    f"boundary refinement passed {max_samples} samples"
                )
            verified = True
            insert(0.5 * (ts[:-1] + ts[1:]))
            continue
        verified = False
        tiny = bad & (np.diff(ts) < _MIN_SEGMENT)
        if np.any(tiny):
            idx = int(np.argmax(tiny))
            raise BoundaryZero(complex(region.boundary(np.array([ts[idx]]))[0]))
        if len(ts) + int(bad.sum()) > max_samples:
            raise StepCapExceeded(
                f"boundary refinement passed {max_samples} samples"
            )
        insert(0.5 * (ts[:-1][bad] + ts[1:][bad]))
    total = float(_phase_steps(phases).sum())
    w = total / (2.0 * np.pi)
    if abs(w - round(w)) > 0.2:
        raise FinderError(
            f"phase tracking did not close up (winding residue {w - round(w):.3f})"
        )
    return int(round(w))


def _check_boundary_values(ev: LogEval, region: Region, ts: np.ndarray):
    with np.errstate(invalid="ignore"):
        norm = ev.log_abs - ev.log_scale
    dead = ~np.isfinite(ev.log_abs)
    dip = np.where(np.isfinite(norm), norm, -np.inf) < _DIP_LOG
    bad = dead | dip
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise BoundaryZero(complex(region.boundary(np.atleast_1d(ts)[idx : idx + 1])[0]))


def robust_winding(
    fn: LogFunction,
    region: Region,
    rng: np.random.Generator | None = None,
    max_samples: int = _MAX_BOUNDARY_SAMPLES,
) -> tuple[int, Region]:
    """winding_count with randomized boundary dilation on contour hits.

    Returns (count, region actually used); the region only changes by
    relative amounts of order 1e-4, and only outward, so the count can
    include a zero sitting within that sliver of the nominal boundary.
    """
    rng = rng or np.random.default_rng(region_seed(region))
    current = region
    last: FinderError | None = None
    for _ in range(_RETRIES):
        try:
            return winding_count(fn, current, max_samples=max_samples), current
        except BoundaryZero as exc:
            last = exc
            current = current.dilated(1.0 + _DILATION * float(rng.uniform(0.5, 1.5)))
    raise last if last is not None else FinderError("winding failed")


@dataclass(frozen=True)
class Resonance:
    k: complex
    multiplicity: int


def _plain_values(fn: LogFunction, ks: np.ndarray, ref_scale: float) -> np.ndarray:
    """fn as ordinary complex numbers, rescaled by e^{-ref_scale}.

    The constant rescaling keeps Newton quotients unchanged while avoiding
    overflow at depths where the raw determinant exceeds float range.
    """
    ev = fn.log_values(ks)
    out = np.zeros(len(np.atleast_1d(ks)), dtype=complex)
    fin = np.isfinite(ev.log_abs)
    out[fin] = ev.phase[fin] * np.exp(ev.log_abs[fin] - ref_scale)
    return out


def _newton_polish(
    fn: LogFunction, start: complex, multiplicity: int, cell_diam: float
) -> complex | None:
    """Multiplicity-aware Newton from a cell center; None when it fails."""
    ev0 = fn.log_values(np.array([start]))
    ref = ev0.log_scale[0] if np.isfinite(ev0.log_scale[0]) else 0.0
    x = start
    for _ in range(_NEWTON_STEPS):
        h = 1e-6 * (1.0 + abs(x))
        vals = _plain_values(fn, np.array([x, x + h, x - h]), ref)
        f, fp, fm = vals
        df = (fp - fm) / (2.0 * h)
        if df == 0 or not np.isfinite(df):
            return None
        step = multiplicity * f / df
        if not np.isfinite(step):
            return None
        x = x - step
        if abs(x - start) > 4.0 * cell_diam:
            return None
        if abs(step) < 1e-10 * (1.0 + abs(x)):
            return x
    return None


def _split_rect(
    rect: Rect, rng: np.random.Generator, spread: float = 0.02
) -> list[Rect]:
    fx = float(rng.uniform(0.5 - spread, 0.5 + spread))
    fy = float(rng.uniform(0.5 - spread, 0.5 + spread))
    xm = rect.re_min + fx * (rect.re_max - rect.re_min)
    ym = rect.im_min + fy * (rect.im_max - rect.im_min)
    return [
        Rect(rect.re_min, xm, rect.im_min, ym),
        Rect(xm, rect.re_max, rect.im_min, ym),
        Rect(rect.re_min, xm, ym, rect.im_max),
        Rect(xm, rect.re_max, ym, rect.im_max),
    ]


def _subdivide(
    fn: LogFunction, rect: Rect, count: int, rng: np.random.Generator
) -> list[tuple[complex, int]]:
    """Recursive quadrisection of a rect known to hold `count` zeros."""
    if count == 0:
        return []
    handoff = _HANDOFF_SCALE * (1.0 + abs(rect.center))
    if rect.diameter < handoff:
        root = _newton_polish(fn, rect.center, count, rect.diameter)
        if root is not None and _dist_to_rect(root, rect) <= 0.05 * rect.diameter:
            m, vdisk = _verified_multiplicity(fn, root, rng)
            if m == count:
                if count > 1 and vdisk is not None:
                    better = _cluster_centroid(fn, vdisk, count)
                    if better is not None and abs(better - root) <= vdisk.radius:
                        root = better
                return [(root, count)]
        # Newton failed or found fewer zeros than the cell holds: the cell
        # contains a cluster; keep cutting until the floor.
        if rect.diameter < _FLOOR_SCALE * (1.0 + abs(rect.center)):
            return [(rect.center, count)]
    mismatches = 0
    for attempt in range(_RETRIES):
        # Widen the split band on retries: a zero pinned near the cell's
        # midline defeats every nearly-central cut.
        children = _split_rect(rect, rng, min(0.02 * 2.0**attempt, 0.35))
        try:
            counts = []
            for child in children:
                counts.append(winding_count(fn, child))
        except (BoundaryZero, StepCapExceeded):
            continue
        if sum(counts) != count:
            # A clean quadrisection contradicting the cell's label means a
            # near-boundary zero aliased some winding.  Retrying covers the
            # fresh internal lines; persistent contradictions indict the
            # label itself, which only an ancestor's new cut can repair.
            mismatches += 1
            if mismatches > 2:
                raise _BadPartition(rect.center)
            continue
        try:
            found: list[tuple[complex, int]] = []
            for child, c in zip(children, counts):
                found.extend(_subdivide(fn, child, c, rng))
            return found
        except _BadPartition:
            mismatches += 1
            if mismatches > 2:
                raise
            continue
    raise FinderError(
        f"could not split cell around {rect.center} without hitting a zero"
    )


def _dist_to_rect(z: complex, rect: Rect) -> float:
    dx = max(rect.re_min - z.real, 0.0, z.real - rect.re_max)
    dy = max(rect.im_min - z.imag, 0.0, z.imag - rect.im_max)
    return float(np.hypot(dx, dy))


def _verified_multiplicity(
    fn: LogFunction, root: complex, rng: np.random.Generator
) -> tuple[int, Disk | None]:
    r = _MERGE_SCALE * (1.0 + abs(root))
    try:
        m, used = robust_winding(fn, Disk(root, r), rng=rng)
    except FinderError:
        return -1, None
    return m, used


def _cluster_centroid(fn: LogFunction, disk: Disk, m: int) -> complex | None:
    """Multiplicity-weighted mean of the zeros inside a zero-free circle.

    Integrates z dlog(f) around the boundary: writing the tracked logarithm
    as a periodic part plus its 2 pi i m winding makes the quadrature
    spectrally accurate, so a lone multiple root comes back at machine
    precision where finite-difference iteration stalls near the noise
    floor it amplifies by 1/m.
    """
    n = _initial_samples(fn, disk, 512)
    ts = np.linspace(0.0, 1.0, n, endpoint=False)
    ts = np.append(ts, 1.0)
    ev = fn.log_values(disk.boundary(ts))
    if not np.all(np.isfinite(ev.log_abs)):
        return None
    angles = np.concatenate([[0.0], np.cumsum(_phase_steps(ev.phase))])
    logf = ev.log_abs + 1j * (np.angle(ev.phase[0]) + angles)
    periodic = logf - 2j * np.pi * m * ts
    dz_dt = 2j * np.pi * disk.radius * np.exp(2j * np.pi * ts)
    y = periodic * dz_dt
    integral = complex(((y[1:] + y[:-1]) * 0.5 * np.diff(ts)).sum())
    return disk.center - integral / (2j * np.pi * m)


def _merge_roots(found: Sequence[tuple[complex, int]]) -> list[tuple[complex, int]]:
    merged: list[tuple[complex, int]] = []
    for z, m in found:
        for i, (zi, mi) in enumerate(merged):
            if abs(z - zi) <= _MERGE_SCALE * (1.0 + abs(z)):
                merged[i] = ((zi * mi + z * m) / (mi + m), mi + m)
                break
        else:
            merged.append((z, m))
    return merged


def localize(
    fn: Union[Callable, LogFunction],
    region: Region,
    rng: np.random.Generator | None = None,
) -> tuple[Resonance, ...]:
    """All zeros of fn in the region, polished, with multiplicities.

    The sum of returned multiplicities always equals the region's winding
    number (a FinderError is raised otherwise, rather than returning a
    silently incomplete list).  Results are sorted by real then imaginary
    part.  Deterministic for a given fn and region.
    """
    fn = as_log_function(fn)
    rng = rng or np.random.default_rng(region_seed(region, salt=0x5EED))
    rect = region.bounding_rect() if isinstance(region, Disk) else region
    total, used = robust_winding(fn, rect, rng=rng)
    try:
        found = _merge_roots(_subdivide(fn, used, total, rng))
    except _BadPartition as exc:
        raise FinderError(
            f"region winding disagrees with its subdivisions near {exc.args[0]}"
        ) from None
    if sum(m for _, m in found) != total:
        raise FinderError("located multiplicities do not add up to the winding")
    if isinstance(region, Disk):
        disk_w, used_disk = robust_winding(fn, region, rng=rng)
        inside = [
            (z, m) for z, m in found if abs(z - region.center) <= used_disk.radius
        ]
        if sum(m for _, m in inside) != disk_w:
            raise FinderError("disk membership filter lost or gained zeros")
        found = inside
    found.sort(key=lambda t: (t[0].real, t[0].imag))
    return tuple(Resonance(z, m) for z, m in found)
