"""Secular function whose zeros in the lower half-plane are the resonances.

The matrix couples boundary values and derivatives of e^{+-ikx} solutions on
each edge (two columns per edge) and of the outgoing wave on each lead (one
column).  Its determinant mixes exponentials e^{ik s} over a lattice of edge
length combinations s; evaluating the determinant as an explicit sum over
those exponentials keeps it meaningful deep in the lower half-plane, where a
plain LU determinant drowns in cancellation between terms of size e^{|Im k| L}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import GlobalCoupling, MetricGraph, assemble_global, gauge_transform

_CHUNK = 2048
_STRUCT_ZERO_RTOL = 1e-10
_MAX_EDGES_SPLIT = 10


@dataclass(frozen=True)
class LogEval:
    """Determinant values in scaled form: det = phase * exp(log_abs).

    log_scale is the magnitude of the dominant exponential term at each
    point; log_abs - log_scale is a dimensionless size, O(1) away from zeros
    and tiny near them, usable at any depth in the complex plane.
    """

    log_abs: np.ndarray
    phase: np.ndarray
    log_scale: np.ndarray

    @property
    def normalized_mag(self) -> np.ndarray:
        return self.log_abs - self.log_scale


@dataclass(frozen=True)
class _TermGroup:
    """Constituents det(X + kY) sharing one exponent s in e^{iks}."""

    exponent: float
    xs: np.ndarray  # (n_constituents, D, D)
    ys: np.ndarray


def _reject_zero(ks: np.ndarray):
    if np.any(ks == 0):
        raise ValueError("secular function is undefined at k = 0")


class SecularFunction:
    """Callable package for one graph's secular determinant."""

    def __init__(self, coupling: GlobalCoupling, lengths: Sequence[float]):
        lengths = np.asarray(lengths, dtype=float)
        if lengths.shape != (coupling.n_edges,):
            raise ValueError("one length per edge required")
        if np.any(lengths <= 0):
            raise ValueError("edge lengths must be positive")
        self.coupling = coupling
        self.lengths = lengths
        self.n_edges = coupling.n_edges
        self.n_leads = coupling.n_leads
        self._a = coupling.matrix - np.eye(coupling.matrix.shape[0])
        self._b = 1j * (coupling.matrix + np.eye(coupling.matrix.shape[0]))
        self._groups: list[_TermGroup] | None = None

    @classmethod
    def from_graph(cls, graph: MetricGraph) -> "SecularFunction":
        """Assemble the vertex unitary, absorb fluxes, build the function."""
        coupling = gauge_transform(assemble_global(graph), graph)
        return cls(coupling, graph.lengths)

    # ---------------------------------------------------------------- plain

    def matrix(self, k: complex) -> np.ndarray:
        """The secular matrix at one momentum (k = 0 is outside the domain)."""
        _reject_zero(np.array([k]))
        n, m = self.n_edges, self.n_leads
        size = 2 * n + m
        v = np.zeros((size, size), dtype=complex)
        w = np.zeros((size, size), dtype=complex)
        e = np.exp(1j * k * self.lengths)
        for j in range(n):
            ej, inv = e[j], 1.0 / e[j]
            v[2 * j, 2 * j] = 1.0
            v[2 * j, 2 * j + 1] = 1.0
            v[2 * j + 1, 2 * j] = ej
            v[2 * j + 1, 2 * j + 1] = inv
            w[2 * j, 2 * j] = 1j * k
            w[2 * j, 2 * j + 1] = -1j * k
            w[2 * j + 1, 2 * j] = -1j * k * ej
            w[2 * j + 1, 2 * j + 1] = 1j * k * inv
        for t in range(m):
            v[2 * n + t, 2 * n + t] = 1.0
            w[2 * n + t, 2 * n + t] = 1j * k
        return (self.coupling.matrix - np.eye(size)) @ v + 1j * (
            self.coupling.matrix + np.eye(size)
        ) @ w

    def det(self, k: complex) -> complex:
        """Plain LU determinant; fine at moderate |Im k|, useless deep down."""
        return complex(np.linalg.det(self.matrix(k)))

    def normalized_det(self, k: complex) -> complex:
        """Determinant divided by the product of row maxima.

        A scale-free point diagnostic for |k| of moderate size; values below
        ~1e-9 flag a zero on or next to the evaluation point.
        """
        m = self.matrix(k)
        row_max = np.abs(m).max(axis=1)
        if np.any(row_max == 0):
            return 0.0j
        return complex(np.linalg.det(m / row_max[:, None]))

    # ---------------------------------------------------------------- split

    def _build_groups(self) -> list[_TermGroup]:
        """Column-choice expansion of the determinant over edge exponentials.

        Each edge contributes two columns; splitting every column into its
        constant and its e^{+-ik l} part and expanding by multilinearity
        leaves constituents det(X + kY) with constant X, Y.  Constituent
        families that vanish identically (structural zeros of the graph) are
        detected on a sample circle and dropped.
        """
        n, m = self.n_edges, self.n_leads
        if n > _MAX_EDGES_SPLIT:
            raise ValueError(
                f"split evaluation caps at {_MAX_EDGES_SPLIT} edges, graph has {n}"
            )
        size = 2 * n + m
        a, b = self._a, self._b

        # Per edge, per column pair, the four (const/exponential) choices:
        # (label, exponent sign, builder for the two columns).
        def edge_parts(j):
            # Column 2j carries (value row, +ik deriv row) at x=0 with basis
            # coefficient pair; its constant piece uses column 2j of A, B and
            # its e^{ikl} piece uses column 2j+1.  Column 2j+1 mirrors this
            # with the opposite derivative signs and e^{-ikl}.
            parts_first = (
                (0.0, a[:, 2 * j], 1j * b[:, 2 * j]),
                (self.lengths[j], a[:, 2 * j + 1], -1j * b[:, 2 * j + 1]),
            )
            parts_second = (
                (0.0, a[:, 2 * j], -1j * b[:, 2 * j]),
                (-self.lengths[j], a[:, 2 * j + 1], 1j * b[:, 2 * j + 1]),
            )
            return parts_first, parts_second

        edge_options = [edge_parts(j) for j in range(n)]
        grouped: dict[float, list[tuple[np.ndarray, np.ndarray]]] = {}
        for picks in itertools.product(*(range(4) for _ in range(n))):
            x = np.zeros((size, size), dtype=complex)
            y = np.zeros((size, size), dtype=complex)
            s = 0.0
            for j, pick in enumerate(picks):
                first, second = edge_options[j]
                s1, xc1, yc1 = first[pick & 1]
                s2, xc2, yc2 = second[(pick >> 1) & 1]
                x[:, 2 * j], y[:, 2 * j] = xc1, yc1
                x[:, 2 * j + 1], y[:, 2 * j + 1] = xc2, yc2
                s += s1 + s2
            for t in range(m):
                x[:, 2 * n + t] = a[:, 2 * n + t]
                y[:, 2 * n + t] = 1j * b[:, 2 * n + t]
            grouped.setdefault(round(s, 12), []).append((x, y))

        groups = [
            _TermGroup(s, np.stack([c[0] for c in cs]), np.stack([c[1] for c in cs]))
            for s, cs in sorted(grouped.items())
        ]
        return self._drop_structural_zeros(groups)

    def _drop_structural_zeros(self, groups: list[_TermGroup]) -> list[_TermGroup]:
        """Remove exponent groups whose polynomial part is identically zero.

        Each group total is a polynomial of degree at most 2N+M, so sampling
        more points than that on a circle decides identical vanishing.  The
        comparison scale is global -- the largest constituent magnitude
        across all groups -- because a structurally zero group is pure
        rounding noise relative to the whole determinant, not relative to
        itself.  Keeping such a group would let noise, amplified by its
        e^{ik s} factor, bury the true value deep in the lower half-plane.
        """
        deg = 2 * self.n_edges + self.n_leads
        ks = 2.0 * np.exp(1j * (2 * np.pi * np.arange(deg + 5) / (deg + 5) + 0.11))
        totals = []
        env = 0.0
        for g in groups:
            sign, logabs = np.linalg.slogdet(
                g.xs[:, None, :, :] + ks[None, :, None, None] * g.ys[:, None, :, :]
            )
            vals = np.where(np.isfinite(logabs), sign * np.exp(logabs), 0.0)
            totals.append(np.abs(vals.sum(axis=0)).max())
            env = max(
                env, np.where(np.isfinite(logabs), np.exp(logabs), 0.0).sum(axis=0).max()
            )
        kept = [
            g
            for g, t in zip(groups, totals)
            if t > _STRUCT_ZERO_RTOL * max(env, 1e-300)
        ]
        if not kept:
            raise ValueError("secular determinant is structurally zero")
        return kept

    @property
    def groups(self) -> list[_TermGroup]:
        if self._groups is None:
            self._groups = self._build_groups()
        return self._groups

    @property
    def phase_rate(self) -> float:
        """Largest |s| over surviving e^{iks} terms; bounds |d arg / dk|."""
        return max((abs(g.exponent) for g in self.groups), default=0.0)

    @property
    def poly_degree(self) -> int:
        """Degree bound of each term's polynomial factor."""
        return 2 * self.n_edges + self.n_leads

    def log_values(self, ks) -> LogEval:
        """Split-form determinant on an array of momenta.

        Exact up to rounding at moderate |k| (agrees with det()) and stays
        finite and meaningful at depths where the LU determinant over- or
        underflows.
        """
        ks = np.atleast_1d(np.asarray(ks, dtype=complex))
        _reject_zero(ks)
        out_log = np.empty(ks.shape, dtype=float)
        out_phase = np.empty(ks.shape, dtype=complex)
        out_scale = np.empty(ks.shape, dtype=float)
        for start in range(0, len(ks), _CHUNK):
            sl = slice(start, min(start + _CHUNK, len(ks)))
            self._log_values_chunk(ks[sl], out_log[sl], out_phase[sl], out_scale[sl])
        return LogEval(out_log, out_phase, out_scale)

    def _log_values_chunk(self, ks, out_log, out_phase, out_scale):
        groups = self.groups
        n_k = len(ks)
        term_log = np.full((len(groups), n_k), -np.inf)
        term_phase = np.zeros((len(groups), n_k), dtype=complex)
        for gi, g in enumerate(groups):
            sign, logabs = np.linalg.slogdet(
                g.xs[:, None, :, :] + ks[None, :, None, None] * g.ys[:, None, :, :]
            )
            # Combine constituents of one exponent: factor out the largest
            # magnitude so the mantissa sum stays in range.
            lmax = logabs.max(axis=0)
            finite = np.isfinite(lmax)
            mant = np.zeros(n_k, dtype=complex)
            if np.any(finite):
                rel = np.where(
                    np.isfinite(logabs[:, finite]),
                    np.exp(logabs[:, finite] - lmax[finite]),
                    0.0,
                )
                mant[finite] = (sign[:, finite] * rel).sum(axis=0)
            # Attach the exponential e^{ik s}: log-magnitude -Im(k) s, unit
            # phase e^{i Re(k) s}.
            mag = np.abs(mant)
            ok = finite & (mag > 0)
            term_log[gi, ok] = lmax[ok] + np.log(mag[ok]) - ks[ok].imag * g.exponent
            term_phase[gi, ok] = (mant[ok] / mag[ok]) * np.exp(
                1j * ks[ok].real * g.exponent
            )
        scale = term_log.max(axis=0)
        out_scale[:] = scale
        alive = np.isfinite(scale)
        total = np.zeros(n_k, dtype=complex)
        if np.any(alive):
            rel = np.where(
                np.isfinite(term_log[:, alive]),
                np.exp(term_log[:, alive] - scale[alive]),
                0.0,
            )
            total[alive] = (term_phase[:, alive] * rel).sum(axis=0)
        mag = np.abs(total)
        zero = mag == 0
        out_log[:] = np.where(zero, -np.inf, scale + np.log(np.where(zero, 1.0, mag)))
        out_phase[:] = np.where(zero, 0.0 + 0.0j, total / np.where(zero, 1.0, mag))

    def reduced_log_values(self, ks) -> LogEval:
        """log_values with the structural k^n_edges factor divided out.

        The factor is an artifact of the e^{+-ikx} basis, not a resonance;
        removing it lets contours shrink toward the origin without phantom
        winding.
        """
        ks = np.atleast_1d(np.asarray(ks, dtype=complex))
        ev = self.log_values(ks)
        shift = self.n_edges * np.log(np.abs(ks))
        spin = np.exp(-1j * self.n_edges * np.angle(ks))
        return LogEval(ev.log_abs - shift, ev.phase * spin, ev.log_scale - shift)

    def value(self, k: complex) -> complex:
        """Split-form determinant at a single point as an ordinary complex."""
        ev = self.log_values(np.array([k]))
        if not np.isfinite(ev.log_abs[0]):
            return 0.0j
        return complex(ev.phase[0] * np.exp(ev.log_abs[0]))


def one_edge_condition(ueff: np.ndarray, length: float, k: complex) -> complex:
    """Resonance condition of a one-edge graph from its effective coupling.

    2x2 determinant combining the boundary data of e^{+-ikx} on the single
    edge with the effective coupling evaluated at the same k; zeros coincide
    with the secular determinant's (away from its pole set).  In terms of
    E = e^{ikl} it reduces to A E + B + C E^{-1} with B proportional to
    k (u12 + u21), which is what flux tuning can cancel.
    """
    ueff = np.asarray(ueff, dtype=complex)
    e = np.exp(1j * k * length)
    m1 = np.array([[0, 0], [-1j, 1]], dtype=complex)
    m2 = np.array([[0, 0], [1j, 1]], dtype=complex)
    m3 = np.array([[1j, 0], [0, 0]], dtype=complex)
    m4 = np.array([[0, 1], [0, 0]], dtype=complex)
    um = ueff - np.eye(2)
    up = k * (ueff + np.eye(2))
    mat = (
        0.5 * (um + up) @ m1 * e
        + 0.5 * (um - up) @ m2 / e
        + up @ m3
        + um @ m4
    )
    return complex(np.linalg.det(mat))
