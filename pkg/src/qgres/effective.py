"""Energy-dependent effective coupling on the internal part of a graph.

Eliminating the lead slots from the vertex conditions leaves a k-dependent
unitary-like matrix on the internal slots.  Its eigenvalue structure decides
whether the resonance count in large disks grows at the rate set by the total
edge length (the generic case) or strictly slower.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .graphs import GlobalCoupling, is_unitary

# Eigenvalue branches whose presence in the effective coupling, identically
# in k, shortens the asymptotic count.
BRANCH_PLUS = "(1+k)/(1-k)"
BRANCH_MINUS = "(1-k)/(1+k)"

_REL_TOL = 1e-9


class NearPoleError(ValueError):
    """Effective coupling requested too close to one of its poles."""


@dataclass(frozen=True)
class AsymptoticsClass:
    """Verdict of classify_weyl: full-rate or reduced-rate counting."""

    is_weyl: bool
    branches: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return "weyl" if self.is_weyl else "non-weyl"


@dataclass(frozen=True)
class NotApplicable:
    """Why no single flux can cancel the resonances of a one-edge graph."""

    reason: str


REASON_WEYL = "weyl"
REASON_MODULUS = "modulus-mismatch"
REASON_ALREADY_ZERO = "already-zero"


def _inner_matrix(coupling: GlobalCoupling, k: complex) -> np.ndarray:
    """(1-k) U4 - (1+k) I, the matrix inverted when eliminating leads."""
    u4 = coupling.lead_block
    m = coupling.n_leads
    return (1.0 - k) * u4 - (1.0 + k) * np.eye(m)


def effective_at(coupling: GlobalCoupling, k: complex) -> np.ndarray:
    """Evaluate the effective internal coupling at momentum k.

    U1 - (1-k) U2 [(1-k) U4 - (1+k) I]^{-1} U3 on the 2*n_edges internal
    slots.  Raises NearPoleError when the bracket is numerically singular
    (condition number beyond 1e12).
    """
    u1 = coupling.internal_block
    if coupling.n_leads == 0:
        return u1.copy()
    inner = _inner_matrix(coupling, k)
    if np.linalg.cond(inner) > 1e12:
        raise NearPoleError(f"effective coupling has a pole near k={k}")
    u2 = coupling.internal_lead_block
    u3 = coupling.lead_internal_block
    return u1 - (1.0 - k) * (u2 @ np.linalg.solve(inner, u3))


def pole_set(coupling: GlobalCoupling) -> np.ndarray:
    """Momenta where the lead elimination breaks down.

    These are (mu - 1)/(mu + 1) over eigenvalues mu of the lead block;
    an eigenvalue -1 contributes no finite pole.
    """
    if coupling.n_leads == 0:
        return np.array([], dtype=complex)
    mu = np.linalg.eigvals(coupling.lead_block)
    keep = np.abs(mu + 1.0) > 1e-14
    poles = (mu[keep] - 1.0) / (mu[keep] + 1.0)
    order = np.lexsort((poles.imag, poles.real))
    return poles[order]


def _sample_points(n: int, radius: float = 2.0, offset: float = 0.37) -> np.ndarray:
    t = np.arange(n)
    return radius * np.exp(1j * (2.0 * np.pi * t / n + offset))


def _branch_block(coupling: GlobalCoupling, k: complex, branch: str) -> np.ndarray:
    """Polynomial block matrix whose determinant clears the branch test.

    det of this equals det[(1-k)U4 - (1+k)I] * c^{2N} * det(Ueff - lambda I)
    with lambda the branch value and c its denominator, so it vanishes
    identically exactly when lambda is an eigenvalue branch of Ueff.  Being
    polynomial in k it is immune to the pole set.
    """
    u1 = coupling.internal_block
    u2 = coupling.internal_lead_block
    u3 = coupling.lead_internal_block
    n2 = coupling.n_internal
    m = coupling.n_leads
    eye_n = np.eye(n2)
    if branch == BRANCH_PLUS:
        top_left = (1.0 - k) * u1 - (1.0 + k) * eye_n
        c = 1.0 - k
    elif branch == BRANCH_MINUS:
        top_left = (1.0 + k) * u1 - (1.0 - k) * eye_n
        c = 1.0 + k
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if m == 0:
        return top_left
    return np.block(
        [
            [top_left, c * (1.0 - k) * u2],
            [u3, _inner_matrix(coupling, k)],
        ]
    )


def _hadamard_bound(m: np.ndarray) -> float:
    norms = np.linalg.norm(m, axis=1)
    return float(np.prod(norms)) if norms.size else 1.0


def _branch_vanishes(coupling: GlobalCoupling, branch: str, rtol: float) -> bool:
    n_e = coupling.n_edges
    m = coupling.n_leads
    degree_cap = 2 * n_e * (m + 2)
    ks = _sample_points(2 * degree_cap + 5)
    vals = np.empty(len(ks))
    scales = np.empty(len(ks))
    for i, k in enumerate(ks):
        block = _branch_block(coupling, k, branch)
        vals[i] = abs(np.linalg.det(block))
        scales[i] = _hadamard_bound(block)
    return bool(vals.max() < rtol * scales.max())


def classify_weyl(coupling: GlobalCoupling, rtol: float = _REL_TOL) -> AsymptoticsClass:
    """Decide whether the resonance count grows at the full length rate.

    The count is reduced exactly when the effective coupling has
    (1+k)/(1-k) or (1-k)/(1+k) among its eigenvalues for every k.  Each
    branch is tested by sampling a cleared polynomial on the circle |k|=2;
    identical vanishing shows up as values at rounding level relative to a
    Hadamard envelope.
    """
    branches = tuple(
        b for b in (BRANCH_MINUS, BRANCH_PLUS) if _branch_vanishes(coupling, b, rtol)
    )
    return AsymptoticsClass(is_weyl=not branches, branches=branches)


def conjugate_coupling(
    coupling: GlobalCoupling, v_internal: np.ndarray, v_lead: np.ndarray
) -> GlobalCoupling:
    """Block-diagonal change of basis: internal slots by V1, lead slots by V2.

    Preserves the Weyl/non-Weyl verdict (the effective coupling transforms by
    similarity), though individual resonances generally move when V1 is not
    scalar.  Both blocks must be unitary.
    """
    v1 = np.asarray(v_internal, dtype=complex)
    v2 = np.asarray(v_lead, dtype=complex)
    n2 = coupling.n_internal
    m = coupling.n_leads
    if v1.shape != (n2, n2):
        raise ValueError(f"internal block must be {(n2, n2)}, got {v1.shape}")
    if v2.shape != (m, m):
        raise ValueError(f"lead block must be {(m, m)}, got {v2.shape}")
    if not is_unitary(v1) or not is_unitary(v2):
        raise ValueError("conjugating blocks must be unitary")
    u = coupling.matrix
    new = np.empty_like(u)
    new[:n2, :n2] = v1.conj().T @ u[:n2, :n2] @ v1
    new[:n2, n2:] = v1.conj().T @ u[:n2, n2:] @ v2
    new[n2:, :n2] = v2.conj().T @ u[n2:, :n2] @ v1
    new[n2:, n2:] = v2.conj().T @ u[n2:, n2:] @ v2
    return GlobalCoupling(new, coupling.n_edges, coupling.n_leads)


def _offdiag_samples(coupling: GlobalCoupling, n_samples: int):
    """(k, u12, u21) triples on |k|=2 plus the typical entry size of Ueff.

    Sample points are nudged off the pole set; the typical size anchors
    relative comparisons when the off-diagonal itself is at rounding level.
    """
    poles = pole_set(coupling)
    offset = 0.37
    for _ in range(64):
        ks = _sample_points(n_samples, offset=offset)
        if poles.size == 0:
            break
        dist = np.abs(ks[:, None] - poles[None, :]).min()
        if dist > 1e-6:
            break
        offset += 0.0131
    else:
        raise NearPoleError("could not place samples away from the pole set")
    out = []
    typical = 0.0
    for k in ks:
        ue = effective_at(coupling, k)
        out.append((k, ue[0, 1], ue[1, 0]))
        typical = max(typical, float(np.abs(ue).max()))
    return out, typical


def one_edge_zero_size(coupling: GlobalCoupling, rtol: float = _REL_TOL) -> bool:
    """True when a single-edge graph has only finitely many resonances.

    Requires the reduced counting rate and, on top of it, identical vanishing
    of the off-diagonal sum of the effective 2x2 coupling.
    """
    if coupling.n_edges != 1:
        raise ValueError("zero-size test applies to graphs with exactly one edge")
    if classify_weyl(coupling, rtol).is_weyl:
        return False
    samples, typical = _offdiag_samples(coupling, 2 * (coupling.n_leads + 2) + 5)
    num = max(abs(u12 + u21) for _, u12, u21 in samples)
    scale = max(abs(u12) + abs(u21) for _, u12, u21 in samples)
    if scale <= rtol * typical:
        return True  # both off-diagonal entries vanish identically
    return num <= rtol * scale


def resonance_killing_flux(coupling: GlobalCoupling, rtol: float = _REL_TOL):
    """Flux (on the single edge) cancelling every resonance, when one exists.

    Returns the canonical flux in [0, pi) -- the companion solution is
    phi - pi -- or NotApplicable with a reason: full-rate counting,
    off-diagonal moduli that differ, or an off-diagonal pair that already
    vanishes identically.
    """
    if coupling.n_edges != 1:
        raise ValueError("killing flux applies to graphs with exactly one edge")
    if classify_weyl(coupling, rtol).is_weyl:
        return NotApplicable(REASON_WEYL)
    samples, typical = _offdiag_samples(coupling, 2 * (coupling.n_leads + 2) + 5)
    mags = [(abs(u12), abs(u21)) for _, u12, u21 in samples]
    scale = max(a + b for a, b in mags)
    if scale <= rtol * typical:
        return NotApplicable(REASON_ALREADY_ZERO)
    if any(abs(a - b) > rtol * scale for a, b in mags):
        return NotApplicable(REASON_MODULUS)
    # Equal moduli: a flux phi with e^{i phi} u12 = -e^{-i phi} u21 exists
    # iff the phase below is constant in k; verify after computing it.
    # Solutions come in pairs phi, phi + pi; return the one in [0, pi).
    _, u12, u21 = max(samples, key=lambda s: abs(s[1]))
    phi = 0.5 * cmath.phase(-u21 / u12)
    if phi < 0:
        phi += math.pi
    if phi >= math.pi:
        phi -= math.pi
    for _, a12, a21 in samples[:5]:
        if abs(cmath.exp(1j * phi) * a12 + cmath.exp(-1j * phi) * a21) > 1e-12 * max(
            scale, 1.0
        ):
            return NotApplicable(REASON_MODULUS)
    return float(phi)
