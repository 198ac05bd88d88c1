"""Shared graph builders and frozen couplings used across the suite."""

import numpy as np
import pytest

from qgres import (
    Edge,
    GlobalCoupling,
    Kirchhoff,
    MetricGraph,
    SecularFunction,
    Vertex,
    assemble_global,
    gauge_transform,
)


def lasso(flux: float = 0.0, length: float = 1.0) -> MetricGraph:
    """One loop and two leads at a single Kirchhoff vertex."""
    return MetricGraph(
        vertices=(Vertex("c", Kirchhoff()),),
        edges=(Edge("c", "c", length, flux),),
        leads=("c", "c"),
    )


def loop_one_lead(length: float = 1.0) -> MetricGraph:
    return MetricGraph(
        vertices=(Vertex("c", Kirchhoff()),),
        edges=(Edge("c", "c", length),),
        leads=("c",),
    )


def two_balanced(length: float = 1.5) -> MetricGraph:
    """Single edge with one lead hanging off each endpoint."""
    return MetricGraph(
        vertices=(Vertex("a", Kirchhoff()), Vertex("b", Kirchhoff())),
        edges=(Edge("a", "b", length),),
        leads=("a", "b"),
    )


def gauged_coupling(graph: MetricGraph) -> GlobalCoupling:
    return gauge_transform(assemble_global(graph), graph)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase-fixed diagonal."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# Frozen 4x4 unitary (one edge, two leads) whose effective coupling has
# off-diagonal entries of equal total weight but unequal modulus at sample
# points, so no single flux phase can cancel both.
MISMATCH_U = np.array(
    [[-0.09390297956214799 - 0.3403429800671066j,
      -0.11632010562986189 + 0.08058046160880156j,
      -0.1508944870545886 + 0.2466196992124462j,
      -0.4294454972475483 + 0.7663624803004536j],
     [0.08554540751985995 - 0.03938538986909113j,
      -0.02622458241147418 - 0.02714768603998946j,
      -0.837364283317938 + 0.4170553581695611j,
      0.3114146737074956 - 0.13271335645777405j],
     [-0.48897443656931 - 0.12813006585290346j,
      -0.7792710017018694 - 0.32145496776223637j,
      -0.01701772805888657 - 0.09349493424516053j,
      0.03879538588125006 - 0.1528205105682243j],
     [-0.7380213755500739 - 0.25746999146103616j,
      0.4858096380433093 + 0.1787291298164948j,
      -0.1542047896302789 - 0.0921164482580552j,
      -0.16917199162955265 - 0.24534633995841706j]])


def _already_zero_matrix() -> np.ndarray:
    """One-edge coupling whose effective off-diagonals vanish identically.

    Built so the internal block couples to the leads only through the first
    basis vector while the lead block acts inside a complementary plane.
    """
    f = np.array([0.0, 0.0, 3 / 5, 4j / 5])
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    g = np.column_stack([
        np.array([0.0, 1.0, 0.0, 0.0]),
        np.array([0.0, 0.0, 4j / 5, 3 / 5]),
    ])
    z = np.array([[3 / 5, -4 / 5], [4 / 5, 3 / 5]])
    return np.outer(f, e1.conj()) + np.outer(e1, f.conj()) + g @ z @ g.conj().T


ALREADY_ZERO_U = _already_zero_matrix()


def mismatch_coupling() -> GlobalCoupling:
    return GlobalCoupling(MISMATCH_U.copy(), n_edges=1, n_leads=2)


def already_zero_coupling() -> GlobalCoupling:
    return GlobalCoupling(ALREADY_ZERO_U.copy(), n_edges=1, n_leads=2)


def custom_flower(matrix: np.ndarray, n_edges: int, n_leads: int,
                  lengths=None, fluxes=None) -> MetricGraph:
    """Single vertex carrying ``n_edges`` loops, ``n_leads`` leads and an
    explicit coupling matrix."""
    from qgres import Custom

    lengths = tuple(lengths) if lengths is not None else (1.0,) * n_edges
    fluxes = tuple(fluxes) if fluxes is not None else (0.0,) * n_edges
    edges = tuple(
        Edge("c", "c", lengths[j], fluxes[j]) for j in range(n_edges)
    )
    return MetricGraph(
        vertices=(Vertex("c", Custom(matrix)),),
        edges=edges,
        leads=("c",) * n_leads,
    )


def random_flower(rng: np.random.Generator, max_edges: int = 3,
                  max_leads: int = 3) -> MetricGraph:
    n_edges = int(rng.integers(1, max_edges + 1))
    n_leads = int(rng.integers(1, max_leads + 1))
    n = 2 * n_edges + n_leads
    lengths = rng.uniform(0.5, 2.0, size=n_edges)
    return custom_flower(haar_unitary(n, rng), n_edges, n_leads, lengths)


# --- one-edge families with prescribed off-diagonal behaviour ------------

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])


def _rot(axis: np.ndarray, angle: float) -> np.ndarray:
    return (np.cos(angle / 2) * np.eye(2)
            - 1j * np.sin(angle / 2) * axis)


def quarter_lasso_coupling() -> GlobalCoupling:
    return gauged_coupling(lasso(flux=np.pi / 2))


def killed_family_member(rng: np.random.Generator):
    """Conjugated quarter-flux lasso keeping both off-diagonals zero.

    The internal conjugation is drawn from the stabiliser of the relevant
    trace, so the off-diagonal sum of the effective coupling stays
    identically zero while everything else is scrambled.
    """
    delta, gamma, psi = rng.uniform(0.0, 2 * np.pi, size=3)
    v1 = np.exp(1j * delta) * _rot(_SIGMA_Y, gamma) @ _rot(_SIGMA_X, psi)
    v2 = haar_unitary(2, rng)
    length = float(rng.uniform(0.5, 2.0))
    from qgres import conjugate_coupling

    return conjugate_coupling(quarter_lasso_coupling(), v1, v2), length


def surviving_family_member(rng: np.random.Generator):
    """Conjugated quarter-flux lasso whose off-diagonal sum stays nonzero."""
    from qgres import conjugate_coupling

    while True:
        v1 = haar_unitary(2, rng)
        r_x = 0.5 * np.trace(_SIGMA_X @ v1.conj().T @ _SIGMA_Y @ v1)
        if abs(r_x) >= 0.2:
            break
    v2 = haar_unitary(2, rng)
    length = float(rng.uniform(0.5, 2.0))
    return conjugate_coupling(quarter_lasso_coupling(), v1, v2), length


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260819)
