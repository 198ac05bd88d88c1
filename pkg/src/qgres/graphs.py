"""Metric graphs with magnetic fluxes, attached leads, and vertex couplings."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

UNITARITY_TOL = 1e-10


class GraphFormatError(ValueError):
    """Raised when a graph description file cannot be parsed."""


@dataclass(frozen=True)
class Kirchhoff:
    """Standard coupling: continuity plus current conservation."""


@dataclass(frozen=True)
class Delta:
    """Delta coupling of the given strength (0 reduces to Kirchhoff)."""

    strength: float = 0.0


@dataclass(frozen=True, eq=False)
class Custom:
    """Arbitrary unitary vertex coupling, one matrix row/column per slot."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))


Coupling = Union[Kirchhoff, Delta, Custom]


@dataclass(frozen=True)
class Vertex:
    id: str
    coupling: Coupling = field(default_factory=Kirchhoff)


@dataclass(frozen=True)
class Edge:
    """Internal edge of finite length; flux is the line integral of the potential."""

    start: str
    end: str
    length: float
    flux: float = 0.0


@dataclass(frozen=True)
class MetricGraph:
    """A finite metric graph with semi-infinite leads.

    Canonical slot ordering, used by every matrix in this package: for each
    edge (in listed order) its start endpoint then its end endpoint, followed
    by the leads in listed order.  Edge j owns slots 2j and 2j+1; lead m owns
    slot 2*n_edges + m.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    leads: tuple[str, ...] = ()

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_leads(self) -> int:
        return len(self.leads)

    @property
    def n_slots(self) -> int:
        return 2 * len(self.edges) + len(self.leads)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges], dtype=float)

    @property
    def fluxes(self) -> np.ndarray:
        return np.array([e.flux for e in self.edges], dtype=float)

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def incident_slots(self, vid: str) -> list[int]:
        """Canonical slot indices at a vertex, ascending.

        A loop edge contributes both of its slots, start endpoint first.
        """
        slots = []
        for j, e in enumerate(self.edges):
            if e.start == vid:
                slots.append(2 * j)
            if e.end == vid:
                slots.append(2 * j + 1)
        for m, at in enumerate(self.leads):
            if at == vid:
                slots.append(2 * self.n_edges + m)
        return slots

    def degree(self, vid: str) -> int:
        return len(self.incident_slots(vid))


def total_internal_length(graph: MetricGraph) -> float:
    """Sum of the finite edge lengths (leads do not contribute)."""
    return float(sum(e.length for e in graph.edges))


def with_flux(graph: MetricGraph, edge_index: int, flux: float) -> MetricGraph:
    """Copy of the graph with one edge's flux replaced."""
    if not 0 <= edge_index < graph.n_edges:
        raise IndexError(f"no edge {edge_index}")
    edges = list(graph.edges)
    e = edges[edge_index]
    edges[edge_index] = Edge(e.start, e.end, e.length, flux)
    return MetricGraph(graph.vertices, tuple(edges), graph.leads)


def kirchhoff_matrix(degree: int) -> np.ndarray:
    """Vertex scattering-type unitary for the standard coupling: (2/d)J - I."""
    if degree < 1:
        raise ValueError("degree must be positive")
    d = degree
    return (2.0 / d) * np.ones((d, d), dtype=complex) - np.eye(d, dtype=complex)


def delta_matrix(degree: int, strength: float) -> np.ndarray:
    """Vertex unitary for a delta interaction: (2/(d + i*alpha))J - I.

    strength=0 gives the standard coupling; strength -> inf tends to -I
    (Dirichlet decoupling).
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    d = degree
    return (2.0 / (d + 1j * strength)) * np.ones((d, d), dtype=complex) - np.eye(
        d, dtype=complex
    )


def coupling_matrix(coupling: Coupling, degree: int) -> np.ndarray:
    """The d x d unitary describing boundary conditions at one vertex."""
    if isinstance(coupling, Kirchhoff):
        return kirchhoff_matrix(degree)
    if isinstance(coupling, Delta):
        return delta_matrix(degree, coupling.strength)
    if isinstance(coupling, Custom):
        m = np.asarray(coupling.matrix, dtype=complex)
        if m.shape != (degree, degree):
            raise ValueError(
                f"custom coupling is {m.shape}, vertex degree is {degree}"
            )
        return m
    raise TypeError(f"unknown coupling {coupling!r}")


def is_unitary(m: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(
        np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol
    )


def validate(graph: MetricGraph) -> list[str]:
    """Check a graph for structural problems; returns a list of violations.

    An empty list means the graph is usable.  Checks: distinct vertex ids,
    edge/lead endpoints exist, lengths positive and finite, fluxes finite,
    every vertex has at least one slot, custom matrices unitary with the
    right dimension.
    """
    problems = []
    ids = [v.id for v in graph.vertices]
    if len(set(ids)) != len(ids):
        problems.append("vertex ids are not distinct")
    known = set(ids)
    for j, e in enumerate(graph.edges):
        if e.start not in known:
            problems.append(f"edge {j} starts at unknown vertex {e.start!r}")
        if e.end not in known:
            problems.append(f"edge {j} ends at unknown vertex {e.end!r}")
        if not (math.isfinite(e.length) and e.length > 0):
            problems.append(f"edge {j} has non-positive or non-finite length")
        if not math.isfinite(e.flux):
            problems.append(f"edge {j} has non-finite flux")
    for m, at in enumerate(graph.leads):
        if at not in known:
            problems.append(f"lead {m} attached to unknown vertex {at!r}")
    for v in graph.vertices:
        if v.id not in known:
            continue
        d = graph.degree(v.id)
        if d == 0:
            problems.append(f"vertex {v.id!r} is isolated (no edge or lead)")
            continue
        if isinstance(v.coupling, Custom):
            m = v.coupling.matrix
            if m.shape != (d, d):
                problems.append(
                    f"vertex {v.id!r} coupling is {m.shape}, degree is {d}"
                )
            elif not is_unitary(m):
                problems.append(f"vertex {v.id!r} coupling is not unitary")
    return problems


@dataclass(frozen=True, eq=False)
class GlobalCoupling:
    """Single unitary holding all vertex conditions in canonical slot order.

    Block structure (n = 2*n_edges internal slots, then n_leads lead slots):

        [ internal        internal_lead ]
        [ lead_internal   lead          ]
    """

    matrix: np.ndarray
    n_edges: int
    n_leads: int

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))
        n = 2 * self.n_edges + self.n_leads
        if self.matrix.shape != (n, n):
            raise ValueError(
                f"matrix is {self.matrix.shape}, expected ({n}, {n})"
            )

    @property
    def n_internal(self) -> int:
        return 2 * self.n_edges

    @property
    def internal_block(self) -> np.ndarray:
        n = self.n_internal
        return self.matrix[:n, :n]

    @property
    def internal_lead_block(self) -> np.ndarray:
        n = self.n_internal
        return self.matrix[:n, n:]

    @property
    def lead_internal_block(self) -> np.ndarray:
        n = self.n_internal
        return self.matrix[n:, :n]

    @property
    def lead_block(self) -> np.ndarray:
        n = self.n_internal
        return self.matrix[n:, n:]


def assemble_global(graph: MetricGraph) -> GlobalCoupling:
    """Build the block-diagonal-up-to-permutation global vertex unitary.

    Each vertex contributes its coupling matrix on its own incident slots;
    slots of distinct vertices never interact.
    """
    problems = validate(graph)
    if problems:
        raise ValueError("invalid graph: " + "; ".join(problems))
    n = graph.n_slots
    u = np.zeros((n, n), dtype=complex)
    for v in graph.vertices:
        slots = graph.incident_slots(v.id)
        u[np.ix_(slots, slots)] = coupling_matrix(v.coupling, len(slots))
    return GlobalCoupling(u, graph.n_edges, graph.n_leads)


def gauge_phases(graph: MetricGraph) -> np.ndarray:
    """Diagonal of the gauge factor removing the vector potential.

    Slot 2j carries 1, slot 2j+1 carries e^{i flux_j}; lead slots carry 1.
    """
    f = np.ones(graph.n_slots, dtype=complex)
    for j, e in enumerate(graph.edges):
        f[2 * j + 1] = cmath.exp(1j * e.flux)
    return f


def gauge_transform(coupling: GlobalCoupling, graph: MetricGraph) -> GlobalCoupling:
    """Absorb edge fluxes into the vertex coupling.

    Returns conj(F) U F entrywise with F = gauge_phases(graph), i.e. the
    coupling seen by the flux-free problem.  With a single looping edge of
    flux phi this sends the off-diagonal pair (u_12, u_21) to
    (e^{i phi} u_12, e^{-i phi} u_21).
    """
    f = gauge_phases(graph)
    u = coupling.matrix * f[np.newaxis, :] * f.conj()[:, np.newaxis]
    return GlobalCoupling(u, coupling.n_edges, coupling.n_leads)


def _parse_coupling(obj, where: str) -> Coupling:
    if not isinstance(obj, dict) or "type" not in obj:
        raise GraphFormatError(f"{where}: coupling must be an object with a 'type'")
    t = obj["type"]
    if t == "kirchhoff":
        return Kirchhoff()
    if t == "delta":
        if "alpha" not in obj:
            raise GraphFormatError(f"{where}: delta coupling needs 'alpha'")
        return Delta(float(obj["alpha"]))
    if t == "custom":
        rows = obj.get("matrix")
        if rows is None:
            raise GraphFormatError(f"{where}: custom coupling needs 'matrix'")
        try:
            m = np.array(
                [[complex(re, im) for re, im in row] for row in rows],
                dtype=complex,
            )
        except (TypeError, ValueError) as exc:
            raise GraphFormatError(
                f"{where}: matrix entries must be [re, im] pairs"
            ) from exc
        return Custom(m)
    raise GraphFormatError(f"{where}: unknown coupling type {t!r}")


def parse_graph(text: str) -> MetricGraph:
    """Parse the JSON graph description; see load_graph."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GraphFormatError("top level must be an object")

    vertices = []
    for i, v in enumerate(data.get("vertices", [])):
        if not isinstance(v, dict) or "id" not in v:
            raise GraphFormatError(f"vertex {i}: must be an object with an 'id'")
        coupling = (
            _parse_coupling(v["coupling"], f"vertex {v['id']}")
            if "coupling" in v
            else Kirchhoff()
        )
        vertices.append(Vertex(str(v["id"]), coupling))

    edges = []
    for i, e in enumerate(data.get("edges", [])):
        if not isinstance(e, dict):
            raise GraphFormatError(f"edge {i}: must be an object")
        for key in ("from", "to", "length"):
            if key not in e:
                raise GraphFormatError(f"edge {i}: missing {key!r}")
        try:
            length = float(e["length"])
            flux = float(e.get("flux", 0.0))
        except (TypeError, ValueError) as exc:
            raise GraphFormatError(f"edge {i}: length/flux must be numbers") from exc
        edges.append(Edge(str(e["from"]), str(e["to"]), length, flux))

    leads = []
    for i, l in enumerate(data.get("leads", [])):
        if not isinstance(l, dict) or "at" not in l:
            raise GraphFormatError(f"lead {i}: must be an object with 'at'")
        leads.append(str(l["at"]))

    graph = MetricGraph(tuple(vertices), tuple(edges), tuple(leads))
    problems = validate(graph)
    if problems:
        raise GraphFormatError("; ".join(problems))
    return graph


def load_graph(path) -> MetricGraph:
    """Read a graph from a JSON file.

    Expected shape::

        {"vertices": [{"id": "a", "coupling": {"type": "kirchhoff"}}, ...],
         "edges":    [{"from": "a", "to": "a", "length": 6.28, "flux": 0.0}],
         "leads":    [{"at": "a"}]}

    Couplings: kirchhoff (default when omitted), delta with "alpha", or
    custom with "matrix" given as rows of [re, im] pairs.  Array order fixes
    the canonical slot ordering.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_graph(text)
