"""Resonances of metric graphs with semi-infinite leads.

Build a graph (or load one from JSON), then: classify its resonance-counting
rate, locate resonances by the argument principle, measure the effective
size from counting ladders, and search for fluxes that cancel the resonances
of single-edge graphs.
"""

from .asymptotics import (
    AsymptoticsReport,
    SizeFit,
    count_in_disk,
    fit_effective_size,
    ladder,
    report,
    resonances_in,
)
from .effective import (
    AsymptoticsClass,
    BRANCH_MINUS,
    BRANCH_PLUS,
    NearPoleError,
    NotApplicable,
    classify_weyl,
    conjugate_coupling,
    effective_at,
    one_edge_zero_size,
    pole_set,
    resonance_killing_flux,
)
from .finder import (
    BoundaryZero,
    Disk,
    FinderError,
    Rect,
    Resonance,
    StepCapExceeded,
    as_log_function,
    localize,
    robust_winding,
    winding_count,
)
from .graphs import (
    Custom,
    Delta,
    Edge,
    GlobalCoupling,
    GraphFormatError,
    Kirchhoff,
    MetricGraph,
    Vertex,
    assemble_global,
    delta_matrix,
    gauge_transform,
    kirchhoff_matrix,
    load_graph,
    parse_graph,
    total_internal_length,
    validate,
    with_flux,
)
from .secular import LogEval, SecularFunction, one_edge_condition

__all__ = [
    "AsymptoticsClass",
    "AsymptoticsReport",
    "BRANCH_MINUS",
    "BRANCH_PLUS",
    "BoundaryZero",
    "Custom",
    "Delta",
    "Disk",
    "Edge",
    "FinderError",
    "GlobalCoupling",
    "GraphFormatError",
    "Kirchhoff",
    "LogEval",
    "MetricGraph",
    "NearPoleError",
    "NotApplicable",
    "Rect",
    "Resonance",
    "SecularFunction",
    "SizeFit",
    "StepCapExceeded",
    "Vertex",
    "as_log_function",
    "assemble_global",
    "classify_weyl",
    "conjugate_coupling",
    "count_in_disk",
    "delta_matrix",
    "effective_at",
    "fit_effective_size",
    "gauge_transform",
    "kirchhoff_matrix",
    "ladder",
    "load_graph",
    "localize",
    "one_edge_condition",
    "one_edge_zero_size",
    "parse_graph",
    "pole_set",
    "report",
    "resonance_killing_flux",
    "resonances_in",
    "robust_winding",
    "total_internal_length",
    "validate",
    "winding_count",
    "with_flux",
]
