"""veintex: multi-view standoff annotation of discourse structure and reference."""

from .centering import (
    CfList,
    SmoothnessReport,
    Transition,
    build_chains,
    classify_transition,
    comparison_report,
    compute_cb,
    ct_score,
    derive_cf,
    vt_predecessor,
    vt_score,
)
from .markup import (
    MarkDocument,
    MarkElement,
    find_by_id,
    parse_document,
    serialize_document,
    validate_references,
)
from .pipeline import DocumentInput, PipelineConfig, analyze_document, run_analysis
from .sessions import Session, get_analysis, open_session
from .tree import (
    DiscourseTree,
    RelationLink,
    UnitRef,
    adjoin,
    build_forest,
    build_tree,
    substitute,
    validate_tree,
)
from .veins import (
    VeinExpr,
    accessibility_domain,
    annotate,
    classify_references,
    compute_heads,
    compute_veins,
)
from .views import Anchor, View, ViewGraph
from .viewio import load_view_graph, save_view

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "CfList",
    "DiscourseTree",
    "DocumentInput",
    "MarkDocument",
    "MarkElement",
    "PipelineConfig",
    "RelationLink",
    "Session",
    "SmoothnessReport",
    "Transition",
    "UnitRef",
    "VeinExpr",
    "View",
    "ViewGraph",
    "accessibility_domain",
    "adjoin",
    "analyze_document",
    "annotate",
    "build_chains",
    "build_forest",
    "build_tree",
    "classify_references",
    "classify_transition",
    "comparison_report",
    "compute_cb",
    "compute_heads",
    "compute_veins",
    "ct_score",
    "derive_cf",
    "find_by_id",
    "get_analysis",
    "load_view_graph",
    "open_session",
    "parse_document",
    "run_analysis",
    "save_view",
    "serialize_document",
    "substitute",
    "validate_references",
    "validate_tree",
    "vt_predecessor",
    "vt_score",
    "__version__",
]
