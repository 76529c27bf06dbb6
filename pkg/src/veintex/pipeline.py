"""End-to-end analysis over an effective document: tree building, vein
computation, accessibility domains, reference classification, and the
CT/VT smoothness comparison; plus materialization of the derived views
(rs-in-u, veins, cf, ct, vt) into a view graph."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from . import centering, veins
from .centering import (
    CfList,
    Chains,
    ReportRow,
    SmoothnessReport,
    aggregate_rows,
    build_chains,
    comparison_report,
    coref_links_from_document,
    derive_cf,
    rs_by_unit,
    rs_units_map,
)
from .markup import MarkDocument, serialize_document
from .tree import DiscourseTree, forest_from_document, units_from_document
from .veins import ReferenceLabel, VeinAnnotation, annotate
from .views import ViewGraph
from .viewio import load_view_graph, save_view


@dataclass
class DocumentAnalysis:
    source: str
    unit_ids: list[str] = field(default_factory=list)
    forest: list[DiscourseTree] = field(default_factory=list)
    tree: DiscourseTree | None = None
    annotation: VeinAnnotation | None = None
    partial_annotations: list[tuple[str, VeinAnnotation]] = field(default_factory=list)
    chains: Chains | None = None
    cf: dict[str, CfList] = field(default_factory=dict)
    rs_to_unit: dict[str, str] = field(default_factory=dict)
    ct: SmoothnessReport | None = None
    vt: SmoothnessReport | None = None
    row: ReportRow | None = None
    ref_counts: dict[str, int] | None = None
    ref_labels: list[ReferenceLabel] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def complete_tree(self) -> bool:
        return self.tree is not None


def analyze_document(doc: MarkDocument, source: str = "",
                     weights=None) -> DocumentAnalysis:
    """Run the full pipeline on one effective document.

    Steps: build the relation tree, attach each reference string to its
    unit, compute heads/veins and accessibility domains, classify
    references as direct/indirect/inaccessible, and score CT and VT
    smoothness over the unit sequence.
    """
    result = DocumentAnalysis(source=source or doc.source_name)
    units = units_from_document(doc)
    result.unit_ids = [u.id for u in units]
    if not units:
        result.warnings.append("no discourse units")
        return result

    result.forest = forest_from_document(doc)
    if len(result.forest) == 1 and result.forest[0].unit_count == len(
            [u for u in units if not u.is_open]):
        result.tree = result.forest[0]
        result.annotation = annotate(result.tree)
    else:
        result.warnings.append(
            f"discourse structure is a forest of {len(result.forest)} island(s)")
        for tree in result.forest:
            result.partial_annotations.append((tree.root.key, annotate(tree)))

    rs_to_unit, rs_order = rs_units_map(doc)
    result.rs_to_unit = rs_to_unit
    if not rs_order:
        result.warnings.append("no reference view")
        return result

    coref, bridge = coref_links_from_document(doc)
    result.chains = build_chains([(l.source, l.target) for l in coref], rs_order)
    per_unit = rs_by_unit(doc)
    result.cf = {u: derive_cf(u, rs, result.chains) for u, rs in per_unit.items()}

    if result.annotation is not None:
        counts, labels = veins.classify_references(
            coref + bridge, rs_to_unit, result.chains.chain_of,
            result.annotation.domains)
        result.ref_counts = counts
        result.ref_labels = labels

    if len(units) >= 2:
        chains_per_unit = {u: set(result.cf[u].centers) for u in result.cf}
        result.ct = centering.ct_score(result.unit_ids, result.cf,
                                       chains_per_unit, weights)
        if result.annotation is not None:
            result.vt = centering.vt_score(result.unit_ids, result.cf,
                                           chains_per_unit,
                                           result.annotation.domains, weights)
            result.row = comparison_report(result.ct, result.vt, result.source)
    return result


# ----------------------------------------------------------------------
# Derived views (the Fig.-2 style hierarchy, materialized)

_DERIVED_PARENTS = {
    "rs-in-u-view": ["u-view", "rs-view"],
    "veins-view": ["rel-view"],
    "cf-view": ["rs-in-u-view"],
    "ct-view": ["cf-view", "rl-view"],
    "vt-view": ["cf-view", "rl-view", "veins-view"],
}


def _resolve_parents(graph: ViewGraph, wanted: list[str],
                     fallback: list[str]) -> list[str]:
    parents = [name for name in wanted if name in graph.views]
    return parents or list(fallback)


def derive_views(graph: ViewGraph, analysis: DocumentAnalysis) -> list[str]:
    """Materialize analysis results as first-class views in the graph.

    Returns the ids of the views created.  Veins attributes land on the
    unit segs and relation links, cf/cb/cb-h attributes on the units,
    and each rs gains the id of the unit containing it.
    """
    fallback = graph.leaves() or [graph.hub_id]
    created: list[str] = []

    def make(view_id: str) -> str:
        parents = _resolve_parents(graph, _DERIVED_PARENTS[view_id], fallback)
        graph.add_view(view_id, parents, on_conflict="parent-precedence")
        created.append(view_id)
        return view_id

    if analysis.rs_to_unit:
        rs_in_u = make("rs-in-u-view")
        for rs_id, unit_id in analysis.rs_to_unit.items():
            graph.set_attribute(rs_in_u, rs_id, "unit", unit_id)

    if analysis.annotation is not None:
        veins_view = make("veins-view")
        for key, expr in analysis.annotation.heads.items():
            graph.set_attribute(veins_view, key, "head", expr.format())
        for key, expr in analysis.annotation.veins.items():
            graph.set_attribute(veins_view, key, "vein", expr.format())

    if analysis.cf:
        cf_view = make("cf-view")
        for unit_id, cf in analysis.cf.items():
            if cf.centers:
                graph.set_attribute(cf_view, unit_id, "cf", " ".join(cf.centers))

    if analysis.ct is not None:
        ct_view = make("ct-view")
        for unit_id, cb in analysis.ct.cb_map.items():
            if cb is not None:
                graph.set_attribute(ct_view, unit_id, "cb", cb)

    if analysis.vt is not None:
        vt_view = make("vt-view")
        for unit_id, cb in analysis.vt.cb_map.items():
            if cb is not None:
                graph.set_attribute(vt_view, unit_id, "cb-h", cb)
    return created


# ----------------------------------------------------------------------
# Batch driver


@dataclass
class DocumentInput:
    hub_path: Path
    view_paths: list[Path] = field(default_factory=list)

    @property
    def name(self) -> str:
        return Path(self.hub_path).stem


@dataclass
class PipelineConfig:
    docs: list[DocumentInput]
    output_dir: Path
    report_format: str = "csv"  # or "text"
    score_weights: dict | None = None


def load_document_graph(doc_input: DocumentInput) -> ViewGraph:
    return load_view_graph(doc_input.hub_path,
                           list(doc_input.view_paths))


def compose_analysis_base(graph: ViewGraph) -> tuple[MarkDocument, str | None]:
    """The union of every leaf view: the fully annotated document."""
    leaves = graph.leaves()
    if len(leaves) == 1:
        return graph.compose_effective(leaves[0]), None
    graph.add_view("analysis-base", leaves, on_conflict="parent-precedence")
    return graph.compose_effective("analysis-base"), "analysis-base"


def run_analysis(config: PipelineConfig):
    """Analyze every document, write derived views and reports.

    Output layout: ``<out>/<doc>/`` holds the derived view manifests and
    payloads; ``<out>/comparison.csv`` (or ``.txt``) carries one row per
    document plus a Total row for batches; ``<out>/references.csv``
    carries the direct/indirect/inaccessible counts and
    ``<out>/reference-links.csv`` the per-link labels.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    analyses: list[DocumentAnalysis] = []
    for doc_input in config.docs:
        graph = load_document_graph(doc_input)
        base, base_view = compose_analysis_base(graph)
        analysis = analyze_document(base, doc_input.name, config.score_weights)
        analyses.append(analysis)
        created = derive_views(graph, analysis)
        doc_dir = out / doc_input.name
        doc_dir.mkdir(parents=True, exist_ok=True)
        _copy_inputs(doc_input, doc_dir)
        if base_view is not None:
            save_view(graph, base_view, doc_dir)
        for view_id in created:
            save_view(graph, view_id, doc_dir)
        (doc_dir / "effective.vxd").write_bytes(serialize_document(base))

    rows = [a.row for a in analyses if a.row is not None]
    if config.report_format == "text":
        (out / "comparison.txt").write_text(render_comparison_text(rows), "utf-8")
    else:
        (out / "comparison.csv").write_text(render_comparison_csv(rows), "utf-8")
    (out / "references.csv").write_text(render_reference_counts(analyses), "utf-8")
    (out / "reference-links.csv").write_text(render_reference_links(analyses), "utf-8")
    return analyses


def _copy_inputs(doc_input: DocumentInput, doc_dir: Path):
    from .viewio import parse_manifest

    hub_path = Path(doc_input.hub_path)
    (doc_dir / hub_path.name).write_bytes(hub_path.read_bytes())
    for view_path in doc_input.view_paths:
        view_path = Path(view_path)
        (doc_dir / view_path.name).write_bytes(view_path.read_bytes())
        manifest = parse_manifest(view_path.read_text("utf-8"), str(view_path))
        if manifest["payload"]:
            payload = view_path.parent / manifest["payload"]
            (doc_dir / payload.name).write_bytes(payload.read_bytes())


def render_comparison_csv(rows: list[ReportRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(centering.TABLE_HEADERS)
    for row in rows:
        writer.writerow(row.cells())
    if len(rows) > 1:
        writer.writerow(aggregate_rows(rows).cells())
    return buffer.getvalue()


def render_comparison_text(rows: list[ReportRow]) -> str:
    table = [centering.TABLE_HEADERS]
    table.extend(row.cells() for row in rows)
    if len(rows) > 1:
        table.append(aggregate_rows(rows).cells())
    widths = [max(len(line[col]) for line in table) for col in range(len(table[0]))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
             for line in table]
    return "\n".join(lines) + "\n"


def render_reference_counts(analyses: list[DocumentAnalysis]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["Source", "direct", "indirect", "inaccessible"])
    for analysis in analyses:
        if analysis.ref_counts is None:
            continue
        counts = analysis.ref_counts
        writer.writerow([analysis.source, counts["direct"], counts["indirect"],
                         counts["inaccessible"]])
    return buffer.getvalue()


def render_reference_links(analyses: list[DocumentAnalysis]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["Source", "source_rs", "target_rs", "kind",
                     "source_unit", "target_unit", "label"])
    for analysis in analyses:
        for label in analysis.ref_labels:
            writer.writerow([analysis.source, label.link.source, label.link.target,
                             label.link.kind, label.source_unit, label.target_unit,
                             label.label])
    return buffer.getvalue()
