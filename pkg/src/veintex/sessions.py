"""Annotation sessions: optimistic-versioned edits over a view graph.

A session wraps a view graph with one editable working view on top of
whatever was loaded.  Every accepted edit bumps the version by one;
edits carrying a stale version are rejected without touching state.
Analyses are computed fresh from the current state and never mutate it.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field

from .errors import (
    PrerequisiteMissing,
    SiteNotOpen,
    StaleVersion,
    TreeError,
    VeintexError,
)
from .markup import MarkDocument, MarkElement, parse_document, split_targets
from .pipeline import analyze_document, derive_views
from .tree import forest_from_document
from .veins import annotate
from .views import Anchor, ViewGraph
from .viewio import apply_payload

WORK_VIEW = "work"
_DERIVED_NAMES = ("rs-in-u-view", "veins-view", "cf-view", "ct-view", "vt-view",
                  "analysis-base")


@dataclass
class EditResult:
    version: int
    created: list[str] = field(default_factory=list)
    modified: list[str] = field(default_factory=list)
    deleted: list[str] = field(default_factory=list)
    summary: str = ""


class Session:
    def __init__(self, session_id: str, graph: ViewGraph, active_view: str):
        self.session_id = session_id
        self.graph = graph
        self.active_view = active_view
        self.version = 0
        self.lock = threading.Lock()
        self._derived_version = -1

    # -- reads -------------------------------------------------------

    def effective(self, view_id: str | None = None) -> MarkDocument:
        view_id = view_id or self.active_view
        if view_id not in self.graph.views and view_id in _DERIVED_NAMES:
            self._ensure_derived()
        return self.graph.compose_effective(view_id)

    def _ensure_derived(self):
        if self._derived_version == self.version:
            return
        for name in _DERIVED_NAMES:
            self.graph.views.pop(name, None)
        analysis = analyze_document(self.graph.compose_effective(self.active_view),
                                    self.session_id)
        derive_views(self.graph, analysis)
        self._derived_version = self.version

    # -- edits -------------------------------------------------------

    def apply_edit(self, version: int, edit: dict) -> EditResult:
        with self.lock:
            if version != self.version:
                raise StaleVersion(self.version, version)
            kind = edit.get("kind")
            handler = _EDIT_HANDLERS.get(kind)
            if handler is None:
                raise VeintexError(f"unknown edit kind {kind!r}")
            view = self.graph.views[self.active_view]
            snapshot = view.snapshot()
            try:
                result = handler(self, edit)
            except Exception:
                view.restore(snapshot)
                raise
            self.version += 1
            result.version = self.version
            return result

    # helpers used by edit handlers

    def _fresh_id(self, prefix: str) -> str:
        doc = self.effective()
        pattern = re.compile(rf"{prefix}(\d+)\Z")
        highest = 0
        for key in doc.id_index:
            match = pattern.match(key)
            if match:
                highest = max(highest, int(match.group(1)))
        return f"{prefix}{highest + 1}"

    def _element_spans(self):
        doc = self.effective()
        spans = {}
        cursor = 0

        def walk(el):
            nonlocal cursor
            start = cursor
            for child in el.children:
                if isinstance(child, str):
                    cursor += len(child)
                else:
                    walk(child)
            if el.elem_id:
                spans[el.elem_id.lower()] = (el, (start, cursor))

        walk(doc.root)
        return doc, spans, cursor

    def _group(self, group_type: str, group_id: str, extra=None) -> str:
        doc = self.effective()
        for el in doc.root.iter_elements():
            if el.tag == "linkGrp" and el.elem_type == group_type:
                if el.elem_id:
                    return el.elem_id
        attrs = {"type": group_type, "id": group_id, "targorder": "y"}
        attrs.update(extra or {})
        self.graph.add_element(self.active_view, MarkElement("linkGrp", attrs))
        return group_id

    def _check_forest(self):
        forest_from_document(self.effective())


# ----------------------------------------------------------------------
# Edit handlers


def _edit_mark_unit_boundary(session: Session, edit: dict) -> EditResult:
    offset = int(edit["offset"])
    doc, spans, text_len = session._element_spans()
    if not (0 < offset <= text_len):
        raise VeintexError(f"boundary offset {offset} outside text [1, {text_len}]")
    start = 0
    for el, (s, e) in spans.values():
        if el.is_unit() and e <= offset:
            start = max(start, e)
        if el.tag in ("seg", "rs") and s < offset < e:
            raise VeintexError(
                f"offset {offset} falls inside <{el.tag} id={el.elem_id}>")
    if start >= offset:
        raise VeintexError(f"boundary at {offset} would create an empty unit")
    unit_id = session._fresh_id("u")
    session.graph.add_element(
        session.active_view,
        MarkElement("seg", {"type": "unit", "id": unit_id}),
        Anchor.char_range(start, offset))
    return EditResult(0, created=[unit_id],
                      summary=f"unit {unit_id} over [{start}, {offset})")


def _edit_mark_rs(session: Session, edit: dict) -> EditResult:
    start, end = int(edit["start"]), int(edit["end"])
    rs_id = session._fresh_id("p")
    attrs = {"id": rs_id}
    if edit.get("type"):
        attrs["type"] = edit["type"]
    session.graph.add_element(session.active_view, MarkElement("rs", attrs),
                              Anchor.char_range(start, end))
    return EditResult(0, created=[rs_id], summary=f"rs {rs_id} over [{start}, {end})")


def _edit_mark_name(session: Session, edit: dict) -> EditResult:
    start, end = int(edit["start"]), int(edit["end"])
    name_id = session._fresh_id("n")
    attrs = {"id": name_id, "key": edit.get("key", "")}
    if edit.get("type"):
        attrs["type"] = edit["type"]
    session.graph.add_element(session.active_view, MarkElement("name", attrs),
                              Anchor.char_range(start, end))
    return EditResult(0, created=[name_id], summary=f"name {name_id}")


def _require_rs(session: Session, rs_id: str):
    el = session.effective().find_by_id(rs_id)
    if el is None or el.tag != "rs":
        raise VeintexError(f"{rs_id!r} is not a reference string")


def _edit_link_coref(session: Session, edit: dict) -> EditResult:
    source, target = edit["source"], edit["target"]
    _require_rs(session, source)
    _require_rs(session, target)
    group = session._group("coref", "corefgrp")
    link_id = session._fresh_id("k")
    session.graph.add_element(
        session.active_view,
        MarkElement("link", {"id": link_id, "targets": f"{source} {target}"}),
        Anchor.by_id(group))
    return EditResult(0, created=[link_id],
                      summary=f"coref {source} -> {target}")


def _edit_link_bridge(session: Session, edit: dict) -> EditResult:
    source, target = edit["source"], edit["target"]
    _require_rs(session, source)
    _require_rs(session, target)
    group = session._group("bridge", "bridgegrp")
    link_id = session._fresh_id("k")
    attrs = {"id": link_id, "targets": f"{source} {target}"}
    if edit.get("name"):
        attrs["name"] = edit["name"]
    session.graph.add_element(session.active_view, MarkElement("link", attrs),
                              Anchor.by_id(group))
    return EditResult(0, created=[link_id],
                      summary=f"bridge {source} -> {target}")


def _edit_create_relation(session: Session, edit: dict) -> EditResult:
    target_a, target_b = edit["targetA"], edit["targetB"]
    nuclei = edit.get("nuclei") or []
    if not nuclei:
        raise VeintexError("createRelation needs at least one nucleus")
    group = session._group("relation", "relgrp", {"nucorder": "y"})
    link_id = session._fresh_id("l")
    attrs = {"id": link_id, "targets": f"{target_a} {target_b}",
             "nuclei": " ".join(nuclei)}
    if edit.get("name"):
        attrs["subtype"] = edit["name"]
    session.graph.add_element(session.active_view, MarkElement("link", attrs),
                              Anchor.by_id(group))
    session._check_forest()
    return EditResult(0, created=[link_id],
                      summary=f"relation {link_id} over {target_a}, {target_b}")


def _edit_delete_element(session: Session, edit: dict) -> EditResult:
    node_id = edit["id"]
    session.graph.delete_element(session.active_view, node_id)
    return EditResult(0, deleted=[node_id], summary=f"deleted {node_id}")


def _edit_set_attribute(session: Session, edit: dict) -> EditResult:
    node_id = edit["id"]
    session.graph.set_attribute(session.active_view, node_id,
                                edit["name"], edit.get("value"))
    return EditResult(0, modified=[node_id],
                      summary=f"{node_id}@{edit['name']}")


def _edit_adjoin(session: Session, edit: dict) -> EditResult:
    sibling_root = edit["siblingRootId"].lower()
    forest = forest_from_document(session.effective())
    roots = {t.root.key.lower(): t for t in forest}
    if sibling_root not in roots:
        raise TreeError(f"{edit['siblingRootId']!r} is not an island root")
    parent_link = edit.get("parentLinkId")
    child_index = edit.get("childIndex")
    if parent_link is not None:
        target_tree = next((t for t in forest
                            if t.find(parent_link) is not None), None)
        if target_tree is None:
            raise TreeError(f"no relation node {parent_link!r}")
        node = target_tree.find(parent_link)
        existing = node.children[int(child_index)]
        existing_key = existing.key
    else:
        existing_key = edit["existingRootId"].lower()
        if existing_key not in roots:
            raise TreeError(f"{edit['existingRootId']!r} is not an island root")
    link_id = session._fresh_id("l")
    group = session._group("relation", "relgrp", {"nucorder": "y"})
    nuclei = []
    if edit.get("existingChildNuclear", True):
        nuclei.append(existing_key)
    if edit.get("newSiblingNuclear", False):
        nuclei.append(sibling_root)
    if not nuclei:
        raise TreeError("adjoin with neither child nuclear")
    attrs = {"id": link_id, "targets": f"{existing_key} {sibling_root}",
             "nuclei": " ".join(nuclei)}
    if edit.get("relationName"):
        attrs["subtype"] = edit["relationName"]
    session.graph.add_element(session.active_view, MarkElement("link", attrs),
                              Anchor.by_id(group))
    if parent_link is not None:
        link_el = session.effective().find_by_id(parent_link)
        new_targets = [link_id if t.lower() == existing_key else t
                       for t in split_targets(link_el.attrs["targets"])]
        session.graph.set_attribute(session.active_view, parent_link,
                                    "targets", " ".join(new_targets))
    session._check_forest()
    return EditResult(0, created=[link_id], modified=[parent_link] if parent_link else [],
                      summary=f"adjoined {sibling_root} via {link_id}")


def _edit_substitute(session: Session, edit: dict) -> EditResult:
    site, partial_root = edit["siteLeaf"], edit["partialRoot"].lower()
    doc = session.effective()
    site_el = doc.find_by_id(site)
    if site_el is None or not (site_el.tag == "seg" and site_el.elem_type == "open"):
        raise SiteNotOpen(f"{site!r} is not an open placeholder")
    host_link = None
    for el in doc.root.iter_elements():
        if el.tag == "link" and site.lower() in [
                t.lower() for t in split_targets(el.attrs.get("targets", ""))]:
            host_link = el
            break
    if host_link is None:
        raise TreeError(f"no relation link targets {site!r}")
    new_targets = [partial_root if t.lower() == site.lower() else t
                   for t in split_targets(host_link.attrs["targets"])]
    session.graph.set_attribute(session.active_view, host_link.elem_id,
                                "targets", " ".join(new_targets))
    nuclei = split_targets(host_link.attrs.get("nuclei", ""))
    if any(n.lower() == site.lower() for n in nuclei):
        new_nuclei = [partial_root if n.lower() == site.lower() else n
                      for n in nuclei]
        session.graph.set_attribute(session.active_view, host_link.elem_id,
                                    "nuclei", " ".join(new_nuclei))
    session.graph.delete_element(session.active_view, site)
    session._check_forest()
    return EditResult(0, modified=[host_link.elem_id], deleted=[site],
                      summary=f"substituted {partial_root} at {site}")


_EDIT_HANDLERS = {
    "markUnitBoundary": _edit_mark_unit_boundary,
    "markRS": _edit_mark_rs,
    "markName": _edit_mark_name,
    "linkCoref": _edit_link_coref,
    "linkBridge": _edit_link_bridge,
    "createRelation": _edit_create_relation,
    "deleteElement": _edit_delete_element,
    "setAttribute": _edit_set_attribute,
    "adjoin": _edit_adjoin,
    "substitute": _edit_substitute,
}


# ----------------------------------------------------------------------
# Session construction and analysis payloads


def open_session(hub: str, views: list[dict] | None = None,
                 plain_text: bool | None = None,
                 session_id: str = "session", hub_id: str = "hub") -> Session:
    """Open a session from VXD text or plain text, plus optional views.

    Each view is a mapping with ``view``, ``parents`` and ``payload``
    (VXD text).  A working view is created over the graph's leaves and
    becomes the session's editable surface.
    """
    if plain_text is None:
        plain_text = not hub.lstrip().startswith("<")
    if plain_text:
        root = MarkElement("body", {}, [MarkElement("p", {}, [hub])])
        hub_doc = MarkDocument.from_root(root, source_name="plain-text")
    else:
        hub_doc = parse_document(hub, source_name="hub")
    graph = ViewGraph.from_hub(hub_doc, hub_id)
    for manifest in views or []:
        view_id = manifest["view"]
        parents = manifest.get("parents") or [hub_id]
        graph.add_view(view_id, parents)
        payload_text = manifest.get("payload")
        if payload_text:
            apply_payload(graph, view_id,
                          parse_document(payload_text, f"{view_id} payload"))
    graph.add_view(WORK_VIEW, graph.leaves())
    return Session(session_id, graph, WORK_VIEW)


def _report_payload(report) -> dict:
    return {
        "mode": report.mode,
        "total": report.total,
        "average": f"{float(report.average):.2f}",
        "transitions": [
            {"from": t.from_unit, "to": t.to_unit,
             "cb": t.cb, "kind": t.kind.value, "score": t.score}
            for t in report.transitions
        ],
    }


def get_analysis(session: Session, kind: str) -> dict:
    """Compute a fresh analysis payload; never mutates session state."""
    doc = session.graph.compose_effective(session.active_view)
    if kind == "veins":
        forest = forest_from_document(doc)
        if not forest:
            raise PrerequisiteMissing("no discourse units yet")
        trees = []
        for tree in forest:
            annotation = annotate(tree)
            trees.append({
                "root": tree.root.key,
                "unitCount": tree.unit_count,
                "partial": len(forest) > 1,
                "heads": {k: v.format() for k, v in annotation.heads.items()},
                "veins": {k: v.format() for k, v in annotation.veins.items()},
                "domains": annotation.domains,
            })
        return {"kind": "veins", "partial": len(forest) > 1, "trees": trees}

    analysis = analyze_document(doc, session.session_id)
    if kind == "centering":
        if not analysis.rs_to_unit:
            raise PrerequisiteMissing("centering needs reference strings")
        if analysis.ct is None:
            raise PrerequisiteMissing("centering needs at least two units")
        return {"kind": "centering", "report": _report_payload(analysis.ct),
                "cf": {u: list(c.centers) for u, c in analysis.cf.items()}}
    if kind == "comparison":
        missing = []
        if not analysis.unit_ids:
            missing.append("discourse units")
        if not analysis.rs_to_unit:
            missing.append("reference strings")
        if not analysis.complete_tree:
            missing.append("a complete discourse tree")
        if analysis.ct is None and not missing:
            missing.append("at least two units")
        if missing or analysis.vt is None:
            raise PrerequisiteMissing("comparison needs " + ", ".join(missing))
        return {
            "kind": "comparison",
            "transitions": analysis.row.transitions,
            "ctTotal": analysis.row.ct_total,
            "ctAverage": analysis.row.ct_average,
            "vtTotal": analysis.row.vt_total,
            "vtAverage": analysis.row.vt_average,
            "references": analysis.ref_counts,
            "ct": _report_payload(analysis.ct),
            "vt": _report_payload(analysis.vt),
        }
    raise VeintexError(f"unknown analysis kind {kind!r}")
