"""Persistence for view graphs: VXV manifests plus VXD payloads.

A manifest is a small line-oriented text file::

    view: rs-view
    parents: bd
    payload: rs-view.vxd

The payload is a VXD document holding the view's local state:

* ``<linkGrp type="edits">`` carries tombstones
  (``<link type="tombstone" targets="ID"/>``) and patches
  (``<link type="patch" targets="ID" subtype="NAME" key="VALUE"/>``;
  a patch without ``key`` deletes the attribute);
* a ``<p>`` without an ``anchor`` attribute wraps segmental additions;
* ``<linkGrp type="additions">`` wraps bare link additions;
* any other direct child of ``<body>`` carrying an ``anchor`` attribute
  is a whole-element addition.

``anchor="12 40"`` is a hub character range, ``anchor="u3"`` attaches
inside the element with that id, and no anchor attaches to the root.
"""

from __future__ import annotations

from pathlib import Path

from .errors import CycleDetected, MalformedInput, UnknownParent
from .markup import MarkDocument, MarkElement, parse_document, serialize_document
from .views import Anchor, View, ViewGraph


def parse_manifest(text: str, source_name: str = "<manifest>") -> dict:
    fields = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise MalformedInput(f"{source_name}:{lineno}: expected 'field: value'")
        name, _, value = line.partition(":")
        fields[name.strip().lower()] = value.strip()
    if "view" not in fields:
        raise MalformedInput(f"{source_name}: manifest missing 'view:' field")
    return {
        "view": fields["view"],
        "parents": fields.get("parents", "").split(),
        "payload": fields.get("payload", ""),
    }


def render_manifest(view_id: str, parents: list[str], payload_name: str) -> str:
    return (f"view: {view_id}\n"
            f"parents: {' '.join(parents)}\n"
            f"payload: {payload_name}\n")


def load_view_graph(hub_path: str | Path, manifest_paths: list[str | Path],
                    hub_id: str | None = None) -> ViewGraph:
    """Build a graph from a hub document and view manifests on disk."""
    hub_path = Path(hub_path)
    hub_doc = parse_document(hub_path.read_bytes(), source_name=str(hub_path))
    graph = ViewGraph.from_hub(hub_doc, hub_id or hub_path.stem)

    manifests = []
    for path in manifest_paths:
        path = Path(path)
        manifest = parse_manifest(path.read_text("utf-8"), str(path))
        manifest["dir"] = path.parent
        manifests.append(manifest)

    pending = {m["view"]: m for m in manifests}
    if len(pending) != len(manifests):
        names = [m["view"] for m in manifests]
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise MalformedInput(f"duplicate view manifests for {dupes}")

    resolved = {graph.hub_id}
    while pending:
        progressed = False
        for view_id in list(pending):
            manifest = pending[view_id]
            unknown = [p for p in manifest["parents"]
                       if p not in resolved and p not in pending]
            if unknown:
                raise UnknownParent(
                    f"view {view_id!r} names unknown parent(s) {unknown}")
            if all(p in resolved for p in manifest["parents"]):
                graph.add_view(view_id, manifest["parents"] or [graph.hub_id])
                if manifest["payload"]:
                    payload_path = manifest["dir"] / manifest["payload"]
                    payload = parse_document(payload_path.read_bytes(),
                                             source_name=str(payload_path))
                    apply_payload(graph, view_id, payload)
                resolved.add(view_id)
                del pending[view_id]
                progressed = True
        if not progressed:
            raise CycleDetected(sorted(pending))
    graph.check_acyclic()
    return graph


def apply_payload(graph: ViewGraph, view_id: str, payload: MarkDocument):
    tombstones, patches, additions = _read_payload(payload)
    for node_id in tombstones:
        graph.delete_element(view_id, node_id)
    for element, anchor in additions:
        graph.add_element(view_id, element, anchor)
    for node_id, name, value in patches:
        graph.set_attribute(view_id, node_id, name, value)


def _read_payload(payload: MarkDocument):
    tombstones: list[str] = []
    patches: list[tuple[str, str, str | None]] = []
    additions: list[tuple[MarkElement, Anchor]] = []

    def read_addition(el: MarkElement):
        attrs = dict(el.attrs)
        anchor = Anchor.from_attr(attrs.pop("anchor", None))
        shell = MarkElement(el.tag, attrs,
                            [c if isinstance(c, str) else c.copy()
                             for c in el.children])
        additions.append((shell, anchor))

    for child in payload.root.child_elements():
        if child.tag == "linkGrp" and child.elem_type == "edits":
            for entry in child.child_elements():
                kind = entry.elem_type
                target = entry.attrs.get("targets", "")
                if kind == "tombstone":
                    tombstones.append(target)
                elif kind == "patch":
                    patches.append((target, entry.attrs.get("subtype", ""),
                                    entry.attrs.get("key")))
                else:
                    raise MalformedInput(
                        f"unexpected entry type {kind!r} in edits group")
            continue
        if child.tag == "linkGrp" and child.elem_type == "additions":
            for entry in child.child_elements():
                read_addition(entry)
            continue
        if child.tag == "p" and "anchor" not in child.attrs:
            for entry in child.child_elements():
                read_addition(entry)
            continue
        if "anchor" in child.attrs or child.tag == "linkGrp":
            read_addition(child)
            continue
        raise MalformedInput(
            f"payload entry <{child.tag}> carries no anchor")
    return tombstones, patches, additions


def save_view(graph: ViewGraph, view_id: str, directory: str | Path,
              basename: str | None = None) -> tuple[Path, Path]:
    """Write one view as a VXV manifest plus VXD payload; returns both paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    basename = basename or view_id
    view = graph.views[view_id]
    payload_doc = render_payload(view)
    payload_path = directory / f"{basename}.vxd"
    manifest_path = directory / f"{basename}.vxv"
    payload_path.write_bytes(serialize_document(payload_doc))
    manifest_path.write_text(
        render_manifest(view_id, view.parents, payload_path.name), "utf-8")
    return manifest_path, payload_path


def render_payload(view: View) -> MarkDocument:
    body = MarkElement("body")
    edits = MarkElement("linkGrp", {"type": "edits"})
    for key in sorted(view.tombstones | view.replaced):
        edits.children.append(
            MarkElement("link", {"type": "tombstone", "targets": key}))
    for patch in view.patches:
        attrs = {"type": "patch", "targets": patch.target, "subtype": patch.name}
        if patch.value is not None:
            attrs["key"] = patch.value
        edits.children.append(MarkElement("link", attrs))
    if edits.children:
        body.children.append(edits)

    segmental = MarkElement("p")
    bare_links = MarkElement("linkGrp", {"type": "additions"})
    whole: list[MarkElement] = []
    for addition in view.additions:
        el = addition.element.copy()
        anchor_value = addition.anchor.attr_value()
        if anchor_value is not None:
            el.attrs["anchor"] = anchor_value
        if el.tag in ("seg", "rs", "name"):
            segmental.children.append(el)
        elif el.tag == "link":
            bare_links.children.append(el)
        else:
            whole.append(el)
    if segmental.children:
        body.children.append(segmental)
    if bare_links.children:
        body.children.append(bare_links)
    body.children.extend(whole)
    return MarkDocument.from_root(body.copy(), source_name=f"{view.view_id} payload")
