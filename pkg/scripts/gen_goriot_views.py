#!/usr/bin/env python3
"""Regenerate the split view-set fixture from the collapsed Goriot document.

Produces tests/fixtures/goriot-views/: a plain-text hub (bd.vxd) plus
manifest/payload pairs for u-view, rs-view, rl-view, and rel-view whose
composition reproduces the collapsed fixture's annotation layers.
"""

from pathlib import Path

from veintex.markup import MarkDocument, MarkElement, parse_document, serialize_document
from veintex.views import Anchor, ViewGraph
from veintex.viewio import save_view

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
OUT = FIXTURES / "goriot-views"


def element_spans(root):
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
        spans[id(el)] = (start, cursor)

    walk(root)
    return spans


def main():
    collapsed = parse_document((FIXTURES / "goriot.vxd").read_bytes())
    text = collapsed.text()
    spans = element_spans(collapsed.root)

    hub = MarkDocument.from_root(MarkElement("body", {}, [MarkElement("p", {}, [text])]))
    (OUT).mkdir(parents=True, exist_ok=True)
    (OUT / "bd.vxd").write_bytes(serialize_document(hub))

    graph = ViewGraph.from_hub(parse_document(serialize_document(hub)), "bd")

    graph.add_view("u-view", ["bd"])
    for el in collapsed.root.iter_elements():
        if el.tag == "seg" and el.elem_type == "unit":
            start, end = spans[id(el)]
            graph.add_element("u-view",
                              MarkElement("seg", {"type": "unit", "id": el.elem_id}),
                              Anchor.char_range(start, end))

    graph.add_view("rs-view", ["bd"])
    for el in collapsed.root.iter_elements():
        if el.tag in ("rs", "name"):
            start, end = spans[id(el)]
            graph.add_element("rs-view", MarkElement(el.tag, dict(el.attrs)),
                              Anchor.char_range(start, end))

    graph.add_view("rl-view", ["rs-view"])
    for group in collapsed.root.iter_elements():
        if group.tag == "linkGrp" and (
                group.elem_type.startswith("coref") or group.elem_type == "bridge"):
            graph.add_element("rl-view", group.copy())

    graph.add_view("rel-view", ["u-view"])
    for group in collapsed.root.iter_elements():
        if group.tag == "linkGrp" and group.elem_type == "relation":
            graph.add_element("rel-view", group.copy())

    for view_id in ("u-view", "rs-view", "rl-view", "rel-view"):
        save_view(graph, view_id, OUT)

    # sanity: composing all leaves reproduces the collapsed annotation layers
    graph.add_view("check", ["rel-view", "rl-view"])
    doc = graph.compose_effective("check")
    units = [e for e in doc.root.iter_elements()
             if e.tag == "seg" and e.elem_type == "unit"]
    rs = [e for e in doc.root.iter_elements() if e.tag == "rs"]
    links = [e for e in doc.root.iter_elements() if e.tag == "link"]
    assert len(units) == 10, len(units)
    assert len(rs) == 21, len(rs)
    assert len(links) == 24, len(links)
    assert doc.text() == text
    print(f"wrote {OUT} (units={len(units)}, rs={len(rs)}, links={len(links)})")


if __name__ == "__main__":
    main()
