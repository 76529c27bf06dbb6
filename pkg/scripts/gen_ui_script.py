#!/usr/bin/env python3
"""Emit the scripted Goriot reconstruction used by the frontend tests.

The script lists, in order: unit boundaries (character offsets), rs and
name spans, coref/bridge pairs (as indices into the rs list), and the
relation links bottom-up (targets reference units by id or earlier
relations by index).  Ids are never baked in: the frontend resolves
them from the edit responses.
"""

import json
from pathlib import Path

from veintex.markup import parse_document, split_targets

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "test" / "fixtures" / "goriot-script.json"


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
    doc = parse_document((ROOT / "tests" / "fixtures" / "goriot.vxd").read_bytes())
    spans = element_spans(doc.root)

    units = [el for el in doc.root.iter_elements() if el.is_unit()]
    boundaries = [spans[id(el)][1] for el in units]
    unit_ids = [el.elem_id.lower() for el in units]

    rs_elements = [el for el in doc.root.iter_elements() if el.tag == "rs"]
    rs_index = {el.elem_id.lower(): i for i, el in enumerate(rs_elements)}
    rs = [{"start": spans[id(el)][0], "end": spans[id(el)][1],
           "type": el.attrs.get("type", "")} for el in rs_elements]

    names = [{"start": spans[id(el)][0], "end": spans[id(el)][1],
              "key": el.attrs.get("key", ""), "type": el.attrs.get("type", "")}
             for el in doc.root.iter_elements() if el.tag == "name"]

    corefs, bridges = [], []
    for group in doc.root.iter_elements():
        if group.tag != "linkGrp":
            continue
        for link in group.child_elements():
            targets = split_targets(link.attrs.get("targets", ""))
            if group.elem_type.startswith("coref"):
                corefs.append([rs_index[targets[0].lower()],
                               rs_index[targets[1].lower()]])
            elif group.elem_type == "bridge":
                bridges.append({"source": rs_index[targets[0].lower()],
                                "target": rs_index[targets[1].lower()],
                                "name": link.attrs.get("name", "")})

    relations = []
    link_index = {}

    def ref(token):
        token = token.lower()
        if token in link_index:
            return {"link": link_index[token]}
        return {"unit": unit_ids.index(token) + 1}

    for group in doc.root.iter_elements():
        if group.tag == "linkGrp" and group.elem_type == "relation":
            for link in group.child_elements():
                targets = split_targets(link.attrs["targets"])
                nuclei = split_targets(link.attrs.get("nuclei", ""))
                relations.append({"a": ref(targets[0]), "b": ref(targets[1]),
                                  "nuclei": [ref(n) for n in nuclei]})
                link_index[link.elem_id.lower()] = len(relations) - 1

    script = {
        "text": doc.text(),
        "boundaries": boundaries,
        "rs": rs,
        "names": names,
        "corefs": corefs,
        "bridges": bridges,
        "relations": relations,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(script, ensure_ascii=False, indent=1) + "\n", "utf-8")
    print(f"wrote {OUT}: {len(boundaries)} units, {len(rs)} rs, "
          f"{len(corefs)} corefs, {len(relations)} relations")


if __name__ == "__main__":
    main()
