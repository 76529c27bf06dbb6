"""Parse, validate, and serialize the VXD annotation vocabulary.

VXD is a well-formed XML-like format over a closed vocabulary of eight
tags (body, div, p, seg, rs, name, link, linkGrp).  Tags, attribute
names, and identifiers are matched case-insensitively; canonical output
uses the lowercase vocabulary spelling.  Two SGML habits found in
legacy material are tolerated on input: open-form ``<link ...>`` without
a closing tag, and ``;;`` end-of-line comments inside linkGrp content
(discarded with a warning).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import Diagnostic, DuplicateId, MalformedInput, UnknownTag

CANONICAL_TAGS = ("body", "div", "p", "seg", "rs", "name", "link", "linkGrp")
_TAG_BY_LOWER = {t.lower(): t for t in CANONICAL_TAGS}

# Fixed leading attribute order for deterministic serialization.
_ATTR_RANK = {"type": 0, "id": 1, "subtype": 2, "targets": 3, "nuclei": 4, "key": 5}

ID_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9._\-]*\Z")

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9._\-]*")
_ENTITY_RE = re.compile(r"&(#x[0-9A-Fa-f]+|#[0-9]+|[A-Za-z]+);")
_NAMED_ENTITIES = {"lt": "<", "gt": ">", "amp": "&", "quot": '"', "apos": "'"}


def valid_id(value: str) -> bool:
    return bool(ID_PATTERN.match(value))


def split_targets(value: str) -> list[str]:
    return value.split()


@dataclass
class MarkElement:
    """One element of the vocabulary; children mix elements and text spans."""

    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list["MarkElement | str"] = field(default_factory=list)

    def __post_init__(self):
        low = self.tag.lower()
        if low not in _TAG_BY_LOWER:
            raise UnknownTag(f"unknown tag <{self.tag}>")
        self.tag = _TAG_BY_LOWER[low]
        self.attrs = {k.lower(): v for k, v in self.attrs.items()}
        self.children = _merge_text(self.children)

    @property
    def elem_id(self) -> str | None:
        return self.attrs.get("id")

    @property
    def elem_type(self) -> str:
        return self.attrs.get("type", "").lower()

    def is_unit(self) -> bool:
        return self.tag == "seg" and self.elem_type == "unit"

    def is_text_bearing(self) -> bool:
        """True when text content inside this element is significant."""
        if self.tag in ("p", "rs", "name"):
            return True
        return self.tag == "seg" and self.elem_type in ("unit", "open")

    def text_content(self) -> str:
        parts = []
        for child in self.children:
            if isinstance(child, str):
                parts.append(child)
            else:
                parts.append(child.text_content())
        return "".join(parts)

    def child_elements(self) -> list["MarkElement"]:
        return [c for c in self.children if isinstance(c, MarkElement)]

    def iter_elements(self):
        """Yield self and every descendant element in document order."""
        yield self
        for child in self.children:
            if isinstance(child, MarkElement):
                yield from child.iter_elements()

    def iter_with_parents(self, _parent=None):
        yield self, _parent
        for child in self.children:
            if isinstance(child, MarkElement):
                yield from child.iter_with_parents(self)

    def copy(self) -> "MarkElement":
        kids: list[MarkElement | str] = []
        for child in self.children:
            kids.append(child if isinstance(child, str) else child.copy())
        return MarkElement(self.tag, dict(self.attrs), kids)


def _merge_text(children):
    merged: list[MarkElement | str] = []
    for child in children:
        if isinstance(child, str):
            if not child:
                continue
            if merged and isinstance(merged[-1], str):
                merged[-1] = merged[-1] + child
                continue
        merged.append(child)
    return merged


# Content model.  Structural elements hold only child elements (plus
# insignificant whitespace); text-bearing elements hold significant text.
_STRUCTURAL_CHILDREN = {
    "body": {"div", "p", "seg", "linkGrp"},
    "div": {"div", "p", "seg", "linkGrp"},
    "seg": {"seg", "p", "linkGrp"},  # structural seg (type != unit)
    "linkGrp": {"link"},
    "link": set(),
}
_TEXT_BEARING_CHILDREN = {
    "p": {"seg", "rs", "name"},  # seg children must be units
    "seg": {"rs", "name"},  # unit seg
    "rs": {"rs", "name"},
    "name": set(),
}


def child_allowed(parent: MarkElement, child: MarkElement) -> bool:
    if parent.is_text_bearing():
        allowed = _TEXT_BEARING_CHILDREN[parent.tag]
        if child.tag not in allowed:
            return False
        if parent.tag == "p" and child.tag == "seg":
            return child.is_text_bearing()
        return True
    allowed = _STRUCTURAL_CHILDREN.get(parent.tag, set())
    return child.tag in allowed


def text_allowed(parent: MarkElement) -> bool:
    return parent.is_text_bearing()


@dataclass
class MarkDocument:
    """A parsed element tree plus its identifier index.

    ``id_index`` maps case-folded ids to elements and iterates in
    document (text) order.  Documents are treated as immutable after
    construction; every editing layer copies before changing anything.
    """

    root: MarkElement
    id_index: dict[str, MarkElement] = field(default_factory=dict)
    source_name: str = "<memory>"
    warnings: list[Diagnostic] = field(default_factory=list)

    @classmethod
    def from_root(cls, root: MarkElement, source_name: str = "<memory>",
                  warnings: list[Diagnostic] | None = None) -> "MarkDocument":
        index: dict[str, MarkElement] = {}
        for el in root.iter_elements():
            eid = el.elem_id
            if eid is None:
                continue
            key = eid.lower()
            if key in index:
                raise DuplicateId(
                    f"duplicate id {eid!r} in {source_name} "
                    f"(already used by <{index[key].tag}>)")
            index[key] = el
        return cls(root, index, source_name, warnings or [])

    def find_by_id(self, node_id: str) -> MarkElement | None:
        return self.id_index.get(node_id.lower())

    def text(self) -> str:
        return self.root.text_content()


def find_by_id(doc: MarkDocument, node_id: str) -> MarkElement | None:
    """Return the element with the given id (case-insensitive), if any."""
    return doc.find_by_id(node_id)


# ----------------------------------------------------------------------
# Parsing


class _Lexer:
    def __init__(self, text: str, source_name: str):
        self.text = text
        self.pos = 0
        self.source_name = source_name

    def location(self, pos=None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message: str, pos=None):
        line, col = self.location(pos)
        return MalformedInput(f"{self.source_name}:{line}:{col}: {message}")

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def next_token(self):
        """Return ("open"|"close", name, attrs, selfclosed, pos) or ("text", str, pos)."""
        text = self.text
        start = self.pos
        if text[start] != "<":
            end = text.find("<", start)
            if end == -1:
                end = len(text)
            self.pos = end
            return ("text", self._unescape(text[start:end], start), start)
        if text.startswith("</", start):
            m = re.compile(r"</\s*([A-Za-z]+)\s*>").match(text, start)
            if not m:
                raise self.error("malformed closing tag", start)
            self.pos = m.end()
            return ("close", m.group(1), None, False, start)
        return self._open_tag(start)

    def _open_tag(self, start):
        text = self.text
        pos = start + 1
        m = _NAME_RE.match(text, pos)
        if not m:
            raise self.error("expected tag name after '<'", start)
        name = m.group(0)
        pos = m.end()
        attrs: dict[str, str] = {}
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                raise self.error(f"unclosed tag <{name}>", start)
            if text.startswith("/>", pos):
                self.pos = pos + 2
                return ("open", name, attrs, True, start)
            if text[pos] == ">":
                self.pos = pos + 1
                return ("open", name, attrs, False, start)
            m = _NAME_RE.match(text, pos)
            if not m:
                raise self.error(f"bad attribute in <{name}>", pos)
            attr_name = m.group(0).lower()
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text) or text[pos] != "=":
                raise self.error(f"attribute {attr_name!r} missing '='", pos)
            pos += 1
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text) or text[pos] not in "\"'":
                raise self.error(f"attribute {attr_name!r} value must be quoted", pos)
            quote = text[pos]
            end = text.find(quote, pos + 1)
            if end == -1:
                raise self.error(f"unterminated value for {attr_name!r}", pos)
            if attr_name in attrs:
                raise self.error(f"attribute {attr_name!r} repeated in <{name}>", pos)
            attrs[attr_name] = self._unescape(text[pos + 1:end], pos)
            pos = end + 1

    def _unescape(self, raw: str, at: int) -> str:
        if "&" not in raw:
            return raw
        out = []
        pos = 0
        while True:
            amp = raw.find("&", pos)
            if amp == -1:
                out.append(raw[pos:])
                break
            out.append(raw[pos:amp])
            m = _ENTITY_RE.match(raw, amp)
            if not m:
                raise self.error("bare '&' (use &amp;)", at)
            ref = m.group(1)
            if ref.startswith("#x") or ref.startswith("#X"):
                out.append(chr(int(ref[2:], 16)))
            elif ref.startswith("#"):
                out.append(chr(int(ref[1:])))
            else:
                char = _NAMED_ENTITIES.get(ref.lower())
                if char is None:
                    raise self.error(f"unknown entity &{ref};", at)
                out.append(char)
            pos = m.end()
        return "".join(out)


def parse_document(data: bytes | str, source_name: str = "<memory>") -> MarkDocument:
    """Parse VXD input into a MarkDocument rooted at <body>.

    Raises MalformedInput, UnknownTag, or DuplicateId.  Discarded ``;;``
    comments are reported in ``doc.warnings``.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"{source_name}: not valid UTF-8 ({exc})") from None
    else:
        text = data
    if text.startswith("﻿"):
        text = text[1:]

    lexer = _Lexer(text, source_name)
    warnings: list[Diagnostic] = []
    id_locations: dict[str, tuple[int, int]] = {}

    # Skip an optional leading XML declaration / processing instruction.
    stripped = text.lstrip()
    if stripped.startswith("<?"):
        end = text.find("?>")
        if end == -1:
            raise lexer.error("unterminated processing instruction")
        lexer.pos = end + 2

    root: MarkElement | None = None
    # Stack of (element, open_pos); a trailing pending void link may absorb
    # one explicit </link>.
    stack: list[MarkElement] = []
    pending_void: str | None = None

    def canonical(name: str, pos) -> str:
        tag = _TAG_BY_LOWER.get(name.lower())
        if tag is None:
            line, col = lexer.location(pos)
            raise UnknownTag(f"{source_name}:{line}:{col}: unknown tag <{name}>")
        return tag

    def register_ids(el: MarkElement, pos):
        eid = el.elem_id
        if eid is None:
            return
        if not valid_id(eid):
            raise lexer.error(f"invalid id {eid!r}", pos)
        key = eid.lower()
        if key in id_locations:
            line, col = lexer.location(pos)
            oline, ocol = id_locations[key]
            raise DuplicateId(
                f"{source_name}:{line}:{col}: duplicate id {eid!r} "
                f"(first used at line {oline}, column {ocol})")
        id_locations[key] = lexer.location(pos)

    def attach(parent: MarkElement, el: MarkElement, pos):
        if not child_allowed(parent, el):
            raise lexer.error(
                f"<{el.tag}> not allowed inside <{parent.tag}"
                + (f' type="{parent.elem_type}"' if parent.tag == "seg" else "")
                + ">", pos)
        parent.children.append(el)

    def attach_text(parent: MarkElement, value: str, pos):
        nonlocal warnings
        if text_allowed(parent):
            parent.children.append(value)
            return
        if parent.tag == "linkGrp":
            rest = _drop_comments(value, warnings, lexer, pos)
            if rest.strip():
                raise lexer.error("text content not allowed inside <linkGrp>", pos)
            return
        if value.strip():
            raise lexer.error(f"text content not allowed inside <{parent.tag}>", pos)

    while not lexer.at_end():
        token = lexer.next_token()
        if token[0] == "text":
            _, value, pos = token
            if not stack:
                if value.strip():
                    raise lexer.error("text outside the root element", pos)
                continue
            attach_text(stack[-1], value, pos)
            pending_void = None
            continue

        _, name, attrs, selfclosed, pos = token
        if token[0] == "close":
            tag = canonical(name, pos)
            if pending_void == tag == "link":
                pending_void = None
                continue
            if not stack:
                raise lexer.error(f"stray closing tag </{name}>", pos)
            if stack[-1].tag != tag:
                raise lexer.error(
                    f"closing tag </{name}> does not match open <{stack[-1].tag}>", pos)
            closed = stack.pop()
            closed.children = _merge_text(closed.children)
            pending_void = None
            if not stack:
                root = closed
                break
            continue

        tag = canonical(name, pos)
        el = MarkElement(tag, attrs)
        register_ids(el, pos)
        if not stack:
            if tag != "body":
                raise lexer.error(f"root element must be <body>, found <{tag}>", pos)
            if selfclosed:
                root = el
                break
            stack.append(el)
            continue
        attach(stack[-1], el, pos)
        if tag == "link" or selfclosed:
            pending_void = tag if tag == "link" and not selfclosed else None
        else:
            stack.append(el)
            pending_void = None

    if root is None:
        if stack:
            raise lexer.error(f"unclosed <{stack[0].tag}> at end of input")
        raise MalformedInput(f"{source_name}: no root element found")
    if lexer.text[lexer.pos:].strip():
        raise lexer.error("content after the root element")

    return MarkDocument.from_root(root, source_name, warnings)


def _drop_comments(value, warnings, lexer, pos):
    kept_lines = []
    for line in value.split("\n"):
        stripped = line.lstrip()
        if stripped.startswith(";;"):
            lno, col = lexer.location(pos)
            warnings.append(Diagnostic(
                code="CommentDiscarded",
                message=f"discarded comment {stripped!r}",
                line=lno, column=col))
            line = line[:len(line) - len(stripped)]
        kept_lines.append(line)
    return "\n".join(kept_lines)


# ----------------------------------------------------------------------
# Serialization


def _escape_text(value: str) -> str:
    return value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(value: str) -> str:
    return _escape_text(value).replace('"', "&quot;")


def _attr_string(el: MarkElement) -> str:
    items = sorted(el.attrs.items(),
                   key=lambda kv: (_ATTR_RANK.get(kv[0], 6), kv[0]))
    return "".join(f' {k}="{_escape_attr(v)}"' for k, v in items)


def _emit(el: MarkElement, indent: int, out: list[str]):
    attrs = _attr_string(el)
    if el.tag == "link":
        out.append(f"<{el.tag}{attrs}/>")
        return
    if el.is_text_bearing():
        out.append(f"<{el.tag}{attrs}>")
        for child in el.children:
            if isinstance(child, str):
                out.append(_escape_text(child))
            else:
                _emit(child, 0, out)
        out.append(f"</{el.tag}>")
        return
    children = el.child_elements()
    if not children:
        out.append(f"<{el.tag}{attrs}></{el.tag}>")
        return
    pad = " " * indent
    out.append(f"<{el.tag}{attrs}>\n")
    for child in children:
        out.append(pad + "  ")
        _emit(child, indent + 2, out)
        out.append("\n")
    out.append(f"{pad}</{el.tag}>")


def serialize_document(doc: MarkDocument) -> bytes:
    """Serialize deterministically; parse(serialize(d)) is equivalent to d.

    Attribute order is fixed (type, id, subtype, targets, nuclei, key,
    then the rest alphabetically); structural elements are indented two
    spaces per level; text-bearing elements are emitted inline with
    their text preserved byte for byte; <link> uses the empty-element
    form.
    """
    out: list[str] = []
    _emit(doc.root, 0, out)
    out.append("\n")
    return "".join(out).encode("utf-8")


# ----------------------------------------------------------------------
# Reference validation


_SEGMENTAL_TAGS = {"seg", "rs", "name", "p", "div"}


def validate_references(doc: MarkDocument) -> list[Diagnostic]:
    """Check that targets/nuclei resolve and relation links are binary.

    Returns an empty list when every targets/nuclei token resolves,
    every nuclei set is a subset of its link's targets, every link in a
    relation linkGrp has exactly two targets, and no segmental element
    carries targets.
    """
    diags: list[Diagnostic] = []
    for el, parent in doc.root.iter_with_parents():
        eid = el.elem_id
        targets = el.attrs.get("targets")
        if targets is not None and el.tag in _SEGMENTAL_TAGS:
            diags.append(Diagnostic(
                code="TargetsOnSegmental",
                message=f"segmental <{el.tag}> must not carry targets",
                element_id=eid, attribute="targets"))
        if el.tag != "link":
            continue
        target_ids = split_targets(targets or "")
        for token in target_ids:
            if doc.find_by_id(token) is None:
                diags.append(Diagnostic(
                    code="UnresolvedTarget",
                    message=f"target {token!r} does not resolve",
                    element_id=eid, attribute="targets", token=token))
        nuclei = split_targets(el.attrs.get("nuclei", ""))
        lowered = {t.lower() for t in target_ids}
        for token in nuclei:
            if doc.find_by_id(token) is None:
                diags.append(Diagnostic(
                    code="UnresolvedTarget",
                    message=f"nucleus {token!r} does not resolve",
                    element_id=eid, attribute="nuclei", token=token))
            if token.lower() not in lowered:
                diags.append(Diagnostic(
                    code="NucleusNotInTargets",
                    message=f"nucleus {token!r} is not among targets",
                    element_id=eid, attribute="nuclei", token=token))
        if parent is not None and parent.tag == "linkGrp" \
                and parent.elem_type == "relation" and len(target_ids) != 2:
            diags.append(Diagnostic(
                code="RelationLinkArity",
                message=f"relation link has {len(target_ids)} targets, expected 2",
                element_id=eid, attribute="targets"))
    return diags


# ----------------------------------------------------------------------
# Document helpers used by the analysis layers


def units_in_document(doc: MarkDocument) -> list[MarkElement]:
    """All unit segs (and open placeholders) in text order."""
    return [el for el in doc.root.iter_elements()
            if el.tag == "seg" and el.elem_type in ("unit", "open")]


def link_groups(doc: MarkDocument, kind: str | None = None) -> list[MarkElement]:
    """linkGrp elements, optionally filtered by the prefix of their type."""
    groups = [el for el in doc.root.iter_elements() if el.tag == "linkGrp"]
    if kind is None:
        return groups
    return [g for g in groups if g.elem_type.startswith(kind.lower())]


def document_order_ids(doc: MarkDocument) -> list[str]:
    return list(doc.id_index)
