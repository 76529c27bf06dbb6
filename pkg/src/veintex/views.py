"""Annotation views arranged in a DAG over a hub document.

Every view inherits the markup of its parents; composition unifies the
parents' layers over the shared hub, so common elements appear once.
Views reference the hub through anchors: segmental elements wrap a
character range of the hub text, relational elements attach to an
element id (or to the document root).  A view freezes its inherited
base the moment it is created; later edits to ancestors never reach it.
Local edits never reach ancestors.

Internally a view's effective document is a standoff state (hub +
inherited additions + attribute overrides + suppressed ids) that is
materialized into a concrete element tree on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import (
    CannotDeleteRoot,
    CycleDetected,
    DanglingPatch,
    DuplicateId,
    DuplicateViewId,
    InvalidAnchor,
    UnifyConflict,
    UnknownParent,
    VeintexError,
)
from .markup import MarkDocument, MarkElement, child_allowed, valid_id


@dataclass(frozen=True)
class Anchor:
    """Where an added element attaches: a hub character range for
    segmental markup, an element id (or the root) for relational markup."""

    kind: str  # "range" | "id" | "root"
    target: str | None = None
    start: int = 0
    end: int = 0

    @classmethod
    def char_range(cls, start: int, end: int) -> "Anchor":
        if not (0 <= start < end):
            raise InvalidAnchor(f"bad character range [{start}, {end})")
        return cls("range", start=start, end=end)

    @classmethod
    def by_id(cls, target: str) -> "Anchor":
        if not valid_id(target):
            raise InvalidAnchor(f"bad anchor id {target!r}")
        return cls("id", target=target)

    @classmethod
    def document_root(cls) -> "Anchor":
        return cls("root")

    def attr_value(self) -> str | None:
        if self.kind == "range":
            return f"{self.start} {self.end}"
        if self.kind == "id":
            return self.target
        return None

    @classmethod
    def from_attr(cls, value: str | None) -> "Anchor":
        if value is None:
            return cls.document_root()
        tokens = value.split()
        if len(tokens) == 2 and all(t.isdigit() for t in tokens):
            return cls.char_range(int(tokens[0]), int(tokens[1]))
        if len(tokens) == 1:
            return cls.by_id(tokens[0])
        raise InvalidAnchor(f"cannot read anchor {value!r}")


@dataclass(frozen=True)
class Addition:
    element: MarkElement
    anchor: Anchor
    prov: tuple[str, int]  # (view id, per-view sequence number)

    def ids(self) -> list[str]:
        return [el.elem_id.lower() for el in self.element.iter_elements()
                if el.elem_id]


@dataclass(frozen=True)
class Patch:
    target: str
    name: str
    value: str | None  # None deletes the attribute


@dataclass(frozen=True)
class _State:
    """A view's effective standoff content before materialization."""

    hub: MarkDocument
    additions: tuple[Addition, ...] = ()
    overrides: dict = field(default_factory=dict)  # id -> {attr: value|None}
    suppressed: frozenset = frozenset()


class View:
    def __init__(self, view_id: str, parents: list[str], base: _State):
        self.view_id = view_id
        self.parents = list(parents)
        self.additions: list[Addition] = []
        self.patches: list[Patch] = []
        self.tombstones: set[str] = set()
        self.replaced: set[str] = set()  # tombstoned ids later re-added
        self._base = base
        self._seq = 0

    def next_seq(self) -> int:
        self._seq += 1
        return self._seq

    @property
    def frozen_base(self) -> MarkDocument:
        """The inherited composition, frozen when the view was created."""
        return _materialize(self._base)

    def state(self) -> _State:
        overrides = {k: dict(v) for k, v in self._base.overrides.items()}
        for patch in self.patches:
            overrides.setdefault(patch.target.lower(), {})[patch.name] = patch.value
        return _State(
            self._base.hub,
            self._base.additions + tuple(self.additions),
            overrides,
            self._base.suppressed | self.tombstones | self.replaced,
        )

    def snapshot(self):
        return (list(self.additions), list(self.patches),
                set(self.tombstones), set(self.replaced), self._seq)

    def restore(self, snap):
        self.additions, self.patches, self.tombstones, self.replaced, self._seq = (
            list(snap[0]), list(snap[1]), set(snap[2]), set(snap[3]), snap[4])


class ViewGraph:
    """Single-writer DAG of views rooted at the hub."""

    def __init__(self, hub_doc: MarkDocument, hub_id: str = "hub"):
        self.hub_id = hub_id
        base = _State(hub_doc)
        self.views: dict[str, View] = {hub_id: View(hub_id, [], base)}

    @classmethod
    def from_hub(cls, hub_doc: MarkDocument, hub_id: str = "hub") -> "ViewGraph":
        return cls(hub_doc, hub_id)

    @property
    def hub(self) -> View:
        return self.views[self.hub_id]

    def leaves(self) -> list[str]:
        referenced = {p for v in self.views.values() for p in v.parents}
        return [vid for vid in self.views if vid not in referenced]

    # -- structure -------------------------------------------------

    def add_view(self, view_id: str, parents: list[str],
                 on_conflict: str = "error") -> View:
        """Create a view inheriting from parents; freezes their current
        composition as this view's base."""
        if view_id in self.views:
            raise DuplicateViewId(f"view {view_id!r} already exists")
        if not parents:
            raise UnknownParent("a new view needs at least one parent")
        for parent in parents:
            if parent == view_id:
                raise CycleDetected([view_id])
            if parent not in self.views:
                raise UnknownParent(f"unknown parent view {parent!r}")
        base = _unify([self.views[p].state() for p in parents], on_conflict)
        view = View(view_id, parents, base)
        self.views[view_id] = view
        return view

    def check_acyclic(self):
        """Verify parent edges form a DAG with every view reaching the hub."""
        colors: dict[str, int] = {}
        stack_path: list[str] = []

        def visit(vid: str):
            colors[vid] = 1
            stack_path.append(vid)
            for parent in self.views[vid].parents:
                if colors.get(parent) == 1:
                    cycle = stack_path[stack_path.index(parent):] + [parent]
                    raise CycleDetected(cycle)
                if colors.get(parent) != 2:
                    visit(parent)
            stack_path.pop()
            colors[vid] = 2

        for vid in self.views:
            if colors.get(vid) != 2:
                visit(vid)
        for vid, view in self.views.items():
            if vid == self.hub_id:
                continue
            seen = set()
            frontier = [vid]
            while frontier:
                current = frontier.pop()
                if current == self.hub_id:
                    break
                for parent in self.views[current].parents:
                    if parent not in seen:
                        seen.add(parent)
                        frontier.append(parent)
            else:
                raise CycleDetected([vid])  # hub unreachable

    # -- composition -------------------------------------------------

    def compose_effective(self, view_id: str) -> MarkDocument:
        """Materialize the view's effective document (pure read)."""
        view = self._view(view_id)
        doc = _materialize(view.state())
        doc.source_name = view_id
        return doc

    # -- edits -------------------------------------------------------

    def add_element(self, view_id: str, element: MarkElement,
                    anchor: Anchor | None = None):
        """Add an element visible to this view and its descendants only."""
        view = self._view(view_id)
        anchor = anchor or Anchor.document_root()
        element = element.copy()
        if anchor.kind == "range" and element.children:
            raise InvalidAnchor(
                "range-anchored additions are empty shells wrapping hub text")
        effective = self.compose_effective(view_id)
        snap = view.snapshot()
        try:
            new_ids = [el.elem_id for el in element.iter_elements() if el.elem_id]
            for node_id in new_ids:
                key = node_id.lower()
                if effective.find_by_id(node_id) is not None:
                    raise DuplicateId(
                        f"id {node_id!r} already present in view {view_id!r}")
                if key in view.tombstones:
                    view.tombstones.discard(key)
                    view.replaced.add(key)
            view.additions.append(
                Addition(element, anchor, (view_id, view.next_seq())))
            self.compose_effective(view_id)
        except Exception:
            view.restore(snap)
            raise

    def set_attribute(self, view_id: str, node_id: str, name: str,
                      value: str | None):
        """Patch an attribute in this view; ancestors never see it."""
        view = self._view(view_id)
        name = name.lower()
        if name == "id":
            raise VeintexError("the id attribute cannot be patched")
        effective = self.compose_effective(view_id)
        if effective.find_by_id(node_id) is None:
            raise DanglingPatch(f"no element {node_id!r} in view {view_id!r}")
        view.patches.append(Patch(node_id.lower(), name, value))

    def delete_element(self, view_id: str, node_id: str):
        """Remove (or unwrap, for segmental markup) an element locally."""
        view = self._view(view_id)
        effective = self.compose_effective(view_id)
        el = effective.find_by_id(node_id)
        if el is None:
            raise DanglingPatch(f"no element {node_id!r} in view {view_id!r}")
        if el.tag == "body":
            raise CannotDeleteRoot("the document root cannot be deleted")
        key = node_id.lower()
        snap = view.snapshot()
        try:
            if not self._drop_local_addition(view, key):
                view.tombstones.add(key)
                view.replaced.discard(key)
            self.compose_effective(view_id)
        except Exception:
            view.restore(snap)
            raise

    def _drop_local_addition(self, view: View, key: str) -> bool:
        for index, addition in enumerate(view.additions):
            if (addition.element.elem_id or "").lower() == key:
                del view.additions[index]
                return True
            if key in addition.ids():
                element = addition.element.copy()
                _suppress_in_tree(element, {key}, {})
                view.additions[index] = replace(addition, element=element)
                return True
        return False

    def _view(self, view_id: str) -> View:
        if view_id not in self.views:
            raise UnknownParent(f"unknown view {view_id!r}")
        return self.views[view_id]


# ----------------------------------------------------------------------
# Unification of parent states


def _unify(states: list[_State], on_conflict: str) -> _State:
    hub = states[0].hub
    for state in states[1:]:
        if state.hub is not hub:
            raise UnifyConflict("views belong to different hubs")

    additions: list[Addition] = []
    seen_prov: set[tuple[str, int]] = set()
    by_id: dict[str, Addition] = {}
    for state in states:
        for addition in state.additions:
            if addition.prov in seen_prov:
                continue
            clashing = next((by_id[i] for i in addition.ids() if i in by_id), None)
            if clashing is not None:
                if (clashing.element == addition.element
                        and clashing.anchor == addition.anchor):
                    continue  # same content contributed twice: keep one copy
                if on_conflict == "parent-precedence":
                    continue
                raise UnifyConflict(
                    f"parents disagree about element(s) {addition.ids()}")
            seen_prov.add(addition.prov)
            additions.append(addition)
            for node_id in addition.ids():
                by_id[node_id] = addition

    overrides: dict[str, dict[str, str | None]] = {}
    for state in states:
        for node_id, attrs in state.overrides.items():
            merged = overrides.setdefault(node_id, {})
            for name, value in attrs.items():
                if name in merged and merged[name] != value:
                    if on_conflict == "parent-precedence":
                        continue
                    raise UnifyConflict(
                        f"parents disagree about {node_id!r}@{name}: "
                        f"{merged[name]!r} vs {value!r}")
                merged.setdefault(name, value)

    suppressed = frozenset().union(*(s.suppressed for s in states))
    return _State(hub, tuple(additions), overrides, suppressed)


# ----------------------------------------------------------------------
# Materialization


def _materialize(state: _State) -> MarkDocument:
    hub_root = state.hub.root
    spans, text_len = _compute_spans(hub_root)
    hub_text = state.hub.text()

    range_adds: list[tuple[int, Addition]] = []
    other_adds: list[tuple[int, Addition]] = []
    for index, addition in enumerate(state.additions):
        anchor = addition.anchor
        if anchor.kind == "range":
            if anchor.end > text_len:
                raise InvalidAnchor(
                    f"range [{anchor.start}, {anchor.end}) exceeds hub text "
                    f"length {text_len}")
            range_adds.append((index, addition))
        else:
            other_adds.append((index, addition))

    ranks: dict[int, int] = {}

    def build(el: MarkElement) -> MarkElement:
        shell = MarkElement(el.tag, dict(el.attrs))
        ranks[id(shell)] = -1
        if el.is_text_bearing():
            return _assemble_host(el, spans, hub_text, range_adds, ranks)
        for child in el.child_elements():
            shell.children.append(build(child))
        return shell

    root = build(hub_root)

    hosted = {idx for idx, _ in _hosted_assignments(hub_root, spans, range_adds)}
    for index, addition in range_adds:
        if index not in hosted:
            raise InvalidAnchor(
                f"range [{addition.anchor.start}, {addition.anchor.end}) "
                "is not inside any text-bearing element")

    for index, addition in other_adds:
        _place_relational(root, addition, index, ranks)

    _apply_suppressions(root, state.suppressed, ranks)
    _apply_overrides(root, state.overrides, state.suppressed)
    return MarkDocument.from_root(root)


def _compute_spans(root: MarkElement):
    spans: dict[int, tuple[int, int]] = {}
    cursor = 0

    def walk(el: MarkElement):
        nonlocal cursor
        start = cursor
        for child in el.children:
            if isinstance(child, str):
                cursor += len(child)
            else:
                walk(child)
        spans[id(el)] = (start, cursor)

    walk(root)
    return spans, cursor


def _hosted_assignments(hub_root, spans, range_adds):
    """Pair each range addition with its text-bearing host element."""
    hosts = []

    def find_hosts(el: MarkElement):
        for child in el.child_elements():
            if child.is_text_bearing():
                hosts.append(child)
            else:
                find_hosts(child)

    find_hosts(hub_root)
    assignments = []
    for index, addition in range_adds:
        start, end = addition.anchor.start, addition.anchor.end
        for host in hosts:
            h0, h1 = spans[id(host)]
            if h0 <= start and end <= h1:
                assignments.append((index, host))
                break
            if start < h1 and end > h0:
                raise InvalidAnchor(
                    f"range [{start}, {end}) crosses the boundary of "
                    f"<{host.tag}> spanning [{h0}, {h1})")
    return assignments


def _assemble_host(host, spans, hub_text, range_adds, ranks):
    host_span = spans[id(host)]
    intervals = []
    order = 0
    for desc, parent in host.iter_with_parents():
        if desc is host:
            continue
        intervals.append((spans[id(desc)], (0, order), desc, -1))
        order += 1
    for index, addition in range_adds:
        start, end = addition.anchor.start, addition.anchor.end
        if host_span[0] <= start and end <= host_span[1]:
            intervals.append(((start, end), (1, index), addition.element, index))

    intervals.sort(key=lambda iv: (iv[0][0], -iv[0][1], iv[1]))

    shell = MarkElement(host.tag, dict(host.attrs))
    ranks[id(shell)] = -1
    stack: list[tuple[MarkElement, tuple[int, int]]] = [(shell, host_span)]
    cursor = host_span[0]

    def flush(upto: int):
        nonlocal cursor
        if upto > cursor:
            stack[-1][0].children.append(hub_text[cursor:upto])
            cursor = upto

    for (start, end), _, source, rank in intervals:
        while len(stack) > 1 and start >= stack[-1][1][1]:
            flush(stack[-1][1][1])
            stack.pop()
        top, top_span = stack[-1]
        if start < cursor or end > top_span[1]:
            raise InvalidAnchor(
                f"range [{start}, {end}) partially overlaps existing markup")
        node = MarkElement(source.tag, dict(source.attrs))
        ranks[id(node)] = rank
        if not child_allowed(top, node):
            raise InvalidAnchor(
                f"<{node.tag}> cannot be placed inside <{top.tag}>")
        flush(start)
        top.children.append(node)
        stack.append((node, (start, end)))

    while stack:
        flush(stack[-1][1][1])
        stack.pop()
    return shell


def _place_relational(root, addition, index, ranks):
    element = addition.element.copy()
    for el in element.iter_elements():
        ranks[id(el)] = index
    anchor = addition.anchor
    if anchor.kind == "root":
        target = root
    else:
        candidates = _find_all(root, anchor.target)
        if not candidates:
            raise InvalidAnchor(
                f"anchor id {anchor.target!r} does not resolve")
        target = max(candidates, key=lambda el: ranks.get(id(el), -1))
    if not child_allowed(target, element):
        raise InvalidAnchor(
            f"<{element.tag}> cannot be placed inside <{target.tag}>")
    target.children.append(element)


def _find_all(root: MarkElement, node_id: str) -> list[MarkElement]:
    wanted = node_id.lower()
    return [el for el in root.iter_elements()
            if el.elem_id and el.elem_id.lower() == wanted]


_RELATIONAL_TAGS = {"link", "linkGrp"}


def _apply_suppressions(root, suppressed, ranks):
    for key in suppressed:
        occurrences = _find_all(root, key)
        if not occurrences:
            raise DanglingPatch(f"tombstone names missing id {key!r}")
        if len(occurrences) > 1:
            # a replacing addition exists: keep the newest contribution
            keep = max(occurrences, key=lambda el: ranks.get(id(el), -1))
            occurrences = [el for el in occurrences if el is not keep]
        for el in occurrences:
            _suppress_in_tree(root, {key}, {id(el): el})


def _suppress_in_tree(node: MarkElement, keys: set[str], exact: dict):
    """Remove (relational) or unwrap (segmental) matching descendants."""

    def matches(el: MarkElement) -> bool:
        if exact:
            return id(el) in exact
        return bool(el.elem_id) and el.elem_id.lower() in keys

    changed = True
    while changed:
        changed = False
        new_children: list[MarkElement | str] = []
        for child in node.children:
            if isinstance(child, MarkElement) and matches(child):
                if child.tag in _RELATIONAL_TAGS:
                    pass  # dropped along with its contents
                else:
                    new_children.extend(child.children)
                changed = True
                continue
            new_children.append(child)
        node.children = new_children
    node.children = _merge_adjacent_text(node.children)
    for child in node.children:
        if isinstance(child, MarkElement):
            _suppress_in_tree(child, keys, exact)


def _merge_adjacent_text(children):
    merged: list[MarkElement | str] = []
    for child in children:
        if isinstance(child, str) and merged and isinstance(merged[-1], str):
            merged[-1] = merged[-1] + child
        else:
            merged.append(child)
    return merged


def _apply_overrides(root, overrides, suppressed):
    for node_id, attrs in overrides.items():
        occurrences = _find_all(root, node_id)
        if not occurrences:
            if node_id in suppressed:
                continue  # deleted by another parent: deletion wins
            raise DanglingPatch(f"patch names missing id {node_id!r}")
        for el in occurrences:
            for name, value in attrs.items():
                if value is None:
                    el.attrs.pop(name, None)
                else:
                    el.attrs[name] = value
