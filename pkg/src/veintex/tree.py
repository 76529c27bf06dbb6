"""Binary discourse structure trees encoded by relation links.

A tree has discourse units at the leaves and binary relation nodes
internally; every relation node marks at least one child as nuclear.
Trees are immutable values: substitute and adjoin return new trees.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BadEdge,
    Diagnostic,
    EmptyNuclei,
    MultipleRoots,
    NoRoot,
    NonBinaryLink,
    NonContiguousSpan,
    SiteNotOpen,
    SpanMismatch,
    TargetReuse,
)
from .markup import MarkDocument, MarkElement, link_groups, split_targets, units_in_document


@dataclass(frozen=True)
class UnitRef:
    """A discourse unit leaf; open placeholders cover a position range."""

    id: str
    position: int
    text: str = ""
    open_span: tuple[int, int] | None = None

    @property
    def span(self) -> tuple[int, int]:
        return self.open_span or (self.position, self.position)

    @property
    def is_open(self) -> bool:
        return self.open_span is not None


@dataclass(frozen=True)
class RelationLink:
    link_id: str
    targets: tuple[str, str]
    nuclei: frozenset[str]
    name: str | None = None


@dataclass(frozen=True)
class TreeNode:
    unit: UnitRef | None = None
    link_id: str | None = None
    relation: str | None = None
    children: tuple["TreeNode", ...] = ()
    nuclear: tuple[bool, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.unit is not None

    @property
    def span(self) -> tuple[int, int]:
        if self.unit is not None:
            return self.unit.span
        return (self.children[0].span[0], self.children[-1].span[1])

    @property
    def key(self) -> str:
        return self.unit.id if self.unit is not None else self.link_id

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def nodes(self):
        yield self
        for child in self.children:
            yield from child.nodes()

    def signature(self):
        """Shape signature: identical for isomorphic trees (link ids ignored)."""
        if self.is_leaf:
            return ("open", self.span) if self.unit.is_open else self.unit.position
        return (self.relation, self.nuclear,
                tuple(c.signature() for c in self.children))


@dataclass(frozen=True)
class DiscourseTree:
    root: TreeNode
    unit_count: int

    def leaves(self) -> list[TreeNode]:
        return list(self.root.leaves())

    def units(self) -> list[UnitRef]:
        return [leaf.unit for leaf in self.root.leaves()]

    def find(self, node_id: str) -> TreeNode | None:
        wanted = node_id.lower()
        for node in self.root.nodes():
            if node.key.lower() == wanted:
                return node
        return None


def _leaf(unit: UnitRef) -> TreeNode:
    return TreeNode(unit=unit)


def _relation(link: RelationLink, left: TreeNode, right: TreeNode,
              left_nuclear: bool, right_nuclear: bool) -> TreeNode:
    return TreeNode(link_id=link.link_id, relation=link.name,
                    children=(left, right),
                    nuclear=(left_nuclear, right_nuclear))


def build_forest(units: list[UnitRef], links: list[RelationLink]) -> list[DiscourseTree]:
    """Assemble the (possibly partial) forest described by relation links.

    Roots are links referenced by no other link; units attached to no
    link become singleton trees.  Raises on structural defects: reused
    targets, non-binary links, empty nuclei, gaps or overlaps in the
    text span covered by a node, cycles among links.
    """
    unit_by_id = {u.id.lower(): u for u in units}
    link_by_id: dict[str, RelationLink] = {}
    for link in links:
        key = link.link_id.lower()
        if key in link_by_id:
            raise TargetReuse(f"relation link id {link.link_id!r} used twice")
        if key in unit_by_id:
            raise TargetReuse(f"id {link.link_id!r} is both a unit and a link")
        link_by_id[key] = link

    referenced: dict[str, str] = {}
    for link in links:
        if len(link.targets) != 2:
            raise NonBinaryLink(
                f"link {link.link_id!r} has {len(link.targets)} targets")
        if not link.nuclei:
            raise EmptyNuclei(f"link {link.link_id!r} marks no nucleus")
        lowered_targets = {t.lower() for t in link.targets}
        for nucleus in link.nuclei:
            if nucleus.lower() not in lowered_targets:
                raise EmptyNuclei(
                    f"link {link.link_id!r}: nucleus {nucleus!r} is not a target")
        for target in link.targets:
            key = target.lower()
            if key not in unit_by_id and key not in link_by_id:
                raise NoRoot(f"link {link.link_id!r} targets unknown id {target!r}")
            if key in referenced:
                raise TargetReuse(
                    f"{target!r} is targeted by both {referenced[key]!r} "
                    f"and {link.link_id!r}")
            referenced[key] = link.link_id

    building: set[str] = set()

    def build(key: str) -> TreeNode:
        if key in unit_by_id:
            return _leaf(unit_by_id[key])
        link = link_by_id[key]
        if key in building:
            raise NoRoot(f"cycle through link {link.link_id!r}")
        building.add(key)
        children = [build(t.lower()) for t in link.targets]
        building.discard(key)
        nuclei = {n.lower() for n in link.nuclei}
        flagged = sorted(zip(children, [t.lower() in nuclei for t in link.targets]),
                         key=lambda cn: cn[0].span[0])
        (left, ln), (right, rn) = flagged
        if left.span[1] + 1 != right.span[0]:
            raise NonContiguousSpan(
                f"link {link.link_id!r} joins spans {left.span} and {right.span}")
        return _relation(link, left, right, ln, rn)

    root_links = [l for l in links if l.link_id.lower() not in referenced]
    trees = []
    seen_links: set[str] = set()
    for link in root_links:
        node = build(link.link_id.lower())
        seen_links.update(n.link_id.lower() for n in node.nodes() if not n.is_leaf)
        trees.append(node)
    if len(seen_links) != len(link_by_id):
        leftover = sorted(set(link_by_id) - seen_links)
        raise NoRoot(f"links {leftover} form a cycle")
    for unit in units:
        if unit.id.lower() not in referenced:
            trees.append(_leaf(unit))
    trees.sort(key=lambda n: n.span[0])
    return [DiscourseTree(node, sum(1 for l in node.leaves() if not l.unit.is_open))
            for node in trees]


def build_tree(units: list[UnitRef], links: list[RelationLink]) -> DiscourseTree:
    """Like build_forest, but requires a single tree covering every unit."""
    if not units:
        raise NoRoot("no discourse units")
    forest = build_forest(units, links)
    if len(forest) > 1:
        roots = [t.root.key for t in forest]
        raise MultipleRoots(f"forest with roots {roots}, expected one tree")
    return forest[0]


def validate_tree(tree: DiscourseTree) -> list[Diagnostic]:
    """Structural diagnostics; empty iff the tree invariants hold."""
    diags: list[Diagnostic] = []
    seen_units: set[str] = set()
    seen_links: set[str] = set()

    def visit(node: TreeNode):
        if node.is_leaf:
            key = node.unit.id.lower()
            if key in seen_units:
                diags.append(Diagnostic("TargetReuse",
                                        f"unit {node.unit.id!r} appears twice",
                                        element_id=node.unit.id))
            seen_units.add(key)
            return
        key = node.link_id.lower()
        if key in seen_links:
            diags.append(Diagnostic("TargetReuse",
                                    f"link {node.link_id!r} appears twice",
                                    element_id=node.link_id))
        seen_links.add(key)
        if len(node.children) != 2:
            diags.append(Diagnostic("NonBinaryLink",
                                    f"node {node.link_id!r} has "
                                    f"{len(node.children)} children",
                                    element_id=node.link_id))
        if not any(node.nuclear):
            diags.append(Diagnostic("EmptyNuclei",
                                    f"node {node.link_id!r} marks no nucleus",
                                    element_id=node.link_id))
        if len(node.children) == 2:
            left, right = node.children
            if left.span[1] + 1 != right.span[0]:
                diags.append(Diagnostic(
                    "NonContiguousSpan",
                    f"node {node.link_id!r} joins {left.span} and {right.span}",
                    element_id=node.link_id))
        for child in node.children:
            visit(child)

    visit(tree.root)
    closed = sum(1 for leaf in tree.root.leaves() if not leaf.unit.is_open)
    if closed != tree.unit_count:
        diags.append(Diagnostic("UnitCount",
                                f"tree claims {tree.unit_count} units, "
                                f"found {closed}"))
    return diags


def _rebuild_with(node: TreeNode, target: TreeNode, replacement: TreeNode) -> TreeNode:
    if node is target:
        return replacement
    if node.is_leaf:
        return node
    children = tuple(_rebuild_with(c, target, replacement) for c in node.children)
    if children == node.children:
        return node
    return TreeNode(link_id=node.link_id, relation=node.relation,
                    children=children, nuclear=node.nuclear)


def substitute(tree: DiscourseTree, site_leaf: str, partial: DiscourseTree) -> DiscourseTree:
    """Replace an open placeholder leaf with a partial tree.

    The partial must cover exactly the position span the placeholder
    reserved.  Inputs are never mutated.
    """
    site = tree.find(site_leaf)
    if site is None:
        raise BadEdge(f"no node {site_leaf!r} in tree")
    if not site.is_leaf or not site.unit.is_open:
        raise SiteNotOpen(f"{site_leaf!r} is not an open placeholder leaf")
    if partial.root.span != site.unit.span:
        raise SpanMismatch(
            f"partial covers {partial.root.span}, site reserves {site.unit.span}")
    root = _rebuild_with(tree.root, site, partial.root)
    return DiscourseTree(root, sum(1 for l in root.leaves() if not l.unit.is_open))


def adjoin(tree: DiscourseTree, edge: tuple[str, int] | None, relation_name: str | None,
           new_sibling: DiscourseTree, new_sibling_nuclear: bool,
           existing_child_nuclear: bool, new_link_id: str | None = None) -> DiscourseTree:
    """Insert a fresh relation node on an edge (None adjoins above the root).

    The new sibling's span must be adjacent in text order to the
    subtree sitting at the edge; children are ordered by text position.
    """
    if not (new_sibling_nuclear or existing_child_nuclear):
        raise EmptyNuclei("adjoin with neither child nuclear")
    if edge is None:
        existing = tree.root
    else:
        parent_id, child_index = edge
        parent = tree.find(parent_id)
        if parent is None or parent.is_leaf:
            raise BadEdge(f"no relation node {parent_id!r} in tree")
        if child_index not in (0, 1):
            raise BadEdge(f"child index {child_index} out of range")
        existing = parent.children[child_index]

    sib = new_sibling.root
    if sib.span[1] + 1 == existing.span[0]:
        left, right = sib, existing
        flags = (new_sibling_nuclear, existing_child_nuclear)
    elif existing.span[1] + 1 == sib.span[0]:
        left, right = existing, sib
        flags = (existing_child_nuclear, new_sibling_nuclear)
    else:
        raise SpanMismatch(
            f"sibling span {sib.span} not adjacent to {existing.span}")

    if new_link_id is None:
        new_link_id = _fresh_link_id(tree, new_sibling)
    node = TreeNode(link_id=new_link_id, relation=relation_name,
                    children=(left, right), nuclear=flags)
    root = _rebuild_with(tree.root, existing, node)
    return DiscourseTree(root, sum(1 for l in root.leaves() if not l.unit.is_open))


def _fresh_link_id(*trees: DiscourseTree) -> str:
    highest = 0
    for tree in trees:
        for node in tree.root.nodes():
            if node.link_id and node.link_id[0].lower() == "l":
                suffix = node.link_id[1:]
                if suffix.isdigit():
                    highest = max(highest, int(suffix))
    return f"l{highest + 1}"


def extract_links(tree: DiscourseTree) -> list[RelationLink]:
    """Inverse of build_tree: the relation links describing this tree."""
    links: list[RelationLink] = []

    def visit(node: TreeNode):
        if node.is_leaf:
            return
        for child in node.children:
            visit(child)
        targets = tuple(c.key for c in node.children)
        nuclei = frozenset(c.key for c, n in zip(node.children, node.nuclear) if n)
        links.append(RelationLink(node.link_id, targets, nuclei, node.relation))

    visit(tree.root)
    return links


def to_link_group(tree: DiscourseTree) -> MarkElement:
    """Serialize a tree back to its linkGrp[type=relation] form."""
    children: list[MarkElement | str] = []
    for link in extract_links(tree):
        attrs = {"id": link.link_id,
                 "targets": " ".join(link.targets),
                 "nuclei": " ".join(sorted(link.nuclei,
                                           key=list(link.targets).index))}
        if link.name:
            attrs["subtype"] = link.name
        children.append(MarkElement("link", attrs))
    return MarkElement("linkGrp", {"type": "relation", "targorder": "y"}, children)


# ----------------------------------------------------------------------
# Extraction from documents


def units_from_document(doc: MarkDocument) -> list[UnitRef]:
    units = []
    for position, el in enumerate(units_in_document(doc), start=1):
        if el.elem_type == "open":
            units.append(UnitRef(el.elem_id.lower(), position,
                                 el.text_content(), (position, position)))
        else:
            units.append(UnitRef(el.elem_id.lower(), position, el.text_content()))
    return units


def relation_links_from_document(doc: MarkDocument) -> list[RelationLink]:
    links = []
    for group in link_groups(doc, "relation"):
        for el in group.child_elements():
            if el.tag != "link":
                continue
            targets = tuple(t.lower() for t in split_targets(el.attrs.get("targets", "")))
            nuclei = frozenset(n.lower() for n in split_targets(el.attrs.get("nuclei", "")))
            links.append(RelationLink(
                (el.elem_id or "").lower(), targets, nuclei,
                el.attrs.get("subtype")))
    return links


def tree_from_document(doc: MarkDocument) -> DiscourseTree:
    return build_tree(units_from_document(doc), relation_links_from_document(doc))


def forest_from_document(doc: MarkDocument) -> list[DiscourseTree]:
    return build_forest(units_from_document(doc), relation_links_from_document(doc))
