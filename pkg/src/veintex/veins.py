"""Head and vein expressions over discourse trees, and the accessibility
domains and reference classification they induce.

The computation follows a fixed rule set over binary trees:

* head(leaf) is the unit itself; head(internal) is the position-ordered
  union of the heads of its nuclear children.
* vein(root) = head(root).
* A nuclear child inherits its parent's vein; if its sibling is a
  satellite to its left with head h, the marked form of h is merged in.
* A satellite left of its nucleus with head h gets seq(mark(h), v).
* A satellite right of its nucleus gets seq(h, simpl(v)), where simpl
  deletes marked items.

Marked items are visible to the unit that introduced them but are
pruned when veins propagate rightward; accessibility domains keep them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnmappedRS
from .tree import DiscourseTree, TreeNode


@dataclass(frozen=True, order=True)
class VeinItem:
    position: int
    unit_id: str
    marked: bool = False

    def format(self) -> str:
        return f"({self.unit_id})" if self.marked else self.unit_id


@dataclass(frozen=True)
class VeinExpr:
    """An ordered set of units; order is strictly increasing text position."""

    items: tuple[VeinItem, ...]

    def __post_init__(self):
        positions = [i.position for i in self.items]
        if positions != sorted(set(positions)):
            raise ValueError(f"vein items out of order or duplicated: {self.items}")

    @classmethod
    def of(cls, items) -> "VeinExpr":
        return cls(tuple(sorted(items)))

    def unit_ids(self) -> list[str]:
        return [i.unit_id for i in self.items]

    def positions(self) -> set[int]:
        return {i.position for i in self.items}

    def format(self) -> str:
        return " ".join(i.format() for i in self.items)

    @classmethod
    def parse(cls, text: str, positions: dict[str, int]) -> "VeinExpr":
        items = []
        for token in text.split():
            marked = token.startswith("(") and token.endswith(")")
            unit_id = token[1:-1] if marked else token
            unit_id = unit_id.lower()
            items.append(VeinItem(positions[unit_id], unit_id, marked))
        return cls.of(items)


def mark(expr: VeinExpr) -> VeinExpr:
    return VeinExpr.of(VeinItem(i.position, i.unit_id, True) for i in expr.items)


def simpl(expr: VeinExpr) -> VeinExpr:
    return VeinExpr.of(i for i in expr.items if not i.marked)


def seq(first: VeinExpr, second: VeinExpr) -> VeinExpr:
    """Merge in text order; on a duplicated unit the first operand's flag wins."""
    merged: dict[int, VeinItem] = {i.position: i for i in first.items}
    for item in second.items:
        merged.setdefault(item.position, item)
    return VeinExpr.of(merged.values())


def compute_heads(tree: DiscourseTree) -> dict[str, VeinExpr]:
    """Head expression for every node, keyed by unit id or link id."""
    heads: dict[str, VeinExpr] = {}

    def bottom_up(node: TreeNode) -> VeinExpr:
        if node.is_leaf:
            expr = VeinExpr.of([VeinItem(node.unit.position, node.unit.id)])
        else:
            child_exprs = [bottom_up(c) for c in node.children]
            expr = VeinExpr.of([])
            for child_expr, nuclear in zip(child_exprs, node.nuclear):
                if nuclear:
                    expr = seq(expr, child_expr)
        heads[node.key] = expr
        return expr

    bottom_up(tree.root)
    return heads


def compute_veins(tree: DiscourseTree, heads: dict[str, VeinExpr]) -> dict[str, VeinExpr]:
    """Vein expression for every node, assigned top-down from the root."""
    veins: dict[str, VeinExpr] = {tree.root.key: heads[tree.root.key]}

    def descend(node: TreeNode):
        if node.is_leaf:
            return
        vein = veins[node.key]
        left, right = node.children
        left_nuclear, right_nuclear = node.nuclear
        if left_nuclear:
            veins[left.key] = vein
        else:
            veins[left.key] = seq(mark(heads[left.key]), vein)
        if right_nuclear:
            if left_nuclear:
                veins[right.key] = vein
            else:
                veins[right.key] = seq(mark(heads[left.key]), vein)
        else:
            veins[right.key] = seq(heads[right.key], simpl(vein))
        descend(left)
        descend(right)

    descend(tree.root)
    return veins


def accessibility_domain(unit_id: str, veins: dict[str, VeinExpr]) -> list[str]:
    """Units of the vein at or before the unit itself, in text order."""
    expr = veins[unit_id.lower()]
    own = next(i for i in expr.items if i.unit_id == unit_id.lower())
    return [i.unit_id for i in expr.items if i.position <= own.position]


def accessibility_domains(tree: DiscourseTree,
                          veins: dict[str, VeinExpr]) -> dict[str, list[str]]:
    return {leaf.unit.id: accessibility_domain(leaf.unit.id, veins)
            for leaf in tree.root.leaves()}


@dataclass(frozen=True)
class VeinAnnotation:
    heads: dict[str, VeinExpr]
    veins: dict[str, VeinExpr]
    domains: dict[str, list[str]]


def annotate(tree: DiscourseTree) -> VeinAnnotation:
    heads = compute_heads(tree)
    veins = compute_veins(tree, heads)
    domains = accessibility_domains(tree, veins)
    _check_invariants(heads, veins, domains)
    return VeinAnnotation(heads, veins, domains)


def _check_invariants(heads, veins, domains):
    for key, head in heads.items():
        vein = veins[key]
        if not head.positions() <= vein.positions():
            raise AssertionError(f"head(n) not within vein(n) at {key!r}")
    for unit_id, domain in domains.items():
        if unit_id not in domain:
            raise AssertionError(f"{unit_id!r} missing from its own domain")


# ----------------------------------------------------------------------
# Reference classification


@dataclass(frozen=True)
class ReferenceLink:
    source: str
    target: str
    kind: str = "coref"  # or "bridge"
    name: str | None = None


@dataclass(frozen=True)
class ReferenceLabel:
    link: ReferenceLink
    source_unit: str
    target_unit: str
    label: str  # direct | indirect | inaccessible


def classify_references(ref_links: list[ReferenceLink],
                        rs_to_unit: dict[str, str],
                        chain_of: dict[str, str],
                        domains: dict[str, list[str]]):
    """Label every reference link as direct, indirect, or inaccessible.

    A link from unit s to unit t is direct when t lies in the domain of
    s; failing that it is indirect when some member of the target's
    chain, other than the source itself, is realized in a unit of the
    domain; otherwise inaccessible.
    """
    members: dict[str, list[str]] = {}
    for rs_id, chain in chain_of.items():
        members.setdefault(chain, []).append(rs_id)

    labels: list[ReferenceLabel] = []
    counts = {"direct": 0, "indirect": 0, "inaccessible": 0}
    for link in ref_links:
        source_rs = link.source.lower()
        target_rs = link.target.lower()
        for rs_id in (source_rs, target_rs):
            if rs_id not in rs_to_unit:
                raise UnmappedRS(f"reference string {rs_id!r} is in no unit")
        source_unit = rs_to_unit[source_rs]
        target_unit = rs_to_unit[target_rs]
        domain = set(domains[source_unit])
        if target_unit in domain:
            label = "direct"
        else:
            chain = chain_of.get(target_rs)
            chain_units = {rs_to_unit[m] for m in members.get(chain, [])
                           if m in rs_to_unit and m != source_rs}
            label = "indirect" if chain_units & domain else "inaccessible"
        counts[label] += 1
        labels.append(ReferenceLabel(link, source_unit, target_unit, label))
    return counts, labels
