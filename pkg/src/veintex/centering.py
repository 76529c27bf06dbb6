"""Forward/backward centers, transition scoring, and CT/VT smoothness reports.

Center identity is coreference-chain membership: chains are the
connected components of the coref links (bridge links never merge
chains).  Transition kinds carry the fixed score table
{continuation: 4, retaining: 3, smooth-shift: 2, abrupt-shift: 1,
no-cb: 0}; a report averages the summed scores over unit count minus
one transitions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import TooFewUnits, VeintexError
from .markup import MarkDocument, link_groups, split_targets, units_in_document
from .veins import ReferenceLink


# ----------------------------------------------------------------------
# Coreference chains


@dataclass
class Chains:
    chain_of: dict[str, str]
    members: dict[str, list[str]] = field(default_factory=dict)

    def chains_in(self, rs_ids) -> list[str]:
        seen = []
        for rs_id in rs_ids:
            chain = self.chain_of[rs_id.lower()]
            if chain not in seen:
                seen.append(chain)
        return seen


def build_chains(coref_pairs, rs_order: list[str]) -> Chains:
    """Union-find closure of coref links; unlinked rs form singletons.

    The chain id is its first member in text order.
    """
    order = {rs.lower(): i for i, rs in enumerate(rs_order)}
    parent: dict[str, str] = {rs.lower(): rs.lower() for rs in rs_order}

    def ensure(rs_id: str) -> str:
        key = rs_id.lower()
        if key not in parent:
            parent[key] = key
            order[key] = len(order)
        return key

    def find(key: str) -> str:
        while parent[key] != key:
            parent[key] = parent[parent[key]]
            key = parent[key]
        return key

    for source, target in coref_pairs:
        a, b = find(ensure(source)), find(ensure(target))
        if a != b:
            # keep the earlier mention as the representative
            if order[a] <= order[b]:
                parent[b] = a
            else:
                parent[a] = b

    chain_of: dict[str, str] = {}
    members: dict[str, list[str]] = {}
    for key in sorted(parent, key=order.get):
        root = find(key)
        chain_of[key] = root
        members.setdefault(root, []).append(key)
    return Chains(chain_of, members)


# ----------------------------------------------------------------------
# Cf lists and Cb


@dataclass(frozen=True)
class CfList:
    unit_id: str
    centers: tuple[str, ...]

    @property
    def cp(self) -> str | None:
        return self.centers[0] if self.centers else None


def derive_cf(unit_id: str, rs_in_unit: list[str], chains: Chains) -> CfList:
    """Forward-looking centers: the unit's chains in first-mention order."""
    return CfList(unit_id.lower(), tuple(chains.chains_in(rs_in_unit)))


def compute_cb(prev_cf: CfList | None, current_chains) -> str | None:
    """First center of the previous Cf list realized in the current unit."""
    if prev_cf is None:
        return None
    realized = {c.lower() for c in current_chains}
    for center in prev_cf.centers:
        if center in realized:
            return center
    return None


# ----------------------------------------------------------------------
# Transitions


class Transition(enum.Enum):
    CONTINUATION = "continuation"
    RETAINING = "retaining"
    SMOOTH_SHIFT = "smooth-shift"
    ABRUPT_SHIFT = "abrupt-shift"
    NO_CB = "no-cb"


TRANSITION_SCORES = {
    Transition.CONTINUATION: 4,
    Transition.RETAINING: 3,
    Transition.SMOOTH_SHIFT: 2,
    Transition.ABRUPT_SHIFT: 1,
    Transition.NO_CB: 0,
}


def classify_transition(prev_cb: str | None, cb: str | None,
                        cp: str | None) -> Transition:
    if cb is None:
        return Transition.NO_CB
    if cb == cp and (prev_cb is None or cb == prev_cb):
        return Transition.CONTINUATION
    if cb == prev_cb and cb != cp:
        return Transition.RETAINING
    if cb != prev_cb and cb == cp:
        return Transition.SMOOTH_SHIFT
    return Transition.ABRUPT_SHIFT


@dataclass(frozen=True)
class TransitionRecord:
    from_unit: str | None
    to_unit: str
    cb: str | None
    kind: Transition
    score: int


@dataclass(frozen=True)
class SmoothnessReport:
    mode: str  # "CT" | "VT"
    unit_count: int
    transitions: tuple[TransitionRecord, ...]
    cb_map: dict[str, str | None]

    @property
    def total(self) -> int:
        return sum(t.score for t in self.transitions)

    @property
    def transition_count(self) -> int:
        return len(self.transitions)

    @property
    def average(self) -> Fraction:
        return Fraction(self.total, self.transition_count)


def _weights(overrides):
    if overrides is None:
        return TRANSITION_SCORES
    weights = dict(TRANSITION_SCORES)
    for kind, value in overrides.items():
        if value < 0 or int(value) != value:
            raise VeintexError(f"score for {kind} must be a non-negative integer")
        weights[kind] = int(value)
    return weights


def ct_score(units: list[str], cf_lists: dict[str, CfList],
             chains_per_unit: dict[str, set], weights=None) -> SmoothnessReport:
    """Classical centering: each unit scored against its sequential predecessor."""
    if len(units) < 2:
        raise TooFewUnits(f"{len(units)} unit(s); need at least 2")
    scores = _weights(weights)
    units = [u.lower() for u in units]
    cb_map: dict[str, str | None] = {units[0]: None}
    records = []
    for prev, unit in zip(units, units[1:]):
        cb = compute_cb(cf_lists[prev], chains_per_unit[unit])
        cb_map[unit] = cb
        kind = classify_transition(cb_map[prev], cb, cf_lists[unit].cp)
        records.append(TransitionRecord(prev, unit, cb, kind, scores[kind]))
    return SmoothnessReport("CT", len(units), tuple(records), cb_map)


def vt_predecessor(unit: str, domains: dict[str, list[str]]) -> str | None:
    """Nearest unit before this one in its accessibility domain."""
    domain = domains[unit.lower()]
    index = domain.index(unit.lower())
    return domain[index - 1] if index > 0 else None


def vt_score(units: list[str], cf_lists: dict[str, CfList],
             chains_per_unit: dict[str, set], domains: dict[str, list[str]],
             weights=None) -> SmoothnessReport:
    """Veins-based centering: the context unit is the accessibility-domain
    predecessor instead of the sequential one; still n-1 transitions."""
    if len(units) < 2:
        raise TooFewUnits(f"{len(units)} unit(s); need at least 2")
    scores = _weights(weights)
    units = [u.lower() for u in units]
    cb_map: dict[str, str | None] = {}
    records = []
    for index, unit in enumerate(units):
        context = vt_predecessor(unit, domains)
        cb = (compute_cb(cf_lists[context], chains_per_unit[unit])
              if context is not None else None)
        cb_map[unit] = cb
        if index == 0:
            continue
        prev_cb = cb_map[context] if context is not None else None
        kind = classify_transition(prev_cb, cb, cf_lists[unit].cp)
        records.append(TransitionRecord(context, unit, cb, kind, scores[kind]))
    return SmoothnessReport("VT", len(units), tuple(records), cb_map)


# ----------------------------------------------------------------------
# Comparison report (per document and aggregated)


TABLE_HEADERS = (
    "Source",
    "No. of transitions",
    "CT Score",
    "Average CT score per transition",
    "VT score",
    "Average VT score per transition",
)


@dataclass(frozen=True)
class ReportRow:
    source: str
    transitions: int
    ct_total: int
    vt_total: int

    @property
    def ct_average(self) -> str:
        return f"{self.ct_total / self.transitions:.2f}"

    @property
    def vt_average(self) -> str:
        return f"{self.vt_total / self.transitions:.2f}"

    def cells(self) -> tuple[str, ...]:
        return (self.source, str(self.transitions), str(self.ct_total),
                self.ct_average, str(self.vt_total), self.vt_average)


def comparison_row(source: str, transitions: int, ct_total: int,
                   vt_total: int) -> ReportRow:
    return ReportRow(source, transitions, ct_total, vt_total)


def comparison_report(ct: SmoothnessReport, vt: SmoothnessReport,
                      source: str = "") -> ReportRow:
    if ct.transition_count != vt.transition_count:
        raise VeintexError("CT and VT reports cover different transition counts")
    return comparison_row(source, ct.transition_count, ct.total, vt.total)


def aggregate_rows(rows: list[ReportRow], label: str = "Total") -> ReportRow:
    """Sum counts and totals, recompute averages (never average averages)."""
    return comparison_row(label,
                          sum(r.transitions for r in rows),
                          sum(r.ct_total for r in rows),
                          sum(r.vt_total for r in rows))


# ----------------------------------------------------------------------
# Extraction from documents


def rs_units_map(doc: MarkDocument):
    """Map each rs to its containing unit; also return all rs in text order."""
    rs_to_unit: dict[str, str] = {}
    rs_order: list[str] = []
    for el in doc.root.iter_elements():
        if el.tag == "rs" and el.elem_id:
            rs_order.append(el.elem_id.lower())
    for unit in units_in_document(doc):
        unit_id = (unit.elem_id or "").lower()
        for el in unit.iter_elements():
            if el.tag == "rs" and el.elem_id:
                rs_to_unit[el.elem_id.lower()] = unit_id
    return rs_to_unit, rs_order


def rs_by_unit(doc: MarkDocument) -> dict[str, list[str]]:
    """rs ids inside each unit, in text order."""
    result: dict[str, list[str]] = {}
    for unit in units_in_document(doc):
        unit_id = (unit.elem_id or "").lower()
        result[unit_id] = [el.elem_id.lower() for el in unit.iter_elements()
                           if el.tag == "rs" and el.elem_id]
    return result


def coref_links_from_document(doc: MarkDocument):
    """Reference links grouped into (coref, bridge) lists."""
    coref: list[ReferenceLink] = []
    bridge: list[ReferenceLink] = []
    for group in link_groups(doc, "coref"):
        for el in group.child_elements():
            targets = split_targets(el.attrs.get("targets", ""))
            if len(targets) == 2:
                coref.append(ReferenceLink(targets[0].lower(), targets[1].lower(),
                                           "coref", el.attrs.get("name")))
    for group in link_groups(doc, "bridge"):
        for el in group.child_elements():
            targets = split_targets(el.attrs.get("targets", ""))
            if len(targets) == 2:
                bridge.append(ReferenceLink(targets[0].lower(), targets[1].lower(),
                                            "bridge", el.attrs.get("name")))
    return coref, bridge
