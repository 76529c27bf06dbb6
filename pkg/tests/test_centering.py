from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from veintex.centering import (
    CfList,
    Transition,
    TRANSITION_SCORES,
    aggregate_rows,
    build_chains,
    classify_transition,
    comparison_report,
    comparison_row,
    compute_cb,
    coref_links_from_document,
    ct_score,
    derive_cf,
    rs_by_unit,
    rs_units_map,
    vt_predecessor,
    vt_score,
)
from veintex.errors import TooFewUnits
from veintex.tree import tree_from_document
from veintex.veins import annotate


# ----------------------------------------------------------------------
# Independent oracle for the Goriot report.  Chains, Cf lists, and the
# per-transition walk are spelled out literally from the fixture rather
# than recomputed through the engine; the expected totals below were
# frozen after evaluating it once by hand (CT total 14 = 4+4+4+2 over
# nine transitions, VT identical because every Goriot domain is a full
# prefix).

GORIOT_CHAINS = {
    "daughters": ["p66", "p67", "p69", "p70", "p80", "p81", "p82", "p83"],
    "goriot": ["p65", "p68", "p84"],
    "restaud": ["p72", "p77", "p78", "p79"],
    "nucingen": ["p74", "p75", "p76"],
    "p71": ["p71"], "p73": ["p73"], "p74a": ["p74a"],
}

GORIOT_CF = {
    "u1": ["goriot", "daughters"],
    "u2": ["daughters"],
    "u3": ["p71"],
    "u4": ["restaud"],
    "u5": ["p73"],
    "u6": ["nucingen", "p74a"],
    "u7": ["nucingen"],
    "u8": ["nucingen", "restaud"],
    "u9": ["restaud"],
    "u10": ["daughters", "goriot"],
}

SCORE = {"continuation": 4, "retaining": 3, "smooth": 2, "abrupt": 1, "none": 0}


def oracle_ct_total(cf):
    units = [f"u{i}" for i in range(1, 11)]
    total = 0
    prev_cb = None
    for prev, unit in zip(units, units[1:]):
        realized = set(cf[unit])
        cb = next((c for c in cf[prev] if c in realized), None)
        cp = cf[unit][0] if cf[unit] else None
        if cb is None:
            kind = "none"
        elif cb == cp and (prev_cb is None or cb == prev_cb):
            kind = "continuation"
        elif cb == prev_cb and cb != cp:
            kind = "retaining"
        elif cb != prev_cb and cb == cp:
            kind = "smooth"
        else:
            kind = "abrupt"
        total += SCORE[kind]
        prev_cb = cb
    return total


GORIOT_CT_TOTAL = 14  # frozen from oracle_ct_total(GORIOT_CF)
GORIOT_VT_TOTAL = 14  # domains are full prefixes, so VT walks the same pairs


def test_oracle_reproduces_frozen_total():
    assert oracle_ct_total(GORIOT_CF) == GORIOT_CT_TOTAL


# ----------------------------------------------------------------------
# build_chains


def test_goriot_chains(goriot):
    coref, bridge = coref_links_from_document(goriot)
    assert len(coref) == 14 and len(bridge) == 1
    _, rs_order = rs_units_map(goriot)
    chains = build_chains([(l.source, l.target) for l in coref], rs_order)
    sizes = sorted(len(m) for m in chains.members.values())
    assert sizes == [1, 1, 1, 3, 3, 4, 8]
    assert set(chains.members["p66"]) == set(GORIOT_CHAINS["daughters"])
    assert set(chains.members["p65"]) == set(GORIOT_CHAINS["goriot"])
    assert set(chains.members["p72"]) == set(GORIOT_CHAINS["restaud"])
    assert set(chains.members["p74"]) == set(GORIOT_CHAINS["nucingen"])


def test_no_links_singletons():
    chains = build_chains([], ["a", "b", "c"])
    assert chains.members == {"a": ["a"], "b": ["b"], "c": ["c"]}


def test_chain_transitivity():
    chains = build_chains([("b", "a"), ("c", "b")], ["a", "b", "c"])
    assert chains.chain_of == {"a": "a", "b": "a", "c": "a"}
    assert chains.members["a"] == ["a", "b", "c"]


# ----------------------------------------------------------------------
# derive_cf


def goriot_cf(goriot):
    _, rs_order = rs_units_map(goriot)
    coref, _ = coref_links_from_document(goriot)
    chains = build_chains([(l.source, l.target) for l in coref], rs_order)
    per_unit = rs_by_unit(goriot)
    return {u: derive_cf(u, rs, chains) for u, rs in per_unit.items()}, chains


def test_goriot_cf_u1_and_u10(goriot):
    cf, _ = goriot_cf(goriot)
    assert cf["u1"].centers == ("p65", "p66")  # Goriot chain, daughters chain
    assert cf["u10"].centers == ("p80" if False else "p66", "p65")
    assert cf["u10"].centers == ("p66", "p65")  # daughters first, then Goriot


def test_cf_empty_unit():
    chains = build_chains([], [])
    assert derive_cf("u1", [], chains).centers == ()


def test_cf_deduplicates_chain_mentions(goriot):
    cf, _ = goriot_cf(goriot)
    # u1 holds four rs but only two chains
    assert len(cf["u1"].centers) == 2


# ----------------------------------------------------------------------
# compute_cb


def test_compute_cb_first_realized():
    prev = CfList("u1", ("goriot", "daughters"))
    assert compute_cb(prev, {"daughters"}) == "daughters"
    assert compute_cb(CfList("u1", ()), {"x"}) is None
    assert compute_cb(CfList("u1", ("a", "b")), {"b", "a"}) == "a"


# ----------------------------------------------------------------------
# classify_transition and Table 2 scores


def test_table2_examples():
    assert classify_transition("A", "A", "A") is Transition.CONTINUATION
    assert TRANSITION_SCORES[Transition.CONTINUATION] == 4
    assert classify_transition("A", "A", "B") is Transition.RETAINING
    assert TRANSITION_SCORES[Transition.RETAINING] == 3
    assert classify_transition("A", "B", "B") is Transition.SMOOTH_SHIFT
    assert TRANSITION_SCORES[Transition.SMOOTH_SHIFT] == 2
    assert classify_transition("A", "B", "C") is Transition.ABRUPT_SHIFT
    assert TRANSITION_SCORES[Transition.ABRUPT_SHIFT] == 1
    assert classify_transition(None, None, "A") is Transition.NO_CB
    assert TRANSITION_SCORES[Transition.NO_CB] == 0


@settings(max_examples=250, derandomize=True, deadline=None)
@given(st.sampled_from([None, "A", "B", "C"]),
       st.sampled_from([None, "A", "B", "C"]),
       st.sampled_from([None, "A", "B", "C"]))
def test_transition_score_map_is_total(prev_cb, cb, cp):
    kind = classify_transition(prev_cb, cb, cp)
    score = TRANSITION_SCORES[kind]
    assert score in (0, 1, 2, 3, 4)
    if cb is None:
        assert kind is Transition.NO_CB and score == 0
    else:
        assert kind is not Transition.NO_CB
        if cb == cp and (prev_cb is None or prev_cb == cb):
            assert score == 4
        elif cb == prev_cb:
            assert score == 3
        elif cb == cp:
            assert score == 2
        else:
            assert score == 1


# ----------------------------------------------------------------------
# ct_score / vt_score on the Goriot fixture


def goriot_inputs(goriot):
    cf, chains = goriot_cf(goriot)
    per_unit = rs_by_unit(goriot)
    chains_per_unit = {u: set(chains.chains_in(rs)) for u, rs in per_unit.items()}
    units = [f"u{i}" for i in range(1, 11)]
    return units, cf, chains_per_unit


def test_goriot_ct_report(goriot):
    units, cf, chains_per_unit = goriot_inputs(goriot)
    report = ct_score(units, cf, chains_per_unit)
    assert report.transition_count == 9
    assert report.total == GORIOT_CT_TOTAL
    assert report.average == Fraction(14, 9)
    kinds = [t.kind for t in report.transitions]
    assert kinds == [
        Transition.CONTINUATION, Transition.NO_CB, Transition.NO_CB,
        Transition.NO_CB, Transition.NO_CB, Transition.CONTINUATION,
        Transition.CONTINUATION, Transition.SMOOTH_SHIFT, Transition.NO_CB,
    ]


def test_goriot_vt_equals_ct(goriot):
    units, cf, chains_per_unit = goriot_inputs(goriot)
    domains = annotate(tree_from_document(goriot)).domains
    ct = ct_score(units, cf, chains_per_unit)
    vt = vt_score(units, cf, chains_per_unit, domains)
    assert vt.transition_count == 9
    assert vt.total == GORIOT_VT_TOTAL
    assert vt.total >= ct.total
    assert [t.kind for t in vt.transitions] == [t.kind for t in ct.transitions]


def test_two_units_continuation():
    cf = {"u1": CfList("u1", ("a",)), "u2": CfList("u2", ("a",))}
    chains = {"u1": {"a"}, "u2": {"a"}}
    report = ct_score(["u1", "u2"], cf, chains)
    assert report.total == 4 and report.average == 4


def test_disjoint_chains_all_nocb():
    units = ["u1", "u2", "u3"]
    cf = {u: CfList(u, (u + "c",)) for u in units}
    chains = {u: {u + "c"} for u in units}
    report = ct_score(units, cf, chains)
    assert report.total == 0 and report.average == 0


def test_too_few_units():
    with pytest.raises(TooFewUnits):
        ct_score(["u1"], {}, {})
    with pytest.raises(TooFewUnits):
        vt_score(["u1"], {}, {}, {})


# ----------------------------------------------------------------------
# vt_predecessor


def test_vt_predecessor_demo4(demo4):
    domains = annotate(tree_from_document(demo4)).domains
    assert vt_predecessor("u4", domains) == "u3"
    assert vt_predecessor("u2", domains) == "u1"
    assert vt_predecessor("u1", domains) is None


def test_vt_demo4_chain_u1_u3_u4(demo4):
    # chain A realized in u1, u3, u4 only: VT and CT agree everywhere.
    domains = annotate(tree_from_document(demo4)).domains
    units = ["u1", "u2", "u3", "u4"]
    cf = {"u1": CfList("u1", ("a",)), "u2": CfList("u2", ()),
          "u3": CfList("u3", ("a",)), "u4": CfList("u4", ("a",))}
    chains = {"u1": {"a"}, "u2": set(), "u3": {"a"}, "u4": {"a"}}
    ct = ct_score(units, cf, chains)
    vt = vt_score(units, cf, chains, domains)
    assert ct.total == vt.total == 4
    assert vt.transitions[-1].from_unit == "u3"


def test_vt_long_distance_pop_scores_higher(demo4):
    # chain A in u1 and u4 only; CT loses it across u2/u3, VT does not
    # because domain(u4) = [u1, u3, u4] and u3 carries no centers, hmm
    # u3's cf is empty so the vt context for u4 is u3 as well; instead
    # give u3 a private chain so cb(u4 | u3) is still empty under CT.
    domains = {"u1": ["u1"], "u2": ["u1", "u2"], "u3": ["u1", "u3"],
               "u4": ["u1", "u4"]}
    units = ["u1", "u2", "u3", "u4"]
    cf = {"u1": CfList("u1", ("a",)), "u2": CfList("u2", ("b",)),
          "u3": CfList("u3", ("c",)), "u4": CfList("u4", ("a",))}
    chains = {"u1": {"a"}, "u2": {"b"}, "u3": {"c"}, "u4": {"a"}}
    ct = ct_score(units, cf, chains)
    vt = vt_score(units, cf, chains, domains)
    assert ct.total == 0
    assert vt.total == 4  # u4's context is u1 under VT
    assert vt.transitions[-1].from_unit == "u1"


# ----------------------------------------------------------------------
# comparison_report arithmetic (Table 1)


def test_table1_rows():
    french = comparison_row("French", 47, 109, 116)
    assert (french.ct_average, french.vt_average) == ("2.32", "2.47")
    romanian = comparison_row("Romanian", 65, 142, 152)
    assert (romanian.ct_average, romanian.vt_average) == ("2.18", "2.34")
    total = comparison_row("Total", 173, 327, 352)
    assert (total.ct_average, total.vt_average) == ("1.89", "2.03")


def test_aggregate_sums_counts_not_averages():
    rows = [comparison_row("a", 2, 8, 8), comparison_row("b", 8, 8, 16)]
    total = aggregate_rows(rows)
    assert (total.transitions, total.ct_total, total.vt_total) == (10, 16, 24)
    # 16/10, never mean(8/2, 8/8)
    assert total.ct_average == "1.60"
    assert total.vt_average == "2.40"


def test_table1_english_row_formula_not_tuned():
    english = comparison_row("English", 59, 76, 84)
    # documented discrepancy: the stated formula gives 1.29/1.42, not
    # the 1.25/1.38 printed in the source table
    assert (english.ct_average, english.vt_average) == ("1.29", "1.42")


def test_comparison_report_equal_reports(goriot):
    units, cf, chains_per_unit = goriot_inputs(goriot)
    domains = annotate(tree_from_document(goriot)).domains
    ct = ct_score(units, cf, chains_per_unit)
    vt = vt_score(units, cf, chains_per_unit, domains)
    row = comparison_report(ct, vt, source="goriot")
    assert row.cells() == ("goriot", "9", "14", "1.56", "14", "1.56")
    assert row.vt_average == row.ct_average


# ----------------------------------------------------------------------
# Properties


@st.composite
def random_center_sequences(draw):
    n = draw(st.integers(2, 10))
    pool = ["a", "b", "c", "d"]
    units = [f"u{i}" for i in range(1, n + 1)]
    cf = {}
    chains = {}
    for unit in units:
        centers = draw(st.lists(st.sampled_from(pool), unique=True, max_size=3))
        cf[unit] = CfList(unit, tuple(centers))
        chains[unit] = set(centers)
    return units, cf, chains


@settings(max_examples=200, derandomize=True, deadline=None)
@given(random_center_sequences())
def test_vt_equals_ct_when_domains_are_prefixes(data):
    units, cf, chains = data
    domains = {u: units[:i + 1] for i, u in enumerate(units)}
    ct = ct_score(units, cf, chains)
    vt = vt_score(units, cf, chains, domains)
    assert ct.total == vt.total
    assert [(t.from_unit, t.to_unit, t.cb, t.kind) for t in ct.transitions] == \
           [(t.from_unit, t.to_unit, t.cb, t.kind) for t in vt.transitions]


@settings(max_examples=200, derandomize=True, deadline=None)
@given(random_center_sequences())
def test_transition_counts_and_score_range(data):
    units, cf, chains = data
    report = ct_score(units, cf, chains)
    assert report.transition_count == len(units) - 1
    assert all(t.score == TRANSITION_SCORES[t.kind] for t in report.transitions)
    assert 0 <= report.average <= 4


def test_custom_weights():
    cf = {"u1": CfList("u1", ("a",)), "u2": CfList("u2", ("a",))}
    chains = {"u1": {"a"}, "u2": {"a"}}
    report = ct_score(["u1", "u2"], cf, chains,
                      weights={Transition.CONTINUATION: 7})
    assert report.total == 7
