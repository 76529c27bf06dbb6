import pytest
from fastapi.testclient import TestClient

from veintex.centering import build_chains, coref_links_from_document, rs_units_map
from veintex.errors import PrerequisiteMissing, StaleVersion, VeintexError
from veintex.markup import serialize_document
from veintex.pipeline import DocumentInput, PipelineConfig
from veintex.service.app import create_app
from veintex.sessions import get_analysis, open_session

from conftest import fixture_path


def goriot_text():
    return fixture_path("goriot.vxd").read_text("utf-8")


def view_files(name):
    return {
        "view": name,
        "parents": ["hub"],
        "payload": fixture_path(f"goriot-views/{name}.vxd").read_text("utf-8"),
    }


# ----------------------------------------------------------------------
# open_session


def test_open_goriot_session():
    session = open_session(goriot_text(), session_id="g")
    assert session.version == 0
    assert session.active_view == "work"
    doc = session.effective()
    assert len(doc.id_index) == 41  # d1 + 10 units + 21 rs + 9 links


def test_open_plain_text_session():
    session = open_session("abc.")
    doc = session.effective()
    assert doc.root.tag == "body"
    paragraphs = [el for el in doc.root.iter_elements() if el.tag == "p"]
    assert len(paragraphs) == 1 and paragraphs[0].text_content() == "abc."


def test_open_with_bad_manifest():
    with pytest.raises(VeintexError):
        open_session("text", [{"view": "v", "parents": ["missing"],
                               "payload": ""}])


def test_open_with_view_payloads():
    session = open_session(
        fixture_path("goriot-views/bd.vxd").read_text("utf-8"),
        [view_files("u-view")])
    doc = session.effective()
    units = [el for el in doc.root.iter_elements() if el.is_unit()]
    assert len(units) == 10


# ----------------------------------------------------------------------
# apply_edit


def unit_session():
    return open_session(
        fixture_path("goriot-views/bd.vxd").read_text("utf-8"),
        [view_files("u-view")], session_id="units")


def test_create_relation():
    session = unit_session()
    result = session.apply_edit(0, {"kind": "createRelation", "targetA": "u9",
                                    "targetB": "u10", "nuclei": ["u9"]})
    assert result.version == 1
    assert result.created == ["l1"]
    link = session.effective().find_by_id("l1")
    assert link.attrs["targets"] == "u9 u10"
    assert link.attrs["nuclei"] == "u9"


def test_stale_version_leaves_state_identical():
    session = unit_session()
    session.apply_edit(0, {"kind": "createRelation", "targetA": "u1",
                           "targetB": "u2", "nuclei": ["u1"]})
    before = serialize_document(session.effective())
    with pytest.raises(StaleVersion):
        session.apply_edit(0, {"kind": "createRelation", "targetA": "u3",
                               "targetB": "u4", "nuclei": ["u3"]})
    assert session.version == 1
    assert serialize_document(session.effective()) == before


def test_rejected_edit_leaves_state_identical():
    session = unit_session()
    before = serialize_document(session.effective())
    with pytest.raises(VeintexError):
        # u5 and u9 are not adjacent: the forest check must reject
        session.apply_edit(0, {"kind": "createRelation", "targetA": "u5",
                               "targetB": "u9", "nuclei": ["u5"]})
    assert session.version == 0
    assert serialize_document(session.effective()) == before


def test_mark_rs_then_coref_grows_chain():
    session = open_session(goriot_text(), session_id="g")
    # wrap "CHAGRIN" at the end of u6: u6 spans [242, 358)
    text = session.effective().text()
    start = text.index("CHAGRIN")
    result = session.apply_edit(0, {"kind": "markRS", "start": start,
                                    "end": start + len("CHAGRIN"),
                                    "type": "person"})
    new_rs = result.created[0]
    assert new_rs == "p85"
    session.apply_edit(1, {"kind": "linkCoref", "source": new_rs,
                           "target": "p74"})
    doc = session.effective()
    coref, _ = coref_links_from_document(doc)
    _, rs_order = rs_units_map(doc)
    chains = build_chains([(l.source, l.target) for l in coref], rs_order)
    assert set(chains.members[chains.chain_of["p74"]]) == \
        {"p74", "p75", "p76", "p85"}


def test_mark_unit_boundaries_sequential():
    session = open_session("One. Two. Three.")
    r1 = session.apply_edit(0, {"kind": "markUnitBoundary", "offset": 5})
    r2 = session.apply_edit(1, {"kind": "markUnitBoundary", "offset": 10})
    assert (r1.created, r2.created) == (["u1"], ["u2"])
    doc = session.effective()
    assert doc.find_by_id("u1").text_content() == "One. "
    assert doc.find_by_id("u2").text_content() == "Two. "
    with pytest.raises(VeintexError):
        session.apply_edit(2, {"kind": "markUnitBoundary", "offset": 10})


def test_boundary_inside_rs_rejected():
    session = open_session("One. Two.")
    session.apply_edit(0, {"kind": "markRS", "start": 0, "end": 4})
    with pytest.raises(VeintexError):
        session.apply_edit(1, {"kind": "markUnitBoundary", "offset": 2})


def test_adjoin_and_substitute_edits():
    session = unit_session()
    session.apply_edit(0, {"kind": "createRelation", "targetA": "u1",
                           "targetB": "u2", "nuclei": ["u1"]})
    session.apply_edit(1, {"kind": "adjoin", "parentLinkId": "l1",
                           "childIndex": 1, "siblingRootId": "u3",
                           "newSiblingNuclear": False,
                           "existingChildNuclear": True})
    doc = session.effective()
    l2 = doc.find_by_id("l2")
    assert l2.attrs["targets"] == "u2 u3"
    l1 = doc.find_by_id("l1")
    assert l1.attrs["targets"] == "u1 l2"


def test_delete_and_set_attribute_edits():
    session = open_session(goriot_text(), session_id="g")
    session.apply_edit(0, {"kind": "setAttribute", "id": "u1",
                           "name": "note", "value": "check"})
    assert session.effective().find_by_id("u1").attrs["note"] == "check"
    session.apply_edit(1, {"kind": "deleteElement", "id": "l9"})
    assert session.effective().find_by_id("l9") is None
    assert session.version == 2


# ----------------------------------------------------------------------
# get_analysis


def test_analysis_veins_complete():
    session = open_session(goriot_text(), session_id="g")
    payload = get_analysis(session, "veins")
    assert payload["partial"] is False
    assert len(payload["trees"]) == 1
    tree = payload["trees"][0]
    assert tree["root"] == "l9"
    assert tree["veins"]["u10"] == "u1 u2 u3 u4 u5 u6 u7 u8 u9 u10"
    assert tree["domains"]["u4"] == ["u1", "u2", "u3", "u4"]


def test_analysis_partial_forest():
    session = open_session("One. Two. Three.")
    for offset in (5, 10, 16):
        session.apply_edit(session.version,
                           {"kind": "markUnitBoundary", "offset": offset})
    session.apply_edit(session.version,
                       {"kind": "createRelation", "targetA": "u1",
                        "targetB": "u2", "nuclei": ["u1"]})
    payload = get_analysis(session, "veins")
    assert payload["partial"] is True
    assert len(payload["trees"]) == 2
    assert {t["root"] for t in payload["trees"]} == {"l1", "u3"}


def test_analysis_centering_needs_rs():
    session = open_session("One. Two.")
    session.apply_edit(0, {"kind": "markUnitBoundary", "offset": 5})
    session.apply_edit(1, {"kind": "markUnitBoundary", "offset": 9})
    with pytest.raises(PrerequisiteMissing):
        get_analysis(session, "centering")


def test_analysis_comparison_goriot():
    session = open_session(goriot_text(), session_id="g")
    payload = get_analysis(session, "comparison")
    assert payload["transitions"] == 9
    assert payload["ctTotal"] == 14 and payload["vtTotal"] == 14
    assert payload["vtTotal"] >= payload["ctTotal"]
    assert payload["references"] == {"direct": 15, "indirect": 0,
                                     "inaccessible": 0}


def test_analysis_is_side_effect_free():
    session = open_session(goriot_text(), session_id="g")
    before = serialize_document(session.effective())
    get_analysis(session, "comparison")
    get_analysis(session, "veins")
    assert serialize_document(session.effective()) == before
    assert session.version == 0


# ----------------------------------------------------------------------
# HTTP API


def client(preload=False):
    config = None
    if preload:
        config = PipelineConfig(
            docs=[DocumentInput(fixture_path("goriot.vxd"))],
            output_dir=".")
    return TestClient(create_app(config))


def test_health():
    response = client().get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_session_flow_over_http():
    api = client()
    created = api.post("/sessions", json={"hub": "One. Two."}).json()
    sid = created["sessionId"]
    assert created["version"] == 0

    r = api.post(f"/sessions/{sid}/edits",
                 json={"version": 0,
                       "edit": {"kind": "markUnitBoundary", "offset": 5}})
    assert r.status_code == 200
    assert r.json()["version"] == 1
    assert r.json()["created"] == ["u1"]

    stale = api.post(f"/sessions/{sid}/edits",
                     json={"version": 0,
                           "edit": {"kind": "markUnitBoundary", "offset": 9}})
    assert stale.status_code == 409
    assert stale.json()["currentVersion"] == 1

    view = api.get(f"/sessions/{sid}/view").json()
    assert view["version"] == 1
    assert '<seg type="unit" id="u1">One. </seg>' in view["document"]

    missing = api.get(f"/sessions/{sid}/analysis", params={"kind": "comparison"})
    assert missing.status_code == 422
    assert missing.json()["error"] == "PrerequisiteMissing"


def test_preloaded_goriot_vt_view_has_cb_h():
    api = client(preload=True)
    listed = api.get("/sessions").json()
    assert [s["sessionId"] for s in listed] == ["goriot"]
    r = api.get("/sessions/goriot/analysis", params={"kind": "comparison"})
    assert r.status_code == 200
    assert r.json()["transitions"] == 9

    view = api.get("/sessions/goriot/view", params={"view": "vt-view"})
    assert view.status_code == 200
    assert 'cb-h="p66"' in view.json()["document"]

    veins = api.get("/sessions/goriot/view", params={"view": "veins-view"})
    assert 'vein="u1 u2 u3 u4 u5 u6 u7 u8 u9 u10"' in veins.json()["document"]


def test_unknown_session_404():
    assert client().get("/sessions/nope/view").status_code == 404


def test_bad_edit_400():
    api = client()
    sid = api.post("/sessions", json={"hub": "abc."}).json()["sessionId"]
    r = api.post(f"/sessions/{sid}/edits",
                 json={"version": 0, "edit": {"kind": "nonsense"}})
    assert r.status_code == 400
