from veintex.markup import parse_document
from veintex.pipeline import (
    DocumentInput,
    PipelineConfig,
    analyze_document,
    compose_analysis_base,
    derive_views,
    load_document_graph,
    run_analysis,
)
from veintex.veins import VeinExpr

from conftest import fixture_path

GORIOT_VIEW_PATHS = [fixture_path(f"goriot-views/{n}.vxv")
                     for n in ("u-view", "rs-view", "rl-view", "rel-view")]


def goriot_input():
    return DocumentInput(fixture_path("goriot-views/bd.vxd"), GORIOT_VIEW_PATHS)


def test_analyze_collapsed_goriot(goriot):
    analysis = analyze_document(goriot, "goriot")
    assert analysis.complete_tree
    assert analysis.row.cells() == ("goriot", "9", "14", "1.56", "14", "1.56")
    assert analysis.ref_counts == {"direct": 15, "indirect": 0, "inaccessible": 0}
    assert analysis.warnings == []


def test_analyze_view_set_matches_collapsed(goriot):
    graph = load_document_graph(goriot_input())
    base, base_view = compose_analysis_base(graph)
    assert base_view == "analysis-base"
    split = analyze_document(base, "goriot")
    collapsed = analyze_document(goriot, "goriot")
    assert split.row == collapsed.row
    assert split.ref_counts == collapsed.ref_counts
    assert split.annotation.veins == collapsed.annotation.veins


def test_analyze_demo4_no_reference_view(demo4):
    analysis = analyze_document(demo4, "demo4")
    assert analysis.complete_tree
    assert analysis.annotation is not None
    assert "no reference view" in analysis.warnings
    assert analysis.ct is None and analysis.vt is None and analysis.row is None


def test_derive_views_fig2_structure():
    graph = load_document_graph(goriot_input())
    base, _ = compose_analysis_base(graph)
    analysis = analyze_document(base, "goriot")
    created = derive_views(graph, analysis)
    assert created == ["rs-in-u-view", "veins-view", "cf-view", "ct-view", "vt-view"]
    assert graph.views["veins-view"].parents == ["rel-view"]
    assert graph.views["rs-in-u-view"].parents == ["u-view", "rs-view"]
    assert graph.views["cf-view"].parents == ["rs-in-u-view"]
    assert graph.views["ct-view"].parents == ["cf-view", "rl-view"]
    assert graph.views["vt-view"].parents == ["cf-view", "rl-view", "veins-view"]
    graph.check_acyclic()

    veins_doc = graph.compose_effective("veins-view")
    u10 = veins_doc.find_by_id("u10")
    assert u10.attrs["vein"] == "u1 u2 u3 u4 u5 u6 u7 u8 u9 u10"
    assert veins_doc.find_by_id("l9").attrs["head"] == "u1"

    cf_doc = graph.compose_effective("cf-view")
    assert cf_doc.find_by_id("u1").attrs["cf"] == "p65 p66"
    assert cf_doc.find_by_id("u1").attrs.get("vein") is None

    vt_doc = graph.compose_effective("vt-view")
    assert vt_doc.find_by_id("u2").attrs["cb-h"] == "p66"
    assert vt_doc.find_by_id("u2").attrs["cf"] == "p66"
    # rs-in-u mapping inherited through cf-view
    assert vt_doc.find_by_id("p77").attrs["unit"] == "u8"


def test_run_analysis_writes_reports(tmp_path):
    config = PipelineConfig(docs=[goriot_input()], output_dir=tmp_path)
    analyses = run_analysis(config)
    assert len(analyses) == 1
    csv_text = (tmp_path / "comparison.csv").read_text()
    lines = csv_text.strip().split("\n")
    assert lines[0].startswith("Source,No. of transitions,CT Score")
    assert lines[1] == "bd,9,14,1.56,14,1.56"
    assert len(lines) == 2  # single document: no Total row
    refs = (tmp_path / "references.csv").read_text().strip().split("\n")
    assert refs[1] == "bd,15,0,0"
    link_lines = (tmp_path / "reference-links.csv").read_text().strip().split("\n")
    assert len(link_lines) == 16
    for name in ("vt-view.vxv", "vt-view.vxd", "veins-view.vxd",
                 "cf-view.vxd", "effective.vxd", "bd.vxd", "u-view.vxv"):
        assert (tmp_path / "bd" / name).exists()


def test_run_analysis_deterministic(tmp_path):
    out1, out2 = tmp_path / "one", tmp_path / "two"
    for out in (out1, out2):
        run_analysis(PipelineConfig(docs=[goriot_input()], output_dir=out))
    for path1 in sorted(out1.rglob("*")):
        if path1.is_file():
            path2 = out2 / path1.relative_to(out1)
            assert path2.read_bytes() == path1.read_bytes(), path1.name


def test_run_analysis_batch_with_total(tmp_path):
    # two copies of the goriot document under different names
    second_hub = tmp_path / "goriot2.vxd"
    second_hub.write_bytes(fixture_path("goriot.vxd").read_bytes())
    config = PipelineConfig(
        docs=[DocumentInput(fixture_path("goriot.vxd")),
              DocumentInput(second_hub)],
        output_dir=tmp_path / "out")
    run_analysis(config)
    lines = (tmp_path / "out" / "comparison.csv").read_text().strip().split("\n")
    assert len(lines) == 4
    assert lines[1] == "goriot,9,14,1.56,14,1.56"
    assert lines[2] == "goriot2,9,14,1.56,14,1.56"
    assert lines[3] == "Total,18,28,1.56,28,1.56"


def test_run_analysis_demo4_skips_centering(tmp_path):
    config = PipelineConfig(docs=[DocumentInput(fixture_path("demo4.vxd"))],
                            output_dir=tmp_path)
    analyses = run_analysis(config)
    assert "no reference view" in analyses[0].warnings
    assert (tmp_path / "demo4" / "veins-view.vxd").exists()
    assert not (tmp_path / "demo4" / "cf-view.vxd").exists()
    lines = (tmp_path / "comparison.csv").read_text().strip().split("\n")
    assert len(lines) == 1  # header only


def test_text_report_format(tmp_path):
    config = PipelineConfig(docs=[goriot_input()], output_dir=tmp_path,
                            report_format="text")
    run_analysis(config)
    text = (tmp_path / "comparison.txt").read_text()
    assert "No. of transitions" in text
    assert "bd" in text and "1.56" in text


def test_effective_document_parses_with_all_layers(tmp_path):
    run_analysis(PipelineConfig(docs=[goriot_input()], output_dir=tmp_path))
    doc = parse_document((tmp_path / "bd" / "effective.vxd").read_bytes())
    # 10 units + 21 rs + 9 relation links carry ids
    assert len(doc.id_index) == 40
    positions = {f"u{i}": i for i in range(1, 11)}
    vt_doc = parse_document((tmp_path / "bd" / "vt-view.vxd").read_bytes())
    vein_values = [el.attrs["key"] for el in vt_doc.root.iter_elements()
                   if el.attrs.get("subtype") == "vein"]
    assert not vein_values  # veins live in veins-view, not vt-view
    veins_payload = parse_document(
        (tmp_path / "bd" / "veins-view.vxd").read_bytes())
    veins = {el.attrs["targets"]: el.attrs["key"]
             for el in veins_payload.root.iter_elements()
             if el.attrs.get("subtype") == "vein"}
    assert VeinExpr.parse(veins["u10"], positions).format() == \
        "u1 u2 u3 u4 u5 u6 u7 u8 u9 u10"
