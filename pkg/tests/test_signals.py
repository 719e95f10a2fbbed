import io as stdio
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from readorder.document import COL, ROW, Document, TextLine
from readorder.geometry import RotatedBox
from readorder.signals import (
    PredictionError,
    PredictionMismatch,
    Predictions,
    constant_predictor,
    feature_matrix,
    load_predictions,
    node_spatial_features,
    oracle_predictor,
    predictions_to_dict,
)
from readorder.skeleton import build_skeleton
from readorder.synthgen import SynthConfig, generate


def small_doc():
    lines = [TextLine(i, RotatedBox(10.0 * i, 0.0, 8, 2)) for i in range(4)]
    doc = Document(lines, "d")
    return doc, build_skeleton(doc.lines)


# -- features -----------------------------------------------------------------

def test_features_axis_aligned():
    f = node_spatial_features(TextLine(0, RotatedBox(5, 6, 4, 2, 0)))
    assert f.shape == (24,)
    assert f[:8].tolist() == [3, 5, 7, 5, 7, 7, 3, 7]
    assert np.array_equal(f[8:16], f[:8])
    assert np.all(f[16:] == 0)


def test_features_quarter_turn():
    f = node_spatial_features(TextLine(0, RotatedBox(5, 6, 4, 2, math.pi / 2)))
    assert np.allclose(f[8:16], 0, atol=1e-12)
    assert np.allclose(f[16:], f[:8])


def test_features_eighth_turn():
    f = node_spatial_features(TextLine(0, RotatedBox(1, 2, 4, 2, math.pi / 4)))
    k = math.sqrt(2) / 2
    assert np.allclose(f[8:16], f[:8] * k)
    assert np.allclose(f[16:], f[:8] * k)


def test_features_first_corner_is_top_left_in_box_frame():
    f = node_spatial_features(TextLine(0, RotatedBox(0, 0, 4, 2, math.pi / 2)))
    # a quarter turn maps local (-2, -1) to (1, -2)
    assert f[:2] == pytest.approx([1, -2])


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0, 50), st.floats(0, 50),
       st.floats(-3, 3), st.floats(-100, 100), st.floats(-100, 100))
def test_features_translation_covariant(cx, cy, w, h, a, dx, dy):
    f0 = node_spatial_features(TextLine(0, RotatedBox(cx, cy, w, h, a)))
    f1 = node_spatial_features(TextLine(0, RotatedBox(cx + dx, cy + dy, w, h, a)))
    shift = np.tile([dx, dy], 4)
    box = RotatedBox(cx, cy, w, h, a)
    c, s = math.cos(box.angle), math.sin(box.angle)
    assert np.allclose(f1[:8] - f0[:8], shift, atol=1e-9)
    assert np.allclose(f1[8:16] - f0[8:16], shift * c, atol=1e-9)
    assert np.allclose(f1[16:] - f0[16:], shift * s, atol=1e-9)


def test_feature_matrix_shape():
    doc, _ = small_doc()
    assert feature_matrix(doc).shape == (4, 24)
    assert feature_matrix(Document([], "e")).shape == (0, 24)


# -- prediction files ---------------------------------------------------------

def full_dict(graph, p_row=0.2, p_edge=0.7):
    return {"nodes": [{"line_id": i, "p_row": p_row} for i in graph.node_ids],
            "edges": [{"a": a, "b": b, "p_same_paragraph": p_edge} for a, b in graph.edges]}


def test_load_complete():
    doc, g = small_doc()
    p = load_predictions(doc, g, full_dict(g))
    assert p.node_row_score == {i: 0.2 for i in range(4)}
    assert set(p.edge_same_para_score) == set(g.edges)


def test_load_from_path_and_file(tmp_path):
    doc, g = small_doc()
    path = tmp_path / "p.json"
    path.write_text(json.dumps(full_dict(g)))
    assert load_predictions(doc, g, path) == load_predictions(doc, g, str(path))
    assert load_predictions(doc, g, stdio.StringIO(path.read_text())).node_row_score[0] == 0.2


def test_edge_endpoints_may_come_reversed():
    doc, g = small_doc()
    d = full_dict(g)
    for e in d["edges"]:
        e["a"], e["b"] = e["b"], e["a"]
    assert set(load_predictions(doc, g, d).edge_same_para_score) == set(g.edges)


def test_missing_edge_names_it():
    lines = [TextLine(3, RotatedBox(0, 0, 2, 2)), TextLine(7, RotatedBox(10, 0, 2, 2))]
    doc = Document(lines)
    g = build_skeleton(doc.lines)
    d = full_dict(g)
    d["edges"] = []
    with pytest.raises(PredictionMismatch, match=r"missing edge score \(3,7\)"):
        load_predictions(doc, g, d)


def test_missing_node_names_it():
    doc, g = small_doc()
    d = full_dict(g)
    d["nodes"].pop(2)
    with pytest.raises(PredictionMismatch, match="missing node score 2"):
        load_predictions(doc, g, d)


def test_unknown_ids_rejected():
    doc, g = small_doc()
    d = full_dict(g)
    d["nodes"].append({"line_id": 99, "p_row": 0.1})
    with pytest.raises(PredictionMismatch, match="99"):
        load_predictions(doc, g, d)
    d = full_dict(g)
    d["edges"].append({"a": 0, "b": 3, "p_same_paragraph": 0.1})
    with pytest.raises(PredictionMismatch, match=r"\(0,3\)"):
        load_predictions(doc, g, d)


@pytest.mark.parametrize("bad", [1.2, -0.1, "0.5", None, True, float("nan")])
def test_score_range_and_type(bad):
    doc, g = small_doc()
    d = full_dict(g)
    d["nodes"][0]["p_row"] = bad
    with pytest.raises(PredictionError):
        load_predictions(doc, g, d)


def test_shape_errors():
    doc, g = small_doc()
    with pytest.raises(PredictionError):
        load_predictions(doc, g, {"nodes": []})
    with pytest.raises(PredictionError):
        load_predictions(doc, g, {"nodes": [{"p_row": 0.1}], "edges": []})


@given(st.lists(st.floats(0, 1), min_size=4, max_size=4), st.data())
def test_save_load_roundtrip(node_scores, data):
    doc, g = small_doc()
    edge_scores = data.draw(st.lists(st.floats(0, 1), min_size=g.n_edges, max_size=g.n_edges))
    p = Predictions(dict(zip(g.node_ids, node_scores)), dict(zip(g.edges, edge_scores)))
    again = load_predictions(doc, g, json.loads(json.dumps(predictions_to_dict(p))))
    assert again == p


# -- predictors ---------------------------------------------------------------

def test_constant_predictor_variants():
    doc, g = small_doc()
    p = constant_predictor(doc, g, COL, False)
    assert set(p.node_row_score.values()) == {0.0} and set(p.edge_same_para_score.values()) == {0.0}
    p = constant_predictor(doc, g, ROW, False)
    assert set(p.node_row_score.values()) == {1.0}
    p = constant_predictor(doc, g, COL, True)
    assert set(p.edge_same_para_score.values()) == {1.0}
    with pytest.raises(ValueError):
        constant_predictor(doc, g, "diagonal")


@pytest.mark.parametrize("kind,expected", [("columns", {0.0}), ("table", {1.0})])
def test_oracle_predictor_pure_kinds(kind, expected):
    doc, truth = generate(SynthConfig(kind=kind, seed=2))
    g = build_skeleton(doc.lines)
    assert set(oracle_predictor(doc, g, truth).node_row_score.values()) == expected


def test_oracle_predictor_mixed_matches_truth():
    doc, truth = generate(SynthConfig(kind="mixed", seed=5))
    g = build_skeleton(doc.lines)
    p = oracle_predictor(doc, g, truth)
    for lid, score in p.node_row_score.items():
        assert score == (1.0 if truth.paragraph_pattern[truth.line_paragraph[lid]] == ROW else 0.0)
    for (a, b), score in p.edge_same_para_score.items():
        assert score == float(truth.line_paragraph[a] == truth.line_paragraph[b])
    assert 0.0 in p.node_row_score.values() and 1.0 in p.node_row_score.values()


def test_oracle_predictor_requires_truth_for_every_line():
    doc, truth = generate(SynthConfig(kind="columns", seed=1))
    del truth.line_paragraph[doc.lines[0].id]
    with pytest.raises(PredictionError):
        oracle_predictor(doc, build_skeleton(doc.lines), truth)
