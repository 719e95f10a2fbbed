import json
import math
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from readorder import io
from readorder.document import COL, ROW, Document, TextLine, Word
from readorder.geometry import RotatedBox
from readorder.ordering import ReadingOrderResult
from readorder.synthgen import SynthConfig, generate


def small_doc():
    words = (Word(0, "a", RotatedBox(1, 2, 3, 4, 0.1)), Word(1, "b", RotatedBox(5, 2, 3, 4, 0.1)))
    return Document((TextLine(3, RotatedBox(3, 2, 10, 5, 0.1), words), TextLine(4, RotatedBox(3, 20, 10, 5))), "d")


def fail_at(data, where, fn=io.document_from_dict):
    with pytest.raises(io.FormatError) as err:
        fn(data, "f.json")
    assert err.value.where == where
    assert "f.json" in str(err.value)


# -- serialization ------------------------------------------------------------

def test_dumps_rounds_and_normalizes():
    text = io.dumps({"a": 1.23456789, "b": -0.0, "c": -1e-9, "d": [1, True, None]})
    assert json.loads(text) == {"a": 1.234568, "b": 0.0, "c": 0.0, "d": [1, True, None]}
    assert "-0" not in text and text.endswith("}\n")


def test_dumps_numpy_and_rejects_nan():
    import numpy as np
    assert json.loads(io.dumps({"x": np.array([[1.0, 2.5]]), "y": np.int64(3)})) == {"x": [[1.0, 2.5]], "y": 3}
    with pytest.raises(ValueError):
        io.dumps(float("nan"))
    with pytest.raises(TypeError):
        io.dumps(object())


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "sub" / "out.json"
    io.write_json(target, {"k": 1})
    io.write_json(target, {"k": 2})
    assert json.loads(target.read_text()) == {"k": 2}
    assert os.listdir(target.parent) == ["out.json"]


def test_failed_write_keeps_old_file(tmp_path):
    target = tmp_path / "out.json"
    io.write_json(target, {"k": 1})
    with pytest.raises(TypeError):
        io.write_json(target, {"k": object()})
    assert json.loads(target.read_text()) == {"k": 1}
    assert os.listdir(tmp_path) == ["out.json"]


# -- documents ----------------------------------------------------------------

def test_document_roundtrip():
    doc = small_doc()
    back = io.document_from_dict(json.loads(io.dumps(io.document_to_dict(doc))))
    assert back.id == "d"
    assert [ln.id for ln in back.lines] == [3, 4]
    assert back.lines[0].words[1].text == "b"
    assert back.lines[0].box.angle == pytest.approx(0.1, abs=1e-7)


@given(st.floats(-179.9, 180), st.floats(-1e4, 1e4), st.floats(0, 1e3))
def test_box_roundtrip_within_rounding(deg, c, w):
    b = RotatedBox(c, -c, w, w / 2, math.radians(deg))
    got = io._Reader("x").box(json.loads(io.dumps(io.box_to_dict(b))), "$")
    assert got.cx == pytest.approx(c, abs=1e-6) and got.w == pytest.approx(w, abs=1e-6)
    assert math.degrees(got.angle) == pytest.approx(deg, abs=1e-6)


def test_box_angle_of_minus_pi_written_as_180():
    assert io.box_to_dict(RotatedBox(0, 0, 1, 1, -math.pi))["angle_deg"] == 180.0


def test_doc_id_falls_back_to_file_stem():
    assert io.document_from_dict({"lines": []}, "/x/page7.json").id == "page7"
    assert io.document_from_dict({"lines": []}, "p.json", doc_id="given").id == "given"


@pytest.mark.parametrize("data,where", [
    ([], "$"),
    ({}, "$"),
    ({"lines": {}}, "$.lines"),
    ({"lines": [{"box": {}}]}, "$.lines[0]"),
    ({"lines": [{"id": "1", "box": {}}]}, "$.lines[0].id"),
    ({"lines": [{"id": 1, "box": {"cx": 0, "cy": 0, "w": 1}}]}, "$.lines[0].box"),
    ({"lines": [{"id": 1, "box": {"cx": 0, "cy": 0, "w": -1, "h": 1}}]}, "$.lines[0].box.w"),
    ({"lines": [{"id": 1, "box": {"cx": 0, "cy": 0, "w": 1, "h": 1, "angle_deg": -180}}]},
     "$.lines[0].box.angle_deg"),
    ({"lines": [{"id": 1, "box": {"cx": 0, "cy": 0, "w": 1, "h": 1, "angle_deg": 200}}]},
     "$.lines[0].box.angle_deg"),
    ({"lines": [{"id": 1, "box": {"cx": True, "cy": 0, "w": 1, "h": 1}}]}, "$.lines[0].box.cx"),
    ({"lines": [{"id": 1, "box": {"cx": 0, "cy": 0, "w": 1, "h": 1}}] * 2}, "$.lines[1].id"),
    ({"lines": [{"id": 1, "box": {"cx": 0, "cy": 0, "w": 1, "h": 1},
                 "words": [{"id": 0, "text": 5, "box": {"cx": 0, "cy": 0, "w": 1, "h": 1}}]}]},
     "$.lines[0].words[0].text"),
])
def test_document_errors_name_the_field(data, where):
    fail_at(data, where)


def test_read_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"lines": [\n  1,,\n]}')
    with pytest.raises(io.FormatError) as err:
        io.read_json(p)
    assert err.value.where.startswith("line 2 column")
    with pytest.raises(io.FormatError, match="cannot read"):
        io.read_json(tmp_path / "missing.json")


def test_prediction_file_checks(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"nodes": [{"line_id": 0, "p_row": 1.5}], "edges": []}))
    with pytest.raises(io.FormatError) as err:
        io.read_predictions_file(p)
    assert err.value.where == "$.nodes[0].p_row"
    p.write_text(json.dumps({"nodes": [], "edges": [{"a": 0, "p_same_paragraph": 0.2}]}))
    with pytest.raises(io.FormatError, match="missing field 'b'"):
        io.read_predictions_file(p)


# -- results ------------------------------------------------------------------

def sample_result():
    return ReadingOrderResult([2, 0], {0: [4], 2: [3]}, {0: COL, 2: ROW}, [3, 4])


def test_result_roundtrip_sorted_paragraphs():
    d = io.result_to_dict(sample_result(), "d")
    assert [p["id"] for p in d["paragraphs"]] == [0, 2]
    doc_id, back = io.result_from_dict(json.loads(io.dumps(d)))
    assert doc_id == "d" and back == sample_result()
    assert "doc_id" not in io.result_to_dict(sample_result())


def test_result_inconsistency_is_a_format_error():
    d = io.result_to_dict(sample_result())
    fail_at(dict(d, line_order=[4, 3]), "$.line_order", io.result_from_dict)
    fail_at(dict(d, reading_order=[2]), "$.reading_order", io.result_from_dict)
    bad = json.loads(json.dumps(d))
    bad["paragraphs"][0]["pattern"] = "diagonal"
    fail_at(bad, "$.paragraphs[0].pattern", io.result_from_dict)


def test_result_document_mismatch():
    io.check_result_matches(sample_result(), small_doc())
    other = Document((TextLine(3, RotatedBox(0, 0, 1, 1)),), "o")
    with pytest.raises(io.ConsistencyError, match="unknown line 4"):
        io.check_result_matches(sample_result(), other)


# -- annotations and datasets -------------------------------------------------

def test_truth_roundtrip_through_annotations():
    doc, truth = generate(SynthConfig(kind="mixed", seed=4))
    data = json.loads(io.dumps(io.annotations_to_dict(doc.id, truth)))
    back = io.truth_from_dict(data)
    assert back.paragraph_order == truth.paragraph_order
    assert back.line_paragraph == truth.line_paragraph
    assert back.paragraph_pattern == truth.paragraph_pattern
    doc_id, groups = io.groups_from_dict(data)
    assert doc_id == doc.id and groups[0].paragraph_ids == tuple(truth.paragraph_order)


def test_annotation_errors():
    fail_at({"groups": [{"paragraphs": []}]}, "$.groups[0].paragraphs", io.groups_from_dict)
    box = {"cx": 0, "cy": 0, "w": 1, "h": 1}
    fail_at({"groups": [{"paragraphs": [{"id": 1, "box": box}, {"id": 1, "box": box}]}]},
            "$.groups[0].paragraphs[1].id", io.groups_from_dict)
    two = {"groups": [{"paragraphs": [{"id": 1, "box": box, "pattern": COL, "line_ids": [5]},
                                      {"id": 2, "box": box, "pattern": COL, "line_ids": [5]}]}]}
    fail_at(two, "$.groups[0].paragraphs[1].line_ids[0]", io.truth_from_dict)


def test_dataset_paths_are_relative(tmp_path):
    doc, truth = generate(SynthConfig(kind="columns", seed=1))
    sub = tmp_path / "data"
    io.write_json(sub / "a.lines.json", io.document_to_dict(doc))
    io.write_json(sub / "a.ann.json", io.annotations_to_dict(doc.id, truth))
    io.write_json(sub / "set.json", {"documents": [io.dataset_entry("a", "a.lines.json", "a.ann.json")]})
    [(got, groups)] = io.load_dataset(sub / "set.json")
    assert got.id == "a" and len(got.lines) == len(doc.lines)
    assert groups[0].paragraph_ids == tuple(truth.paragraph_order)
    io.write_json(sub / "dup.json", {"documents": [io.dataset_entry("a", "a.lines.json", "a.ann.json")] * 2})
    with pytest.raises(io.FormatError) as err:
        io.load_dataset(sub / "dup.json")
    assert err.value.where == "$.documents[1].id"
