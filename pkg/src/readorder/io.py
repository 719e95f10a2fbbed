"""JSON file formats.

Angles are degrees in files and radians in memory. Every float written is
rounded to 6 decimals and keys are emitted in a fixed order, so identical
inputs give byte-identical files. Writes go to a temporary file in the
target directory and are renamed into place.

Validation errors carry the file name and a JSON path to the bad field.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .document import PATTERNS, AnnotatedGroup, Document, GroundTruth, TextLine, Word
from .geometry import RotatedBox
from .labeling import UNKNOWN
from .ordering import ReadingOrderResult
from .skeleton import SkeletonGraph

FLOAT_DIGITS = 6


class FormatError(ValueError):
    """Input does not parse or does not match its schema."""

    def __init__(self, source: str, where: str, msg: str):
        self.source = source
        self.where = where
        super().__init__(f"{source}: {where}: {msg}" if where else f"{source}: {msg}")


class ConsistencyError(ValueError):
    """Inputs are individually valid but refer to each other inconsistently."""


# -- writing ------------------------------------------------------------------

def _clean(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj}")
        v = round(obj, FLOAT_DIGITS)
        return 0.0 if v == 0 else v
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.ndarray, np.generic)):
        return _clean(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False) + "\n"


def write_text(path: str | os.PathLike, text: str) -> None:
    """Atomically replace ``path`` with ``text``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_json(path: str | os.PathLike, obj: Any) -> None:
    write_text(path, dumps(obj))


# -- reading ------------------------------------------------------------------

def read_json(path: str | os.PathLike) -> Any:
    src = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(src, "", f"cannot read file: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(src, f"line {exc.lineno} column {exc.colno}", exc.msg) from exc


class _Reader:
    """Typed field access that reports where a bad value sits."""

    def __init__(self, source: str):
        self.source = source

    def fail(self, where: str, msg: str):
        raise FormatError(self.source, where, msg)

    def obj(self, value, where: str) -> Mapping:
        if not isinstance(value, Mapping):
            self.fail(where, f"expected an object, got {type(value).__name__}")
        return value

    def arr(self, value, where: str) -> list:
        if not isinstance(value, list):
            self.fail(where, f"expected an array, got {type(value).__name__}")
        return value

    def get(self, m: Mapping, key: str, where: str):
        if key not in m:
            self.fail(where, f"missing field {key!r}")
        return m[key]

    def int_(self, value, where: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(where, f"expected an integer, got {value!r}")
        return value

    def num(self, value, where: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(where, f"expected a number, got {value!r}")
        v = float(value)
        if not math.isfinite(v):
            self.fail(where, f"non-finite number {value!r}")
        return v

    def str_(self, value, where: str) -> str:
        if not isinstance(value, str):
            self.fail(where, f"expected a string, got {value!r}")
        return value

    def box(self, value, where: str) -> RotatedBox:
        m = self.obj(value, where)
        f = {k: self.num(self.get(m, k, where), f"{where}.{k}") for k in ("cx", "cy", "w", "h")}
        deg = self.num(m.get("angle_deg", 0.0), f"{where}.angle_deg")
        if not -180.0 < deg <= 180.0:
            self.fail(f"{where}.angle_deg", f"angle {deg} outside (-180, 180]")
        for k in ("w", "h"):
            if f[k] < 0:
                self.fail(f"{where}.{k}", f"negative extent {f[k]}")
        return RotatedBox(f["cx"], f["cy"], f["w"], f["h"], math.radians(deg))

    def pattern(self, value, where: str, allow_unknown: bool = False) -> str:
        ok = PATTERNS + ((UNKNOWN,) if allow_unknown else ())
        if value not in ok:
            self.fail(where, f"pattern must be one of {ok}, got {value!r}")
        return value


def box_to_dict(b: RotatedBox) -> dict:
    deg = math.degrees(b.angle)
    if deg <= -180.0:
        deg += 360.0
    return {"cx": b.cx, "cy": b.cy, "w": b.w, "h": b.h, "angle_deg": deg}


# -- documents ----------------------------------------------------------------

def document_to_dict(doc: Document) -> dict:
    return {
        "doc_id": doc.id,
        "lines": [
            {
                "id": ln.id,
                "box": box_to_dict(ln.box),
                "words": [{"id": w.id, "text": w.text, "box": box_to_dict(w.box)} for w in ln.words],
            }
            for ln in doc.lines
        ],
    }


def document_from_dict(data: Any, source: str = "<lines>", doc_id: str | None = None) -> Document:
    r = _Reader(source)
    m = r.obj(data, "$")
    lines_raw = r.arr(r.get(m, "lines", "$"), "$.lines")
    did = doc_id or (r.str_(m["doc_id"], "$.doc_id") if "doc_id" in m else Path(source).stem)
    lines = []
    seen_lines: set[int] = set()
    seen_words: set[int] = set()
    for k, raw in enumerate(lines_raw):
        at = f"$.lines[{k}]"
        lm = r.obj(raw, at)
        lid = r.int_(r.get(lm, "id", at), f"{at}.id")
        if lid in seen_lines:
            r.fail(f"{at}.id", f"duplicate line id {lid}")
        seen_lines.add(lid)
        box = r.box(r.get(lm, "box", at), f"{at}.box")
        words = []
        for j, wraw in enumerate(r.arr(lm.get("words", []), f"{at}.words")):
            wat = f"{at}.words[{j}]"
            wm = r.obj(wraw, wat)
            wid = r.int_(r.get(wm, "id", wat), f"{wat}.id")
            if wid in seen_words:
                r.fail(f"{wat}.id", f"duplicate word id {wid}")
            seen_words.add(wid)
            text = r.str_(wm.get("text", ""), f"{wat}.text")
            words.append(Word(wid, text, r.box(r.get(wm, "box", wat), f"{wat}.box")))
        lines.append(TextLine(lid, box, tuple(words)))
    return Document(tuple(lines), did)


def load_document(path: str | os.PathLike) -> Document:
    return document_from_dict(read_json(path), str(path))


# -- predictions --------------------------------------------------------------

def read_predictions_file(path: str | os.PathLike) -> dict:
    """Parse and shape-check a prediction file; graph checks happen later."""
    src = str(path)
    data = read_json(path)
    r = _Reader(src)
    m = r.obj(data, "$")
    for key, fields in (("nodes", ("line_id", "p_row")), ("edges", ("a", "b", "p_same_paragraph"))):
        for k, rec in enumerate(r.arr(r.get(m, key, "$"), f"$.{key}")):
            at = f"$.{key}[{k}]"
            rm = r.obj(rec, at)
            for f in fields:
                v = r.get(rm, f, at)
                if f.startswith("p_"):
                    v = r.num(v, f"{at}.{f}")
                    if not 0.0 <= v <= 1.0:
                        r.fail(f"{at}.{f}", f"score {v} outside [0, 1]")
                else:
                    r.int_(v, f"{at}.{f}")
    return m


# -- reading-order results ----------------------------------------------------

def result_to_dict(result: ReadingOrderResult, doc_id: str | None = None) -> dict:
    out: dict = {}
    if doc_id is not None:
        out["doc_id"] = doc_id
    out["paragraphs"] = [
        {"id": pid, "pattern": result.paragraph_patterns[pid], "line_ids": result.paragraph_lines[pid]}
        for pid in sorted(result.paragraph_lines)
    ]
    out["reading_order"] = list(result.paragraph_order)
    out["line_order"] = list(result.line_order)
    return out


def result_from_dict(data: Any, source: str = "<result>") -> tuple[str | None, ReadingOrderResult]:
    r = _Reader(source)
    m = r.obj(data, "$")
    doc_id = r.str_(m["doc_id"], "$.doc_id") if "doc_id" in m else None
    res = ReadingOrderResult()
    for k, raw in enumerate(r.arr(r.get(m, "paragraphs", "$"), "$.paragraphs")):
        at = f"$.paragraphs[{k}]"
        pm = r.obj(raw, at)
        pid = r.int_(r.get(pm, "id", at), f"{at}.id")
        if pid in res.paragraph_lines:
            r.fail(f"{at}.id", f"duplicate paragraph id {pid}")
        res.paragraph_patterns[pid] = r.pattern(r.get(pm, "pattern", at), f"{at}.pattern")
        ids = r.arr(r.get(pm, "line_ids", at), f"{at}.line_ids")
        res.paragraph_lines[pid] = [r.int_(v, f"{at}.line_ids[{j}]") for j, v in enumerate(ids)]
    order = r.arr(r.get(m, "reading_order", "$"), "$.reading_order")
    res.paragraph_order = [r.int_(v, f"$.reading_order[{j}]") for j, v in enumerate(order)]
    flat = r.arr(r.get(m, "line_order", "$"), "$.line_order")
    res.line_order = [r.int_(v, f"$.line_order[{j}]") for j, v in enumerate(flat)]

    if sorted(res.paragraph_order) != sorted(res.paragraph_lines):
        r.fail("$.reading_order", "must list every paragraph exactly once")
    joined = [lid for pid in res.paragraph_order for lid in res.paragraph_lines[pid]]
    if joined != res.line_order:
        r.fail("$.line_order", "does not equal the paragraph line lists in reading order")
    if len(set(joined)) != len(joined):
        r.fail("$.line_order", "repeats a line id")
    return doc_id, res


def load_result(path: str | os.PathLike) -> tuple[str | None, ReadingOrderResult]:
    return result_from_dict(read_json(path), str(path))


def check_result_matches(result: ReadingOrderResult, doc: Document, source: str = "<result>"):
    """Raise ConsistencyError unless ``result`` orders exactly the document's lines."""
    have = set(result.line_order)
    want = {ln.id for ln in doc.lines}
    if have != want:
        missing = sorted(want - have)
        extra = sorted(have - want)
        detail = f"missing line {missing[0]}" if missing else f"unknown line {extra[0]}"
        raise ConsistencyError(f"{source}: result does not match document {doc.id!r}: {detail}")


# -- annotations --------------------------------------------------------------

def annotations_to_dict(doc_id: str, truth: GroundTruth) -> dict:
    """Annotation file for a document with known truth: one group in truth order."""
    lines = truth.paragraph_lines()
    return {
        "doc_id": doc_id,
        "groups": [
            {
                "paragraphs": [
                    {
                        "id": p,
                        "box": box_to_dict(truth.paragraph_boxes[p]),
                        "pattern": truth.paragraph_pattern[p],
                        "line_ids": sorted(lines.get(p, [])),
                    }
                    for p in truth.paragraph_order
                ]
            }
        ],
    }


def groups_from_dict(data: Any, source: str = "<annotations>") -> tuple[str | None, list[AnnotatedGroup]]:
    """Annotated groups: ordered paragraphs, each with an id and a rotated box."""
    r = _Reader(source)
    m = r.obj(data, "$")
    doc_id = r.str_(m["doc_id"], "$.doc_id") if "doc_id" in m else None
    groups = []
    for g, raw in enumerate(r.arr(r.get(m, "groups", "$"), "$.groups")):
        at = f"$.groups[{g}]"
        gm = r.obj(raw, at)
        paras = r.arr(r.get(gm, "paragraphs", at), f"{at}.paragraphs")
        if not paras:
            r.fail(f"{at}.paragraphs", "a group needs at least one paragraph")
        ids, boxes = [], []
        for k, praw in enumerate(paras):
            pat = f"{at}.paragraphs[{k}]"
            pm = r.obj(praw, pat)
            pid = r.int_(r.get(pm, "id", pat), f"{pat}.id")
            if pid in ids:
                r.fail(f"{pat}.id", f"duplicate paragraph id {pid} in group")
            ids.append(pid)
            boxes.append(r.box(r.get(pm, "box", pat), f"{pat}.box"))
        groups.append(AnnotatedGroup(tuple(ids), tuple(boxes)))
    return doc_id, groups


def truth_from_dict(data: Any, source: str = "<annotations>") -> GroundTruth:
    """Ground truth from an annotation file whose paragraphs carry patterns and line ids."""
    r = _Reader(source)
    _, groups = groups_from_dict(data, source)
    line_paragraph: dict[int, int] = {}
    pattern: dict[int, str] = {}
    order: list[int] = []
    boxes = {}
    for g, gm in enumerate(data["groups"]):
        for k, pm in enumerate(gm["paragraphs"]):
            pat = f"$.groups[{g}].paragraphs[{k}]"
            pid = pm["id"]
            pattern[pid] = r.pattern(r.get(pm, "pattern", pat), f"{pat}.pattern")
            for j, lid in enumerate(r.arr(r.get(pm, "line_ids", pat), f"{pat}.line_ids")):
                r.int_(lid, f"{pat}.line_ids[{j}]")
                if lid in line_paragraph:
                    r.fail(f"{pat}.line_ids[{j}]", f"line {lid} assigned to two paragraphs")
                line_paragraph[lid] = pid
            order.append(pid)
            boxes[pid] = groups[g].boxes[k]
    return GroundTruth(line_paragraph, pattern, order, paragraph_boxes=boxes)


def load_groups(path: str | os.PathLike) -> tuple[str | None, list[AnnotatedGroup]]:
    return groups_from_dict(read_json(path), str(path))


def labels_to_list(labels: Sequence[tuple[int, str]]) -> list[dict]:
    return [{"paragraph_id": pid, "pattern": pat} for pid, pat in labels]


# -- dataset ------------------------------------------------------------------

def dataset_entry(doc_id: str, lines: str, annotations: str) -> dict:
    return {"id": doc_id, "lines": lines, "annotations": annotations}


def load_dataset(path: str | os.PathLike) -> list[tuple[Document, list[AnnotatedGroup]]]:
    """Documents with their annotated groups.

    ``{"documents": [{"id", "lines", "annotations"}]}`` where ``lines`` and
    ``annotations`` are paths relative to the dataset file.
    """
    src = str(path)
    base = Path(path).parent
    r = _Reader(src)
    m = r.obj(read_json(path), "$")
    out = []
    seen: set[str] = set()
    for k, raw in enumerate(r.arr(r.get(m, "documents", "$"), "$.documents")):
        at = f"$.documents[{k}]"
        dm = r.obj(raw, at)
        did = r.str_(r.get(dm, "id", at), f"{at}.id")
        if did in seen:
            r.fail(f"{at}.id", f"duplicate document id {did!r}")
        seen.add(did)
        lines_path = base / r.str_(r.get(dm, "lines", at), f"{at}.lines")
        ann_path = base / r.str_(r.get(dm, "annotations", at), f"{at}.annotations")
        doc = document_from_dict(read_json(lines_path), str(lines_path), doc_id=did)
        _, groups = load_groups(ann_path)
        out.append((doc, groups))
    return out


# -- graph, tree, features ----------------------------------------------------

def graph_to_dict(g: SkeletonGraph) -> dict:
    boxes = g.edge_boxes
    return {
        "nodes": list(g.node_ids),
        "edges": [
            {"a": a, "b": b, "box": box_to_dict(boxes[(a, b)])}
            for a, b in g.edges
        ],
    }
