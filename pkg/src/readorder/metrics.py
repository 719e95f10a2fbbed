"""Normalized word-level Levenshtein distance between annotated and produced order.

For an annotated group, ``W`` is the list of OCR words falling inside the
group's paragraphs, in annotated paragraph order. The produced order ``S`` is
the serialized OCR output. The score is the insertion/deletion edit distance
between ``W`` and the shortest window of ``S`` holding all of ``W``, divided
by ``len(W)``.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .document import AnnotatedGroup, Document
from .ordering import ReadingOrderResult

log = logging.getLogger(__name__)


class EvaluationError(ValueError):
    pass


def serialize_words(result: ReadingOrderResult, doc: Document) -> list[int]:
    """Word ids paragraph by paragraph, line by line, in OCR order within a line."""
    lines = doc.line_map
    return [w.id for pid in result.paragraph_order
            for lid in result.paragraph_lines[pid]
            for w in lines[lid].words]


def group_words(group: AnnotatedGroup, doc: Document) -> list[int]:
    """Words whose box center lies in one of the group's paragraphs.

    Paragraphs are visited in annotated order, and a word inside several
    paragraphs goes to the first. Within a paragraph words keep OCR order.
    """
    words = doc.words
    if not words:
        return []
    ids = np.array([w.id for w in words])
    pts = np.array([(w.box.cx, w.box.cy) for w in words], dtype=float)
    free = np.ones(len(words), dtype=bool)
    out: list[int] = []
    for pid, box in zip(group.paragraph_ids, group.boxes):
        c, s = math.cos(box.angle), math.sin(box.angle)
        dx, dy = pts[:, 0] - box.cx, pts[:, 1] - box.cy
        inside = free & (np.abs(c * dx + s * dy) <= box.w / 2 + 1e-6) \
            & (np.abs(-s * dx + c * dy) <= box.h / 2 + 1e-6)
        if not inside.any():
            log.warning("paragraph %s of document %s contains no words; skipped", pid, doc.id)
            continue
        free &= ~inside
        out.extend(ids[inside].tolist())
    return out


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    """Longest common subsequence of two duplicate-free sequences.

    With unique ids the LCS is the longest increasing run of ``a``-positions
    read in ``b`` order, found by patience sorting in O(n log n).
    """
    pos = {x: k for k, x in enumerate(a)}
    tails: list[int] = []
    for x in b:
        k = pos.get(x)
        if k is None:
            continue
        i = bisect.bisect_left(tails, k)
        if i == len(tails):
            tails.append(k)
        else:
            tails[i] = k
    return len(tails)


def indel_distance(a: Sequence[int], b: Sequence[int]) -> int:
    return len(a) + len(b) - 2 * lcs_length(a, b)


def minimal_window(W: Sequence[int], S: Sequence[int]) -> tuple[list[int], bool]:
    """Span of ``S`` from the first to the last word of ``W``.

    Returns (window, complete). If a word of ``W`` is missing from ``S`` the
    window is all of ``S`` and ``complete`` is False.
    """
    wanted = set(W)
    hits = [k for k, x in enumerate(S) if x in wanted]
    if len(hits) < len(wanted):
        return list(S), False
    return list(S[hits[0]:hits[-1] + 1]), True


def group_distance(W: Sequence[int], S: Sequence[int]) -> float:
    """Normalized indel distance of ``W`` against its window in ``S``."""
    return group_distance_detail(W, S)[0]


def group_distance_detail(W: Sequence[int], S: Sequence[int]) -> tuple[float, bool]:
    if not W:
        raise EvaluationError("annotated word list is empty")
    if len(set(W)) != len(W) or len(set(S)) != len(S):
        raise EvaluationError("word sequences must not repeat ids")
    window, complete = minimal_window(W, S)
    return indel_distance(window, W) / len(W), complete


@dataclass
class GroupScore:
    doc_id: str
    group_index: int
    distance: float
    n_words: int
    incomplete: bool = False


@dataclass
class EvalReport:
    groups: list[GroupScore] = field(default_factory=list)
    doc_means: dict[str, float] = field(default_factory=dict)
    micro_average: float = 0.0
    macro_average: float = 0.0

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_words(self) -> int:
        return sum(g.n_words for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "micro_average": self.micro_average,
            "macro_average": self.macro_average,
            "n_groups": self.n_groups,
            "n_words": self.n_words,
            "documents": [{"doc_id": d, "mean_distance": m} for d, m in self.doc_means.items()],
            "groups": [
                {"doc_id": g.doc_id, "group": g.group_index, "distance": g.distance,
                 "n_words": g.n_words, "incomplete": g.incomplete}
                for g in self.groups
            ],
        }


@dataclass
class EvalDocument:
    doc: Document
    groups: list[AnnotatedGroup]

    @property
    def id(self) -> str:
        return self.doc.id


def aggregate(scores: Sequence[GroupScore]) -> EvalReport:
    report = EvalReport(groups=list(scores))
    by_doc: dict[str, list[float]] = {}
    for g in scores:
        by_doc.setdefault(g.doc_id, []).append(g.distance)
    report.doc_means = {d: sum(v) / len(v) for d, v in by_doc.items()}
    total = sum(g.n_words for g in scores)
    if total:
        report.micro_average = sum(g.distance * g.n_words for g in scores) / total
        report.macro_average = sum(g.distance for g in scores) / len(scores)
    return report


def evaluate(dataset: Sequence[EvalDocument],
             results: Mapping[str, ReadingOrderResult]) -> EvalReport:
    """Score every annotated group of every document.

    The headline number is the word-weighted (micro) average.
    """
    if not dataset:
        raise EvaluationError("empty dataset")
    scores = []
    for item in dataset:
        if item.id not in results:
            raise EvaluationError(f"no result for document {item.id!r}")
        S = serialize_words(results[item.id], item.doc)
        for k, group in enumerate(item.groups):
            W = group_words(group, item.doc)
            if not W:
                continue
            d, complete = group_distance_detail(W, S)
            scores.append(GroupScore(item.id, k, d, len(W), not complete))
    return aggregate(scores)


def format_table(reports: Mapping[str, EvalReport]) -> str:
    """Plain-text table of method name and micro-averaged distance."""
    width = max([len("method")] + [len(m) for m in reports])
    lines = [f"{'method':<{width}}  distance  groups  words"]
    for name, rep in reports.items():
        lines.append(f"{name:<{width}}  {rep.micro_average:8.3f}  {rep.n_groups:6d}  {rep.n_words:5d}")
    return "\n".join(lines)
