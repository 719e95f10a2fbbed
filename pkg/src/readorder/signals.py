"""Classifier boundary: node features, prediction files and stand-in predictors.

The pipeline only needs two kinds of scores: per line, the probability that
the line is read row-wise; per graph edge, the probability that both lines
belong to the same paragraph. Any model that writes them in the prediction
file format can drive the pipeline. The predictors here are the constant
baselines and a perfect classifier read off ground truth.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .document import COL, PATTERNS, ROW, Document, GroundTruth, TextLine
from .geometry import corners
from .skeleton import SkeletonGraph

THRESHOLD = 0.5


class PredictionError(ValueError):
    """Prediction data is malformed or out of range."""


class PredictionMismatch(PredictionError):
    """Prediction data names lines or edges that disagree with the graph."""


@dataclass
class Predictions:
    node_row_score: dict[int, float]
    edge_same_para_score: dict[tuple[int, int], float]

    def node_scores_for(self, graph: SkeletonGraph) -> np.ndarray:
        return np.array([self.node_row_score[i] for i in graph.node_ids], dtype=float)

    def edge_scores_for(self, graph: SkeletonGraph) -> np.ndarray:
        s = self.edge_same_para_score
        return np.array([s[e] for e in graph.edges], dtype=float)


def node_spatial_features(line: TextLine) -> np.ndarray:
    """Spatial features of one line box, 24 floats.

    Layout: the 8 corner coordinates ``x0, y0, ..., x3, y3`` (top-left first,
    then top-right, bottom-right, bottom-left in the box frame), then those 8
    values times ``cos(angle)``, then times ``sin(angle)``.
    """
    raw = corners(line.box).reshape(-1)
    c, s = math.cos(line.box.angle), math.sin(line.box.angle)
    return np.concatenate([raw, raw * c, raw * s])


def feature_matrix(doc: Document) -> np.ndarray:
    if not doc.lines:
        return np.zeros((0, 24))
    return np.stack([node_spatial_features(ln) for ln in doc.lines])


def _edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _check_score(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PredictionError(f"{what}: score must be a number, got {value!r}")
    v = float(value)
    if not (0.0 <= v <= 1.0):
        raise PredictionError(f"{what}: score {v} outside [0, 1]")
    return v


def predictions_from_dict(data: Mapping, graph: SkeletonGraph) -> Predictions:
    """Validate a parsed prediction file against ``graph``."""
    if not isinstance(data, Mapping) or "nodes" not in data or "edges" not in data:
        raise PredictionError("prediction data needs 'nodes' and 'edges' arrays")
    nodes: dict[int, float] = {}
    for rec in data["nodes"]:
        try:
            lid = int(rec["line_id"])
            p = rec["p_row"]
        except (KeyError, TypeError, ValueError) as exc:
            raise PredictionError(f"bad node record {rec!r}") from exc
        nodes[lid] = _check_score(p, f"node {lid}")
    edges: dict[tuple[int, int], float] = {}
    for rec in data["edges"]:
        try:
            key = _edge_key(int(rec["a"]), int(rec["b"]))
            p = rec["p_same_paragraph"]
        except (KeyError, TypeError, ValueError) as exc:
            raise PredictionError(f"bad edge record {rec!r}") from exc
        edges[key] = _check_score(p, f"edge {key}")

    known_nodes = set(graph.node_ids)
    for lid in graph.node_ids:
        if lid not in nodes:
            raise PredictionMismatch(f"missing node score {lid}")
    extra = sorted(set(nodes) - known_nodes)
    if extra:
        raise PredictionMismatch(f"node score for unknown line {extra[0]}")
    for e in graph.edges:
        if e not in edges:
            raise PredictionMismatch(f"missing edge score ({e[0]},{e[1]})")
    known_edges = set(graph.edges)
    extra_e = sorted(set(edges) - known_edges)
    if extra_e:
        a, b = extra_e[0]
        raise PredictionMismatch(f"edge score for non-graph edge ({a},{b})")
    return Predictions(nodes, edges)


def load_predictions(doc: Document, graph: SkeletonGraph, source) -> Predictions:
    """Load and validate predictions for ``doc``.

    ``source`` may be a path, an open file, or an already parsed mapping.
    """
    if isinstance(source, Mapping):
        data = source
    elif isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = json.load(source)
    if tuple(graph.node_ids) != tuple(ln.id for ln in doc.lines):
        raise PredictionMismatch("graph does not belong to this document")
    return predictions_from_dict(data, graph)


def predictions_to_dict(preds: Predictions) -> dict:
    nodes = [{"line_id": lid, "p_row": preds.node_row_score[lid]}
             for lid in sorted(preds.node_row_score)]
    edges = [{"a": a, "b": b, "p_same_paragraph": preds.edge_same_para_score[(a, b)]}
             for a, b in sorted(preds.edge_same_para_score)]
    return {"nodes": nodes, "edges": edges}


def constant_predictor(doc: Document, graph: SkeletonGraph, pattern: str = COL,
                       same_para: bool = False) -> Predictions:
    """Same scores everywhere.

    ``(col, False)`` is the all-column-wise baseline: every line is its own
    paragraph and everything is sorted column-wise.
    """
    if pattern not in PATTERNS:
        raise ValueError(f"pattern must be one of {PATTERNS}, got {pattern!r}")
    p = 1.0 if pattern == ROW else 0.0
    e = 1.0 if same_para else 0.0
    return Predictions({ln.id: p for ln in doc.lines}, {edge: e for edge in graph.edges})


def oracle_predictor(doc: Document, graph: SkeletonGraph, truth: GroundTruth) -> Predictions:
    """A perfect classifier derived from ground truth."""
    para = truth.line_paragraph
    nodes = {}
    for ln in doc.lines:
        if ln.id not in para:
            raise PredictionError(f"line {ln.id} has no ground-truth paragraph")
        pattern = truth.paragraph_pattern[para[ln.id]]
        nodes[ln.id] = 1.0 if pattern == ROW else 0.0
    edges = {(a, b): 1.0 if para[a] == para[b] else 0.0 for a, b in graph.edges}
    return Predictions(nodes, edges)
