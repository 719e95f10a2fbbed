"""Reading order for OCR text lines.

Lines are linked by a Gabriel graph over their box centers. Per-line pattern
scores and per-edge paragraph scores (from any classifier, or the built-in
stand-ins) drive paragraph clustering, a containment hierarchy of column-wise
and row-wise clusters, and a rotation-normalized topological sort.
"""

from .document import COL, ROW, AnnotatedGroup, Document, GroundTruth, TextLine, Word
from .geometry import AABox, RotatedBox, circular_mean, intersection_area
from .labeling import label_patterns, pair_relation
from .metrics import EvalDocument, EvalReport, evaluate, group_distance
from .ordering import OrderConfig, ReadingOrderResult, read_order_pipeline, sort_within
from .signals import Predictions, constant_predictor, load_predictions, oracle_predictor
from .skeleton import SkeletonGraph, build_skeleton, hop_edges
from .synthgen import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AABox",
    "AnnotatedGroup",
    "COL",
    "Document",
    "EvalDocument",
    "EvalReport",
    "GroundTruth",
    "OrderConfig",
    "Predictions",
    "ROW",
    "ReadingOrderResult",
    "RotatedBox",
    "SkeletonGraph",
    "SynthConfig",
    "TextLine",
    "Word",
    "build_skeleton",
    "circular_mean",
    "constant_predictor",
    "evaluate",
    "generate",
    "group_distance",
    "hop_edges",
    "intersection_area",
    "label_patterns",
    "load_predictions",
    "oracle_predictor",
    "pair_relation",
    "read_order_pipeline",
    "sort_within",
]
