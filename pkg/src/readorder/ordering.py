"""Bidimensional topological sort and cluster-tree traversal.

Within a cluster all unit boxes are rotated by minus their circular-mean
angle, so the sort runs on axis-aligned boxes in the cluster's own frame.
Column-wise: ``i`` precedes ``j`` when their x-intervals overlap and ``i`` is
higher. Row-wise: ``i`` precedes ``j`` when their y-intervals overlap and
``i`` is further left. Every constraint strictly increases the center
coordinate on the sort axis, so the constraint graph is acyclic.

Among units free to go next, the one earliest in the seed order (ascending
x-center for column-wise, ascending y-center for row-wise) is emitted, i.e.
the result is the lexicographically smallest topological order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .clustering import (
    CONTAINMENT_T,
    Cluster,
    ClusterTree,
    Paragraph,
    build_hierarchy,
    cluster_paragraphs,
    merge_clusters,
)
from .document import COL, PATTERNS, ROW, Document
from .geometry import RotatedBox, boxes_to_array, circular_mean, rotated_aabbs
from .signals import THRESHOLD, Predictions
from .skeleton import SkeletonGraph, build_skeleton


class OrderCycleError(RuntimeError):
    """Constraint graph had a cycle; cannot happen for finite boxes."""


@dataclass(frozen=True)
class OrderConfig:
    edge_threshold: float = THRESHOLD
    pattern_threshold: float = THRESHOLD
    containment: float = CONTAINMENT_T
    max_merge_edge_length: float | None = None


@dataclass
class ReadingOrderResult:
    paragraph_order: list[int] = field(default_factory=list)
    paragraph_lines: dict[int, list[int]] = field(default_factory=dict)
    paragraph_patterns: dict[int, str] = field(default_factory=dict)
    line_order: list[int] = field(default_factory=list)

    def paragraph_of_line(self) -> dict[int, int]:
        return {lid: p for p, lines in self.paragraph_lines.items() for lid in lines}


def _frame_aabbs(arr: np.ndarray) -> np.ndarray:
    """Axis-aligned boxes after rotating by minus the circular-mean angle."""
    return rotated_aabbs(arr, -circular_mean(arr[:, 4]))


def order_constraints(aa: np.ndarray, pattern: str) -> tuple[np.ndarray, np.ndarray]:
    """Directed constraints ``src[k] -> dst[k]`` among axis-aligned boxes.

    ``aa`` rows are (x_min, x_max, y_min, y_max). Overlap must be strictly
    positive and the sort-axis centers strictly ordered. Overlapping pairs
    are found with a sort-and-sweep, so the cost is O(n log n + pairs).
    """
    if pattern == COL:
        lo, hi = aa[:, 0], aa[:, 1]
        key = 0.5 * (aa[:, 2] + aa[:, 3])
    elif pattern == ROW:
        lo, hi = aa[:, 2], aa[:, 3]
        key = 0.5 * (aa[:, 0] + aa[:, 1])
    else:
        raise ValueError(f"pattern must be one of {PATTERNS}, got {pattern!r}")
    n = len(aa)
    empty = np.zeros(0, dtype=np.int64)
    if n < 2:
        return empty, empty
    order = np.argsort(lo, kind="stable")
    slo, shi = lo[order], hi[order]
    end = np.searchsorted(slo, shi, side="left")
    start = np.arange(1, n + 1)
    counts = np.maximum(end - start, 0)
    total = int(counts.sum())
    if total == 0:
        return empty, empty
    p = np.repeat(np.arange(n), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    q = np.repeat(start, counts) + offsets
    a, b = order[p], order[q]
    overlap = np.minimum(hi[a], hi[b]) - np.maximum(lo[a], lo[b])
    keep = overlap > 0
    a, b = a[keep], b[keep]
    fwd = key[a] < key[b]
    back = key[b] < key[a]
    src = np.concatenate([a[fwd], b[back]])
    dst = np.concatenate([b[fwd], a[back]])
    return src, dst


def seed_order(aa: np.ndarray, pattern: str, tie: np.ndarray | None = None) -> np.ndarray:
    """Indices by sort-axis center, then cross-axis center, then ``tie``."""
    xc = 0.5 * (aa[:, 0] + aa[:, 1])
    yc = 0.5 * (aa[:, 2] + aa[:, 3])
    if tie is None:
        tie = np.arange(len(aa))
    if pattern == COL:
        return np.lexsort((tie, yc, xc))
    return np.lexsort((tie, xc, yc))


def stable_toposort(n: int, src: np.ndarray, dst: np.ndarray, seed: np.ndarray) -> list[int]:
    """Kahn's algorithm, always emitting the free node earliest in ``seed``."""
    rank = np.empty(n, dtype=np.int64)
    rank[seed] = np.arange(n)
    indeg = np.bincount(dst, minlength=n).tolist()
    by_src = np.argsort(src, kind="stable")
    targets = dst[by_src].tolist()
    bounds = np.searchsorted(src[by_src], np.arange(n + 1)).tolist()
    rank_l = rank.tolist()
    seed_l = seed.tolist()
    heap = [rank_l[i] for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        u = seed_l[heapq.heappop(heap)]
        out.append(u)
        for v in targets[bounds[u]:bounds[u + 1]]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, rank_l[v])
    if len(out) != n:
        raise OrderCycleError(f"constraint cycle among {n - len(out)} units")
    return out


def sort_array(arr: np.ndarray, pattern: str, tie: np.ndarray | None = None) -> list[int]:
    """Reading order of an (n, 5) box array; returns a permutation of row indices."""
    n = len(arr)
    if n == 0:
        return []
    if n == 1:
        return [0]
    aa = _frame_aabbs(arr)
    src, dst = order_constraints(aa, pattern)
    return stable_toposort(n, src, dst, seed_order(aa, pattern, tie))


def sort_within(boxes: Sequence[RotatedBox], pattern: str,
                ids: Sequence[int] | None = None) -> list[int]:
    """Order ``boxes`` under ``pattern``; returns indices into ``boxes``.

    ``ids`` break exact ties in the seed order (default: input position).
    """
    if not boxes:
        raise ValueError("sort_within needs at least one box")
    tie = None if ids is None else np.asarray(ids, dtype=np.int64)
    return sort_array(boxes_to_array(boxes), pattern, tie)


def order_lines_in_paragraph(p: Paragraph, line_boxes: Mapping[int, RotatedBox]) -> list[int]:
    """Lines of a paragraph, top to bottom in the paragraph's own frame."""
    ids = list(p.line_ids)
    if len(ids) == 1:
        return ids
    perm = sort_within([line_boxes[i] for i in ids], COL, ids)
    return [ids[k] for k in perm]


def traverse(tree: ClusterTree, line_boxes: Mapping[int, RotatedBox]) -> ReadingOrderResult:
    """Flatten the cluster tree into a reading order.

    Each cluster sorts its own paragraphs together with its child clusters,
    the children taking part as opaque boxes, under the cluster's pattern.
    Children are expanded in place.
    """
    paragraphs = tree.paragraphs
    result = ReadingOrderResult()

    def emit(cluster: Cluster):
        units = [(0, pid, paragraphs[pid].box) for pid in sorted(cluster.paragraphs)]
        units += [(1, cid, tree.clusters[cid].box) for cid in sorted(cluster.children)]
        if not units:
            return
        perm = sort_array(boxes_to_array([u[2] for u in units]), cluster.pattern)
        for k in perm:
            kind, uid, _ = units[k]
            if kind == 1:
                emit(tree.clusters[uid])
                continue
            p = paragraphs[uid]
            lines = order_lines_in_paragraph(p, line_boxes)
            result.paragraph_order.append(uid)
            result.paragraph_lines[uid] = lines
            result.paragraph_patterns[uid] = p.pattern
            result.line_order.extend(lines)

    emit(tree.root_cluster)
    return result


@dataclass
class PipelineTrace:
    graph: SkeletonGraph
    paragraphs: list[Paragraph]
    clusters: list[Cluster]
    tree: ClusterTree
    result: ReadingOrderResult


def cluster_and_sort(doc: Document, preds: Predictions, config: OrderConfig = OrderConfig(),
                     graph: SkeletonGraph | None = None) -> PipelineTrace:
    """Run the full pipeline and keep every intermediate product."""
    if graph is None:
        graph = build_skeleton(doc.lines)
    paragraphs = cluster_paragraphs(graph, preds, config.edge_threshold, config.pattern_threshold)
    clusters = merge_clusters(paragraphs, graph, config.max_merge_edge_length)
    tree = build_hierarchy(clusters, paragraphs, config.containment)
    line_boxes = {ln.id: ln.box for ln in doc.lines}
    return PipelineTrace(graph, paragraphs, clusters, tree, traverse(tree, line_boxes))


def read_order_pipeline(doc: Document, preds: Predictions, config: OrderConfig = OrderConfig(),
                        graph: SkeletonGraph | None = None) -> ReadingOrderResult:
    if not doc.lines:
        return ReadingOrderResult()
    return cluster_and_sort(doc, preds, config, graph).result
