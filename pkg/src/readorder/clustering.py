"""Hierarchical clustering of lines into paragraphs and pattern-typed clusters.

1. Lines joined by edges scored as same-paragraph form paragraphs.
2. Each paragraph takes the majority pattern of its lines.
3. Column-wise clusters merge across graph edges.
4. Row-wise clusters merge across graph edges and hop edges, which bridge
   sparse table cells that have no direct edge.
5. Each cluster gets a containing box at the circular mean of its
   paragraphs' angles.
6-8. Clusters nest inside the smallest larger cluster that covers most of
   their box; the rest hang off a synthetic column-wise root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .document import COL, ROW
from .geometry import (
    RotatedBox,
    array_to_boxes,
    boxes_to_array,
    containing_box,
    group_containing_boxes,
    intersection_area,
    rotated_aabbs,
)
from .signals import THRESHOLD, Predictions
from .skeleton import SkeletonGraph, edge_length

CONTAINMENT_T = 0.9


@dataclass(frozen=True)
class Paragraph:
    id: int
    line_ids: tuple[int, ...]
    box: RotatedBox
    pattern: str = COL


@dataclass
class Cluster:
    id: int
    paragraphs: tuple[int, ...]
    pattern: str
    box: RotatedBox | None
    children: list[int] = field(default_factory=list)


@dataclass
class ClusterTree:
    clusters: dict[int, Cluster]
    root: int
    paragraphs: dict[int, Paragraph]

    @property
    def root_cluster(self) -> Cluster:
        return self.clusters[self.root]

    def parent_of(self) -> dict[int, int]:
        return {ch: c.id for c in self.clusters.values() for ch in c.children}

    def walk(self) -> Iterator[tuple[int, Cluster]]:
        """Depth-first (depth, cluster) pairs from the root, children by id."""
        stack = [(0, self.root)]
        while stack:
            depth, cid = stack.pop()
            c = self.clusters[cid]
            yield depth, c
            for ch in sorted(c.children, reverse=True):
                stack.append((depth + 1, ch))

    def to_dict(self) -> dict:
        from .io import box_to_dict
        return {
            "root": self.root,
            "clusters": [
                {
                    "id": c.id,
                    "pattern": c.pattern,
                    "paragraphs": list(c.paragraphs),
                    "children": sorted(c.children),
                    "box": box_to_dict(c.box) if c.box is not None else None,
                }
                for c in sorted(self.clusters.values(), key=lambda c: c.id)
            ],
        }


def _components(n: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    g = sparse.coo_matrix((np.ones(len(i), dtype=np.int8), (i, j)), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return labels


def _relabel_by_min(labels: np.ndarray, keys: np.ndarray) -> tuple[np.ndarray, int]:
    """Renumber labels so groups are ordered by their smallest key."""
    if len(labels) == 0:
        return labels, 0
    n = int(labels.max()) + 1
    mins = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(mins, labels, keys)
    order = np.argsort(mins, kind="stable")
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    return rank[labels], n


def vote_pattern(p: Paragraph, preds: Predictions, threshold: float = THRESHOLD) -> str:
    """Majority vote of member lines; a tie goes to column-wise."""
    rows = sum(1 for lid in p.line_ids if preds.node_row_score[lid] >= threshold)
    return ROW if 2 * rows > len(p.line_ids) else COL


def paragraph_labels(graph: SkeletonGraph, preds: Predictions,
                     threshold: float = THRESHOLD) -> tuple[np.ndarray, int]:
    """Paragraph label per graph node, numbered by smallest member line id."""
    n = graph.n_nodes
    if graph.n_edges:
        keep = preds.edge_scores_for(graph) >= threshold
        e = graph.edge_index[keep]
    else:
        e = np.zeros((0, 2), dtype=np.int64)
    labels = _components(n, e[:, 0], e[:, 1])
    return _relabel_by_min(labels, np.asarray(graph.node_ids, dtype=np.int64))


def cluster_paragraphs(graph: SkeletonGraph, preds: Predictions, threshold: float = THRESHOLD,
                       vote_threshold: float = THRESHOLD) -> list[Paragraph]:
    """Connected components of edges scored >= ``threshold``, with voted patterns.

    Paragraph ids follow the smallest line id in each paragraph.
    """
    if graph.n_nodes == 0:
        return []
    labels, n_para = paragraph_labels(graph, preds, threshold)
    boxes = array_to_boxes(group_containing_boxes(graph.boxes, labels, n_para))
    is_row = (preds.node_scores_for(graph) >= vote_threshold).astype(float)
    rows = np.bincount(labels, weights=is_row, minlength=n_para)
    sizes = np.bincount(labels, minlength=n_para)
    members: list[list[int]] = [[] for _ in range(n_para)]
    for lid, lab in zip(graph.node_ids, labels.tolist()):
        members[lab].append(lid)
    return [
        Paragraph(k, tuple(members[k]), boxes[k], ROW if 2 * rows[k] > sizes[k] else COL)
        for k in range(n_para)
    ]


def _line_paragraph_index(paragraphs: Sequence[Paragraph], graph: SkeletonGraph) -> np.ndarray:
    lp = np.full(graph.n_nodes, -1, dtype=np.int64)
    index_of = graph.index_of
    for k, p in enumerate(paragraphs):
        for lid in p.line_ids:
            lp[index_of[lid]] = k
    if (lp < 0).any():
        missing = graph.node_ids[int(np.nonzero(lp < 0)[0][0])]
        raise ValueError(f"line {missing} belongs to no paragraph")
    return lp


def merge_clusters(paragraphs: Sequence[Paragraph], graph: SkeletonGraph,
                   max_edge_length: float | None = None) -> list[Cluster]:
    """Merge same-pattern paragraphs into clusters.

    Column-wise pairs merge over graph edges (optionally only edges no longer
    than ``max_edge_length``); row-wise pairs merge over graph edges and hop
    edges. Merging is a union of components, so edge order does not matter.
    """
    n_para = len(paragraphs)
    if n_para == 0:
        return []
    lp = _line_paragraph_index(paragraphs, graph)
    is_row = np.array([p.pattern == ROW for p in paragraphs])
    src, dst = [], []
    if graph.n_edges:
        e = graph.edge_index
        pa, pb = lp[e[:, 0]], lp[e[:, 1]]
        col = ~is_row[pa] & ~is_row[pb]
        if max_edge_length is not None:
            col &= edge_length(graph) <= max_edge_length
        row = is_row[pa] & is_row[pb]
        src += [pa[col], pa[row]]
        dst += [pb[col], pb[row]]

        row_nodes = np.nonzero(is_row[lp])[0]
        if len(row_nodes) > 1:
            adj = graph.adjacency()[row_nodes]
            two = (adj @ adj.T).tocoo()
            mask = two.row < two.col
            src.append(lp[row_nodes[two.row[mask]]])
            dst.append(lp[row_nodes[two.col[mask]]])
    i = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    j = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    labels = _components(n_para, i, j)
    labels, n_clusters = _relabel_by_min(labels, np.array([p.id for p in paragraphs], dtype=np.int64))

    box_arr = group_containing_boxes(boxes_to_array([p.box for p in paragraphs]), labels, n_clusters)
    boxes = array_to_boxes(box_arr)
    cluster_row = np.zeros(n_clusters, dtype=bool)
    cluster_row[labels] = is_row
    members: list[list[int]] = [[] for _ in range(n_clusters)]
    for p, lab in zip(paragraphs, labels.tolist()):
        members[lab].append(p.id)
    return [
        Cluster(k, tuple(sorted(members[k])), ROW if cluster_row[k] else COL, boxes[k])
        for k in range(n_clusters)
    ]


def build_hierarchy(clusters: Sequence[Cluster], paragraphs: Sequence[Paragraph] = (),
                    containment: float = CONTAINMENT_T) -> ClusterTree:
    """Nest clusters by box containment and add a column-wise root.

    Clusters are visited by ascending box area. A cluster becomes the child of
    the smallest strictly larger cluster whose box covers more than
    ``containment`` of its own box area.
    """
    clusters = [Cluster(c.id, c.paragraphs, c.pattern, c.box, []) for c in clusters]
    by_id = {c.id: c for c in clusters}
    root_id = max(by_id, default=-1) + 1
    areas = np.array([c.box.area for c in clusters], dtype=float)
    order = sorted(range(len(clusters)), key=lambda k: (areas[k], clusters[k].id))
    if clusters:
        aa = rotated_aabbs(boxes_to_array([c.box for c in clusters]), 0.0)
    attached: set[int] = set()
    for k in order:
        ci = clusters[k]
        if areas[k] <= 0:
            continue
        # circumscribed axis-aligned boxes must overlap
        cand = np.nonzero(
            (areas > areas[k])
            & (aa[:, 0] < aa[k, 1]) & (aa[:, 1] > aa[k, 0])
            & (aa[:, 2] < aa[k, 3]) & (aa[:, 3] > aa[k, 2])
        )[0]
        best = None
        for m in sorted(cand.tolist(), key=lambda m: (areas[m], clusters[m].id)):
            if intersection_area(ci.box, clusters[m].box) > containment * areas[k]:
                best = clusters[m]
                break
        if best is not None:
            best.children.append(ci.id)
            attached.add(ci.id)
    top = [c.id for c in clusters if c.id not in attached]
    root_box = containing_box([by_id[c].box for c in top]) if top else None
    root = Cluster(root_id, (), COL, root_box, top)
    all_clusters = {c.id: c for c in clusters}
    all_clusters[root_id] = root
    for c in clusters:
        c.children.sort()
    return ClusterTree(all_clusters, root_id, {p.id: p for p in paragraphs})


def hierarchical_clustering(graph: SkeletonGraph, preds: Predictions, threshold: float = THRESHOLD,
                            vote_threshold: float = THRESHOLD, containment: float = CONTAINMENT_T,
                            max_edge_length: float | None = None) -> ClusterTree:
    paragraphs = cluster_paragraphs(graph, preds, threshold, vote_threshold)
    clusters = merge_clusters(paragraphs, graph, max_edge_length)
    return build_hierarchy(clusters, paragraphs, containment)
