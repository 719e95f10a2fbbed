"""Sparse proximity graph over text lines.

The graph is the beta = 1 skeleton (Gabriel graph) of the line-box centers:
lines ``i`` and ``j`` are joined iff no other center lies strictly inside the
disk having segment ``(c_i, c_j)`` as diameter. A center exactly on that
circle does not block the edge.

Construction uses a Delaunay triangulation for candidate pairs and a k-d tree
for the emptiness check, so it runs in O(n log n). The brute-force O(n^3)
construction is kept as the reference and must give the same edge set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import Delaunay, QhullError, cKDTree

from .document import TextLine
from .geometry import (
    RotatedBox,
    array_to_boxes,
    boxes_to_array,
    containing_box,
    group_containing_boxes,
)

DUPLICATE_EPS = 1e-6
GABRIEL_TOL = 1e-9
# looser than GABRIEL_TOL; only widens the candidate set
_COCIRCULAR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SkeletonGraph:
    """Undirected graph over line ids.

    ``edge_index`` holds node positions (indices into ``node_ids``), one row
    per edge with the smaller line id first; rows are sorted by id pair.
    """

    node_ids: tuple[int, ...]
    edge_index: np.ndarray
    boxes: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_index)

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {lid: k for k, lid in enumerate(self.node_ids)}

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        ids = self.node_ids
        return tuple((ids[i], ids[j]) for i, j in self.edge_index.tolist())

    @cached_property
    def edge_boxes(self) -> dict[tuple[int, int], RotatedBox]:
        arr = edge_boxes_array(self.boxes, self.edge_index)
        return dict(zip(self.edges, array_to_boxes(arr)))

    def adjacency(self) -> sparse.csr_matrix:
        n = self.n_nodes
        i, j = self.edge_index.T if self.n_edges else (np.zeros(0, int), np.zeros(0, int))
        data = np.ones(2 * len(i), dtype=np.int32)
        return sparse.csr_matrix(
            (data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))

    def neighbors(self, line_id: int) -> list[int]:
        adj = self.adjacency()
        k = self.index_of[line_id]
        return sorted(self.node_ids[j] for j in adj.indices[adj.indptr[k]:adj.indptr[k + 1]])

    def components(self) -> list[list[int]]:
        """Connected components as sorted lists of line ids."""
        if self.n_nodes == 0:
            return []
        _, labels = connected_components(self.adjacency(), directed=False)
        comps: dict[int, list[int]] = {}
        for lid, lab in zip(self.node_ids, labels.tolist()):
            comps.setdefault(lab, []).append(lid)
        return sorted((sorted(c) for c in comps.values()), key=lambda c: c[0])


def node_centers(lines: Sequence[TextLine]) -> np.ndarray:
    """Line-box centers with exact duplicates separated deterministically.

    Every line sharing a center with another is shifted by ``(id * 1e-6, 0)``.
    """
    pts = np.array([(ln.box.cx, ln.box.cy) for ln in lines], dtype=float).reshape(-1, 2)
    seen: dict[tuple[float, float], list[int]] = {}
    for k, (x, y) in enumerate(pts.tolist()):
        seen.setdefault((x, y), []).append(k)
    for members in seen.values():
        if len(members) > 1:
            for k in members:
                pts[k, 0] += lines[k].id * DUPLICATE_EPS
    return pts


def _blocked(pts: np.ndarray, i: int, j: int, witnesses: np.ndarray) -> bool:
    """True if some witness lies strictly inside the diametral disk of (i, j)."""
    if len(witnesses) == 0:
        return False
    pi, pj = pts[i], pts[j]
    d2 = float(np.sum((pi - pj) ** 2))
    w = pts[witnesses]
    dots = np.einsum("ij,ij->i", w - pi, w - pj)
    return bool(np.any(dots < -GABRIEL_TOL * d2))


def gabriel_edges_bruteforce(pts: np.ndarray) -> set[tuple[int, int]]:
    """Reference O(n^3) Gabriel graph on point indices."""
    n = len(pts)
    out = set()
    idx = np.arange(n)
    for i, j in itertools.combinations(range(n), 2):
        others = idx[(idx != i) & (idx != j)]
        if not _blocked(pts, i, j, others):
            out.add((i, j))
    return out


def _collinear_order(pts: np.ndarray) -> np.ndarray | None:
    """Order of points along their common line, or None if not collinear."""
    centered = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(sv[0], 1e-300)
    if len(sv) > 1 and sv[1] > 1e-9 * scale:
        return None
    return np.argsort(centered @ vt[0], kind="stable")


def _delaunay_candidates(pts: np.ndarray) -> np.ndarray | None:
    """Candidate pairs: Delaunay edges plus all chords of cocircular cells."""
    try:
        tri = Delaunay(pts)
    except QhullError:
        return None
    simp = tri.simplices
    pairs = [simp[:, [0, 1]], simp[:, [1, 2]], simp[:, [0, 2]]]

    # merge adjacent triangles that share a circumcircle; their union is a
    # single Delaunay cell whose chords may all be Gabriel edges
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    centers, radii = _circumcircles(a, b, c)
    nbr = tri.neighbors
    t_idx, slot = np.nonzero(nbr >= 0)
    u_idx = nbr[t_idx, slot]
    keep = t_idx < u_idx
    t_idx, slot, u_idx = t_idx[keep], slot[keep], u_idx[keep]
    if len(t_idx):
        # neighbors[t, k] lies across the edge opposite vertex k of t
        shared_sum = simp[t_idx].sum(axis=1) - simp[t_idx, slot]
        opp = simp[u_idx].sum(axis=1) - shared_sum
        dist = np.hypot(*(pts[opp] - centers[t_idx]).T)
        r = radii[t_idx]
        close = ~np.isfinite(r) | (np.abs(dist - r) <= _COCIRCULAR_TOL * r)
        if close.any():
            m = len(simp)
            g = sparse.coo_matrix(
                (np.ones(close.sum()), (t_idx[close], u_idx[close])), shape=(m, m))
            n_cells, labels = connected_components(g, directed=False)
            sizes = np.bincount(labels, minlength=n_cells)
            # two-triangle cells: the only new chord is the flipped diagonal
            quad = close & (sizes[labels[t_idx]] == 2)
            pairs.append(np.stack([simp[t_idx[quad], slot[quad]], opp[quad]], axis=1))
            for cell in np.nonzero(sizes > 2)[0]:
                verts = np.unique(simp[labels == cell])
                pairs.append(np.array(list(itertools.combinations(verts.tolist(), 2)), dtype=int))
    # points qhull left out (near-duplicates) get every incident pair
    dropped = np.unique(tri.coplanar[:, 0]) if len(tri.coplanar) else ()
    n = len(pts)
    for k in dropped:
        others = np.delete(np.arange(n), k)
        pairs.append(np.stack([np.full(n - 1, k), others], axis=1))
    allp = np.concatenate(pairs, axis=0)
    allp.sort(axis=1)
    return np.unique(allp, axis=0)


def _circumcircles(a, b, c):
    # relative to a, for precision at large page coordinates
    bx, by = (b - a).T
    cx, cy = (c - a).T
    d = 2.0 * (bx * cy - by * cx)
    with np.errstate(divide="ignore", invalid="ignore"):
        b2, c2 = bx * bx + by * by, cx * cx + cy * cy
        ux = (cy * b2 - by * c2) / d
        uy = (bx * c2 - cx * b2) / d
        r = np.hypot(ux, uy)
    return np.stack([ux, uy], axis=1) + a, r


def _verify(pts: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """Keep candidate pairs whose diametral disk is empty.

    A point k blocks (i, j) iff ``|k - mid|^2 < r^2 - tol * d^2``, so only the
    nearest point to the midpoint other than i and j needs checking. Among the
    three nearest neighbors of the midpoint at least one is neither endpoint.
    """
    if len(cand) == 0:
        return cand
    n = len(pts)
    pi, pj = pts[cand[:, 0]], pts[cand[:, 1]]
    if n <= 2:
        return cand
    tree = cKDTree(pts)
    mid = 0.5 * (pi + pj)
    d2 = np.sum((pi - pj) ** 2, axis=1)
    _, nn = tree.query(mid, k=3)
    nn = np.where((nn == cand[:, :1]) | (nn == cand[:, 1:]), n, nn)
    first = np.argmin(nn == n, axis=1)
    k = nn[np.arange(len(cand)), first]
    w = pts[k]
    dots = np.einsum("ij,ij->i", w - pi, w - pj)
    return cand[dots >= -GABRIEL_TOL * d2]


def gabriel_edges(pts: np.ndarray) -> np.ndarray:
    """Gabriel graph edges on point indices as an (m, 2) array, i < j."""
    n = len(pts)
    if n < 2:
        return np.zeros((0, 2), dtype=int)
    if n <= 3:
        cand = np.array(list(itertools.combinations(range(n), 2)), dtype=int)
    else:
        cand = _delaunay_candidates(pts)
        if cand is None:
            order = _collinear_order(pts)
            if order is not None:
                cand = np.sort(np.stack([order[:-1], order[1:]], axis=1), axis=1)
            else:
                cand = np.array(list(itertools.combinations(range(n), 2)), dtype=int)
    return _verify(pts, cand)


def build_skeleton(lines: Sequence[TextLine], method: str = "fast") -> SkeletonGraph:
    """Build the Gabriel graph over line-box centers.

    ``method="brute"`` runs the O(n^3) reference construction.
    """
    lines = list(lines)
    pts = node_centers(lines)
    if method == "fast":
        idx = gabriel_edges(pts)
    elif method == "brute":
        idx = np.array(sorted(gabriel_edges_bruteforce(pts)), dtype=int).reshape(-1, 2)
    else:
        raise ValueError(f"unknown method {method!r}")
    ids = np.array([ln.id for ln in lines], dtype=np.int64)
    if len(idx):
        # smaller id first, then sort rows by id pair
        swap = ids[idx[:, 0]] > ids[idx[:, 1]]
        idx[swap] = idx[swap][:, ::-1]
        order = np.lexsort((ids[idx[:, 1]], ids[idx[:, 0]]))
        idx = idx[order]
    boxes = boxes_to_array([ln.box for ln in lines])
    return SkeletonGraph(tuple(int(i) for i in ids), idx.astype(np.int64).reshape(-1, 2), boxes)


def hop_index(g: SkeletonGraph) -> np.ndarray:
    """Hop edges as an (m, 2) array of node positions, i < j."""
    adj = g.adjacency()
    two = (adj @ adj).tocoo()
    mask = two.row < two.col
    pairs = np.stack([two.row[mask], two.col[mask]], axis=1)
    if len(pairs) == 0 or g.n_edges == 0:
        return pairs.reshape(-1, 2)
    direct = adj.tocsr()
    is_edge = np.asarray(direct[pairs[:, 0], pairs[:, 1]]).ravel() > 0
    return pairs[~is_edge]


def hop_edges(g: SkeletonGraph) -> set[tuple[int, int]]:
    """Non-adjacent node pairs that share at least one neighbor, as id pairs."""
    ids = g.node_ids
    out = set()
    for i, j in hop_index(g).tolist():
        a, b = ids[i], ids[j]
        out.add((a, b) if a < b else (b, a))
    return out


def edge_boxes_array(boxes: np.ndarray, edge_index: np.ndarray) -> np.ndarray:
    """Containing box of each edge's two line boxes, as an (m, 5) array."""
    m = len(edge_index)
    if m == 0:
        return np.zeros((0, 5))
    pair = np.concatenate([boxes[edge_index[:, 0]], boxes[edge_index[:, 1]]])
    groups = np.concatenate([np.arange(m), np.arange(m)])
    return group_containing_boxes(pair, groups, m)


def edge_box(a: RotatedBox, b: RotatedBox) -> RotatedBox:
    """Minimum box containing ``a`` and ``b``, at their circular-mean angle."""
    return containing_box([a, b])


def edge_length(g: SkeletonGraph) -> np.ndarray:
    """Center-to-center length of every edge."""
    if g.n_edges == 0:
        return np.zeros(0)
    c = g.boxes[:, :2]
    d = c[g.edge_index[:, 0]] - c[g.edge_index[:, 1]]
    return np.hypot(d[:, 0], d[:, 1])


__all__ = [
    "SkeletonGraph",
    "build_skeleton",
    "hop_edges",
    "hop_index",
    "edge_box",
    "edge_boxes_array",
    "edge_length",
    "gabriel_edges",
    "gabriel_edges_bruteforce",
    "node_centers",
]
