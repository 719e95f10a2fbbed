import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from readorder.document import TextLine
from readorder.geometry import RotatedBox, corners, rotate_about_origin
from readorder.skeleton import (
    build_skeleton,
    edge_box,
    gabriel_edges,
    gabriel_edges_bruteforce,
    hop_edges,
    node_centers,
)

from oracles import gabriel_reference


def lines_at(points, ids=None, w=4.0, h=2.0, angle=0.0):
    ids = range(len(points)) if ids is None else ids
    return [TextLine(i, RotatedBox(float(x), float(y), w, h, angle)) for i, (x, y) in zip(ids, points)]


def edge_set(g):
    return set(g.edges)


def test_two_lines_one_edge():
    g = build_skeleton(lines_at([(0, 0), (10, 3)]))
    assert g.edges == ((0, 1),)


def test_single_and_empty():
    assert build_skeleton(lines_at([(0, 0)])).n_edges == 0
    assert build_skeleton([]).n_edges == 0


def test_collinear_middle_blocks():
    g = build_skeleton(lines_at([(0, 0), (1, 0), (2, 0)]))
    assert edge_set(g) == {(0, 1), (1, 2)}
    assert gabriel_reference([(0, 0), (1, 0), (2, 0)]) == {(0, 1), (1, 2)}


def test_witness_on_circle_does_not_block():
    # (0,1) sits exactly on the circle with diameter (-1,0)-(1,0)
    pts = np.array([(-1.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    assert (0, 1) in set(map(tuple, gabriel_edges(pts).tolist()))


def test_square_keeps_sides_only():
    # the diagonals of a square have both other corners on their circle
    pts = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    got = set(map(tuple, gabriel_edges(pts).tolist()))
    assert got == gabriel_reference(pts) == {(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)}


def test_matches_reference_on_random_sets():
    rng = np.random.default_rng(11)
    for _ in range(150):
        pts = rng.uniform(0, 100, (rng.integers(2, 13), 2))
        got = set(map(tuple, gabriel_edges(pts).tolist()))
        assert got == gabriel_reference(pts) == gabriel_edges_bruteforce(pts)


def test_matches_reference_on_lattices_and_circles():
    cases = [np.array([(i, j) for i in range(a) for j in range(b)], float) * s
             for a, b, s in [(3, 3, 1.0), (4, 2, 7.5), (5, 5, 1e4), (1, 6, 2.0)]]
    t = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    cases.append(np.c_[np.cos(t), np.sin(t)] * 30 + 1e5)
    cases.append(np.c_[np.cos(t), np.sin(t)] * 30)
    for pts in cases:
        assert set(map(tuple, gabriel_edges(pts).tolist())) == gabriel_reference(pts)


def test_large_instance_matches_bruteforce():
    rng = np.random.default_rng(5)
    pts = np.round(rng.uniform(0, 60, (120, 2)))  # many near-ties
    pts = np.unique(pts, axis=0)
    assert set(map(tuple, gabriel_edges(pts).tolist())) == gabriel_edges_bruteforce(pts)


def test_duplicate_centers_are_separated():
    lines = lines_at([(5, 5), (5, 5), (9, 9)], ids=[3, 7, 1])
    pts = node_centers(lines)
    assert pts[0, 0] == pytest.approx(5 + 3e-6)
    assert pts[1, 0] == pytest.approx(5 + 7e-6)
    assert pts[2, 0] == 9
    g = build_skeleton(lines)
    assert (3, 7) in edge_set(g)


def test_brute_method_equals_fast():
    rng = np.random.default_rng(2)
    lines = lines_at(rng.uniform(0, 50, (40, 2)))
    assert edge_set(build_skeleton(lines)) == edge_set(build_skeleton(lines, method="brute"))
    with pytest.raises(ValueError):
        build_skeleton(lines, method="grid")


points = st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), min_size=2, max_size=25, unique=True)


@given(points, st.randoms(use_true_random=False))
def test_independent_of_input_order(pts, rnd):
    lines = lines_at(pts, ids=[10 * k for k in range(len(pts))])
    shuffled = list(lines)
    rnd.shuffle(shuffled)
    assert edge_set(build_skeleton(lines)) == edge_set(build_skeleton(shuffled))


@given(points, st.floats(-3.0, 3.0), st.floats(0.1, 50.0), st.floats(-500, 500))
def test_rigid_motion_and_scale_invariance(pts, theta, scale, shift):
    lines = lines_at(pts)
    moved = [TextLine(ln.id, rotate_about_origin(
        RotatedBox(ln.box.cx * scale + shift, ln.box.cy * scale - shift, 1, 1), theta)) for ln in lines]
    assert edge_set(build_skeleton(lines)) == edge_set(build_skeleton(moved))


@given(points)
def test_structure_invariants(pts):
    g = build_skeleton(lines_at(pts))
    e = list(g.edges)
    assert len(e) == len(set(e))
    assert all(a < b for a, b in e)
    assert all(a in g.index_of and b in g.index_of for a, b in e)
    if g.n_nodes >= 3:
        assert len(e) <= 3 * g.n_nodes - 6


# -- hop edges ----------------------------------------------------------------

def test_hop_edges_path_and_single():
    g = build_skeleton(lines_at([(0, 0), (1, 0), (2, 0)]))
    assert hop_edges(g) == {(0, 2)}
    assert hop_edges(build_skeleton(lines_at([(0, 0), (1, 0)]))) == set()


def test_hop_edges_star():
    # center 0 with three leaves far apart from each other
    pts = [(0, 0), (10, 0), (-5, 8.66), (-5, -8.66)]
    g = build_skeleton(lines_at(pts))
    assert edge_set(g) == {(0, 1), (0, 2), (0, 3)}
    assert hop_edges(g) == {(1, 2), (1, 3), (2, 3)}


@given(points)
def test_hop_edges_definition(pts):
    g = build_skeleton(lines_at(pts))
    nb = {i: set() for i in g.node_ids}
    for a, b in g.edges:
        nb[a].add(b)
        nb[b].add(a)
    want = {(a, b) for a in g.node_ids for b in g.node_ids
            if a < b and b not in nb[a] and nb[a] & nb[b]}
    assert hop_edges(g) == want


# -- edge boxes ---------------------------------------------------------------

def test_edge_box_cases():
    a = RotatedBox(2, 3, 4, 5, 0.3)
    e = edge_box(a, a)
    assert (e.cx, e.cy, e.w, e.h, e.angle) == pytest.approx((2, 3, 4, 5, 0.3))
    e = edge_box(RotatedBox(0, 0, 1, 1), RotatedBox(3, 0, 1, 1))
    assert (e.cx, e.cy, e.w, e.h, e.angle) == pytest.approx((1.5, 0, 4, 1, 0))
    e = edge_box(RotatedBox(0, 0, 1, 1, math.radians(10)), RotatedBox(3, 0, 1, 1, math.radians(-10)))
    assert e.angle == pytest.approx(0.0, abs=1e-12)


boxes = st.builds(RotatedBox, st.floats(-100, 100), st.floats(-100, 100), st.floats(0, 50),
                  st.floats(0, 50), st.floats(-1.5, 1.5))


@given(boxes, boxes)
def test_edge_box_contains_corners(a, b):
    e = edge_box(a, b)
    for x, y in np.concatenate([corners(a), corners(b)]):
        assert e.contains_point(x, y, tol=1e-9 * max(1.0, abs(x), abs(y)) + 1e-9)


def test_graph_edge_boxes_match_scalar():
    rng = np.random.default_rng(4)
    lines = [TextLine(i, RotatedBox(*rng.uniform(0, 300, 2), *rng.uniform(5, 40, 2), rng.uniform(-.3, .3)))
             for i in range(30)]
    g = build_skeleton(lines)
    for (a, b), box in g.edge_boxes.items():
        ref = edge_box(lines[a].box, lines[b].box)
        assert (box.cx, box.cy, box.w, box.h, box.angle) == pytest.approx(
            (ref.cx, ref.cy, ref.w, ref.h, ref.angle), abs=1e-9)
