"""Derive column/row pattern labels from an annotated paragraph order.

Each consecutive pair of annotated paragraphs is classified as a vertical
step, a horizontal step, or unknown; a paragraph's pattern then follows from
the steps into and out of it.
"""

from __future__ import annotations

from typing import Sequence

from .document import COL, ROW, AnnotatedGroup
from .geometry import (
    AABox,
    RotatedBox,
    X,
    Y,
    aabb,
    axis_overlap,
    circular_mean,
    intersection_area,
    rotate_about_origin,
)

VERTICAL = "vertical"
HORIZONTAL = "horizontal"
UNKNOWN = "unknown"

GAP_FRACTION = 0.1
COVER_FRACTION = 0.5


def _covers(c: AABox, other: RotatedBox, theta: float, fraction: float) -> bool:
    b = rotate_about_origin(other, theta)
    return intersection_area(c.as_rotated(), b) > fraction * b.area


def pair_relation(p_i: RotatedBox, p_j: RotatedBox, others: Sequence[RotatedBox] = (),
                  cover_fraction: float = COVER_FRACTION) -> str:
    """Geometric relation of paragraph ``p_i`` followed by ``p_j``.

    ``others`` are the paragraphs that, if covered by the pair's joint box,
    turn a horizontal step into a vertical one (a jump between text columns
    rather than across a table row). A box counts as covered when more than
    ``cover_fraction`` of its area falls inside.
    """
    theta = -circular_mean([p_i.angle, p_j.angle])
    bi = aabb(rotate_about_origin(p_i, theta))
    bj = aabb(rotate_about_origin(p_j, theta))
    c = AABox(min(bi.x_min, bj.x_min), max(bi.x_max, bj.x_max),
              min(bi.y_min, bj.y_min), max(bi.y_max, bj.y_max))
    if axis_overlap(bi, bj, Y) < GAP_FRACTION * c.height and bi.y_center < bj.y_center:
        return VERTICAL
    if axis_overlap(bi, bj, X) < GAP_FRACTION * c.width and bi.x_center < bj.x_center:
        if any(_covers(c, o, theta, cover_fraction) for o in others):
            return VERTICAL
        return HORIZONTAL
    return UNKNOWN


def pattern_from_relations(before: str, after: str) -> str:
    """Pattern of a paragraph given the steps into and out of it."""
    if before == UNKNOWN and after == UNKNOWN:
        return UNKNOWN
    if before == UNKNOWN or after == UNKNOWN:
        known = after if before == UNKNOWN else before
        return COL if known == VERTICAL else ROW
    return COL if before == VERTICAL and after == VERTICAL else ROW


def group_relations(group: AnnotatedGroup, others: Sequence[tuple[int, RotatedBox]] | None = None,
                    cover_fraction: float = COVER_FRACTION) -> list[str]:
    """Relations between consecutive paragraphs of ``group``.

    ``others`` are (id, box) pairs of the candidate covered paragraphs; by
    default the group's own paragraphs.
    """
    if others is None:
        others = list(zip(group.paragraph_ids, group.boxes))
    rels = []
    for k in range(len(group) - 1):
        a, b = group.paragraph_ids[k], group.paragraph_ids[k + 1]
        rest = [box for pid, box in others if pid != a and pid != b]
        rels.append(pair_relation(group.boxes[k], group.boxes[k + 1], rest, cover_fraction))
    return rels


def label_patterns(group: AnnotatedGroup, others: Sequence[tuple[int, RotatedBox]] | None = None,
                   cover_fraction: float = COVER_FRACTION) -> list[tuple[int, str]]:
    """(paragraph id, "col" | "row" | "unknown") for every paragraph of ``group``.

    A missing neighbor at either end of the group counts as unknown.
    """
    rels = group_relations(group, others, cover_fraction)
    out = []
    for k, pid in enumerate(group.paragraph_ids):
        before = rels[k - 1] if k > 0 else UNKNOWN
        after = rels[k] if k < len(rels) else UNKNOWN
        out.append((pid, pattern_from_relations(before, after)))
    return out


def binary_label(pattern: str) -> str:
    """Map unknown to col where a two-valued label is required."""
    return COL if pattern == UNKNOWN else pattern
