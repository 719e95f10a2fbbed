"""Rotated-rectangle geometry.

Coordinates are image coordinates (y grows downward). A box angle is in
radians, normalized to (-pi, pi], and rotates the box's local frame with the
usual matrix ``[[cos, -sin], [sin, cos]]`` about the box center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

X = "x"
Y = "y"

_TWO_PI = 2.0 * math.pi


def normalize_angle(angle: float) -> float:
    """Map an angle in radians to (-pi, pi]."""
    a = math.remainder(angle, _TWO_PI)
    if a <= -math.pi:
        a += _TWO_PI
    return a


@dataclass(frozen=True)
class RotatedBox:
    cx: float
    cy: float
    w: float
    h: float
    angle: float = 0.0

    def __post_init__(self):
        vals = (self.cx, self.cy, self.w, self.h, self.angle)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite box field in {vals}")
        if self.w < 0 or self.h < 0:
            raise ValueError(f"negative box extent w={self.w} h={self.h}")
        object.__setattr__(self, "angle", normalize_angle(self.angle))

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)

    def corners(self) -> np.ndarray:
        return corners(self)

    def contains_point(self, x: float, y: float, tol: float = 1e-9) -> bool:
        """True if (x, y) lies inside the box or on its boundary."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        dx, dy = x - self.cx, y - self.cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return abs(u) <= self.w / 2 + tol and abs(v) <= self.h / 2 + tol


@dataclass(frozen=True)
class AABox:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted AABox {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def x_center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    @property
    def y_center(self) -> float:
        return 0.5 * (self.y_min + self.y_max)

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_rotated(self) -> RotatedBox:
        return RotatedBox(self.x_center, self.y_center, self.width, self.height, 0.0)


# local corner offsets in units of (w/2, h/2): top-left, top-right,
# bottom-right, bottom-left; positive shoelace area
_UNIT_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def corners(b: RotatedBox) -> np.ndarray:
    """Return the four vertices of ``b`` as a (4, 2) array.

    The order is top-left, top-right, bottom-right, bottom-left in the box's
    own frame, which has positive signed area for every angle.
    """
    c, s = math.cos(b.angle), math.sin(b.angle)
    local = _UNIT_CORNERS * (0.5 * b.w, 0.5 * b.h)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + (b.cx, b.cy)


def rotate_point(x: float, y: float, theta: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    return (c * x - s * y, s * x + c * y)


def rotate_about_origin(b: RotatedBox, theta: float) -> RotatedBox:
    cx, cy = rotate_point(b.cx, b.cy, theta)
    return RotatedBox(cx, cy, b.w, b.h, b.angle + theta)


def rotate_about(b: RotatedBox, theta: float, ox: float, oy: float) -> RotatedBox:
    cx, cy = rotate_point(b.cx - ox, b.cy - oy, theta)
    return RotatedBox(cx + ox, cy + oy, b.w, b.h, b.angle + theta)


def aabb(b: RotatedBox) -> AABox:
    """Smallest axis-aligned box containing all corners of ``b``."""
    pts = corners(b)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return AABox(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def axis_overlap(a: AABox, b: AABox, axis: str) -> float:
    """Length of the intersection of the two boxes' intervals on ``axis``.

    Clamped at zero, so touching intervals give exactly 0. Callers treat an
    overlap as present only when the result is strictly positive.
    """
    if axis == X:
        lo, hi = max(a.x_min, b.x_min), min(a.x_max, b.x_max)
    elif axis == Y:
        lo, hi = max(a.y_min, b.y_min), min(a.y_max, b.y_max)
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return max(0.0, hi - lo)


def circular_mean(angles: Iterable[float]) -> float:
    """Mean direction of ``angles`` (radians).

    Returns 0 when the resultant vector is shorter than 1e-9, e.g. for two
    opposite angles.
    """
    arr = np.asarray(angles if isinstance(angles, np.ndarray) else list(angles), dtype=float)
    if arr.size == 0:
        raise ValueError("circular_mean of an empty sequence")
    s = float(np.sin(arr).sum())
    c = float(np.cos(arr).sum())
    if math.hypot(s, c) < 1e-9:
        return 0.0
    return normalize_angle(math.atan2(s, c))


def polygon_area(pts: np.ndarray) -> float:
    """Signed shoelace area of a closed polygon given as (n, 2)."""
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clipping of ``subject`` by a convex ``clip`` polygon.

    ``clip`` must have positive (counter-clockwise in math axes) winding.
    """
    out = [tuple(p) for p in subject]
    n = len(clip)
    for k in range(n):
        if not out:
            break
        ax, ay = clip[k]
        bx, by = clip[(k + 1) % n]
        ex, ey = bx - ax, by - ay

        def side(p):
            return ex * (p[1] - ay) - ey * (p[0] - ax)

        inp = out
        out = []
        prev = inp[-1]
        sp = side(prev)
        for cur in inp:
            sc = side(cur)
            if sc >= 0:
                if sp < 0:
                    out.append(_cross_point(prev, cur, sp, sc))
                out.append(cur)
            elif sp >= 0:
                out.append(_cross_point(prev, cur, sp, sc))
            prev, sp = cur, sc
    return np.array(out, dtype=float).reshape(-1, 2)


def _cross_point(p, q, sp, sq):
    t = sp / (sp - sq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def intersection_area(a: RotatedBox, b: RotatedBox) -> float:
    """Area of the intersection of two rotated rectangles."""
    if a.w == 0 or a.h == 0 or b.w == 0 or b.h == 0:
        return 0.0
    # cheap reject on circumscribed circles
    ra = 0.5 * math.hypot(a.w, a.h)
    rb = 0.5 * math.hypot(b.w, b.h)
    if math.hypot(a.cx - b.cx, a.cy - b.cy) >= ra + rb:
        return 0.0
    poly = clip_convex(corners(a), corners(b))
    area = abs(polygon_area(poly))
    return min(area, a.area, b.area)


# -- vectorized helpers -------------------------------------------------------

def boxes_to_array(boxes: Sequence[RotatedBox]) -> np.ndarray:
    """Stack boxes into an (n, 5) array of (cx, cy, w, h, angle)."""
    if not boxes:
        return np.zeros((0, 5))
    return np.array([(b.cx, b.cy, b.w, b.h, b.angle) for b in boxes], dtype=float)


def corners_array(arr: np.ndarray) -> np.ndarray:
    """Corners of every row of an (n, 5) box array, shape (n, 4, 2)."""
    c = np.cos(arr[:, 4])[:, None]
    s = np.sin(arr[:, 4])[:, None]
    lx = _UNIT_CORNERS[None, :, 0] * (0.5 * arr[:, 2:3])
    ly = _UNIT_CORNERS[None, :, 1] * (0.5 * arr[:, 3:4])
    x = c * lx - s * ly + arr[:, 0:1]
    y = s * lx + c * ly + arr[:, 1:2]
    return np.stack([x, y], axis=-1)


def rotated_aabbs(arr: np.ndarray, theta: float) -> np.ndarray:
    """AABoxes of boxes rotated by ``theta`` about the origin.

    Returns an (n, 4) array of (x_min, x_max, y_min, y_max).
    """
    pts = corners_array(arr)
    c, s = math.cos(theta), math.sin(theta)
    x = c * pts[..., 0] - s * pts[..., 1]
    y = s * pts[..., 0] + c * pts[..., 1]
    return np.stack([x.min(axis=1), x.max(axis=1), y.min(axis=1), y.max(axis=1)], axis=1)


def containing_box(boxes: Sequence[RotatedBox], angle: float | None = None) -> RotatedBox:
    """Minimum box at ``angle`` containing every corner of ``boxes``.

    ``angle`` defaults to the circular mean of the box angles. The corners are
    rotated into the box frame, bounded axis-aligned, and the result rotated
    back.
    """
    if not boxes:
        raise ValueError("containing_box of no boxes")
    if angle is None:
        angle = circular_mean(b.angle for b in boxes)
    x0, x1, y0, y1 = rotated_aabbs(boxes_to_array(boxes), -angle).T
    lo_x, hi_x, lo_y, hi_y = x0.min(), x1.max(), y0.min(), y1.max()
    cx, cy = rotate_point(0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y), angle)
    return RotatedBox(cx, cy, float(hi_x - lo_x), float(hi_y - lo_y), angle)


def group_containing_boxes(arr: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    """Containing box of each group of boxes, at the group's circular-mean angle.

    ``arr`` is (n, 5), ``groups`` assigns each row a label in ``range(n_groups)``.
    Returns an (n_groups, 5) box array. Every label must be used.
    """
    s = np.bincount(groups, weights=np.sin(arr[:, 4]), minlength=n_groups)
    c = np.bincount(groups, weights=np.cos(arr[:, 4]), minlength=n_groups)
    mean = np.where(np.hypot(s, c) < 1e-9, 0.0, np.arctan2(s, c))
    mean = np.where(mean <= -np.pi, mean + 2 * np.pi, mean)
    theta = -mean[groups]
    pts = corners_array(arr)
    ct, st = np.cos(theta)[:, None], np.sin(theta)[:, None]
    x = ct * pts[..., 0] - st * pts[..., 1]
    y = st * pts[..., 0] + ct * pts[..., 1]
    lo_x = np.full(n_groups, np.inf)
    hi_x = np.full(n_groups, -np.inf)
    lo_y = np.full(n_groups, np.inf)
    hi_y = np.full(n_groups, -np.inf)
    np.minimum.at(lo_x, groups, x.min(axis=1))
    np.maximum.at(hi_x, groups, x.max(axis=1))
    np.minimum.at(lo_y, groups, y.min(axis=1))
    np.maximum.at(hi_y, groups, y.max(axis=1))
    mx, my = 0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)
    cm, sm = np.cos(mean), np.sin(mean)
    return np.stack([cm * mx - sm * my, sm * mx + cm * my, hi_x - lo_x, hi_y - lo_y, mean], axis=1)


def array_to_boxes(arr: np.ndarray) -> list[RotatedBox]:
    return [RotatedBox(*map(float, row)) for row in arr]
