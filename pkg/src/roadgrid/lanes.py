"""Lane centerline annotations.

A lane is annotated as an ordered control polyline that follows the center
of the lane in the direction of travel.  Every control point is made
"auto-smooth": the polyline becomes a C1 chain of cubic Bezier segments
passing through all control points.  Geometric queries run on an adaptive
flattening of that chain.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegeneratePolylineError
from .grid import BROKEN, BROKEN_50, DEFAULT_LANE_WIDTH, SOLID, SOLID_50

DEFAULT_FLATTEN_TOL = 0.01


class Marking(enum.Enum):
    SOLID = "solid"
    BROKEN = "broken"
    SOLID_50 = "solid_50"
    BROKEN_50 = "broken_50"
    NONE = "none"

    @property
    def code(self) -> int | None:
        """Road cell code painted on the boundary band, or None."""
        return _MARKING_CODES[self]

    @property
    def is_broken(self) -> bool:
        return self in (Marking.BROKEN, Marking.BROKEN_50)


_MARKING_CODES = {
    Marking.SOLID: SOLID,
    Marking.BROKEN: BROKEN,
    Marking.SOLID_50: SOLID_50,
    Marking.BROKEN_50: BROKEN_50,
    Marking.NONE: None,
}


@dataclass(frozen=True)
class BezierChain:
    """Cubic Bezier segments, array of shape ``(n, 4, 2)``."""

    segments: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.segments)

    def evaluate(self, index: int, t) -> np.ndarray:
        """Points of segment ``index`` at parameters ``t`` (scalar or 1-D)."""
        p0, p1, p2, p3 = self.segments[index]
        t = np.asarray(t, dtype=float)[..., None]
        s = 1.0 - t
        return s**3 * p0 + 3 * s**2 * t * p1 + 3 * s * t**2 * p2 + t**3 * p3

    def derivative(self, index: int, t) -> np.ndarray:
        p0, p1, p2, p3 = self.segments[index]
        t = np.asarray(t, dtype=float)[..., None]
        s = 1.0 - t
        return 3 * s**2 * (p1 - p0) + 6 * s * t * (p2 - p1) + 3 * t**2 * (p3 - p2)

    def sample(self, per_segment: int) -> np.ndarray:
        """Dense parametric samples, ``per_segment`` per segment plus the end point."""
        t = np.arange(per_segment) / per_segment
        pts = [self.evaluate(i, t) for i in range(len(self))]
        pts.append(self.segments[-1, 3][None, :])
        return np.vstack(pts)


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise DegeneratePolylineError("a lane polyline needs at least two 2-D points")
    if np.any(np.hypot(*np.diff(pts, axis=0).T) == 0):
        raise DegeneratePolylineError("polyline has a zero-length edge")
    return pts


def autosmooth(points) -> BezierChain:
    """Convert a control polyline to a C1 cubic Bezier chain.

    Interior tangents point along ``p[i+1] - p[i-1]``; end tangents follow
    the single adjacent edge.  Each handle is one third of the chord of the
    edge it belongs to.
    """
    pts = _as_points(points)
    n = len(pts)
    edges = np.diff(pts, axis=0)
    chords = np.hypot(edges[:, 0], edges[:, 1])

    tangents = np.empty_like(pts)
    tangents[0] = edges[0] / chords[0]
    tangents[-1] = edges[-1] / chords[-1]
    for i in range(1, n - 1):
        d = pts[i + 1] - pts[i - 1]
        norm = math.hypot(*d)
        # A hairpin reversal has no symmetric tangent; keep the incoming edge.
        tangents[i] = d / norm if norm > 0 else edges[i - 1] / chords[i - 1]

    segs = np.empty((n - 1, 4, 2))
    segs[:, 0] = pts[:-1]
    segs[:, 1] = pts[:-1] + tangents[:-1] * (chords[:, None] / 3.0)
    segs[:, 2] = pts[1:] - tangents[1:] * (chords[:, None] / 3.0)
    segs[:, 3] = pts[1:]
    return BezierChain(segs)


def _flat_enough(c: np.ndarray, tol: float) -> bool:
    # Convex-hull bound: the curve deviates from its chord by at most the
    # control points' distance to that chord segment.
    a, b = c[0], c[3]
    ab = b - a
    L2 = ab @ ab
    for q in (c[1], c[2]):
        if L2 == 0.0:
            d = math.hypot(*(q - a))
        else:
            t = min(1.0, max(0.0, ((q - a) @ ab) / L2))
            d = math.hypot(*(q - a - t * ab))
        if d > tol:
            return False
    return True


def _split(c: np.ndarray):
    p01 = (c[0] + c[1]) / 2
    p12 = (c[1] + c[2]) / 2
    p23 = (c[2] + c[3]) / 2
    p012 = (p01 + p12) / 2
    p123 = (p12 + p23) / 2
    mid = (p012 + p123) / 2
    return np.array([c[0], p01, p012, mid]), np.array([mid, p123, p23, c[3]])


def flatten(chain: BezierChain, tol: float = DEFAULT_FLATTEN_TOL) -> np.ndarray:
    """Adaptive piecewise-linear approximation with chord deviation <= ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    out = [chain.segments[0, 0]]
    for seg in chain.segments:
        stack = [seg]
        while stack:
            c = stack.pop()
            if _flat_enough(c, tol):
                out.append(c[3])
            else:
                left, right = _split(c)
                stack.append(right)
                stack.append(left)
    return np.array(out)


class Nearest(NamedTuple):
    distance: float
    side: str
    arclength: float
    tangent: float


def nearest_on_polyline(poly: np.ndarray, p) -> Nearest:
    """Closest point of a polyline to ``p``; ties keep the earliest segment."""
    px, py = float(p[0]), float(p[1])
    a = poly[:-1]
    ab = poly[1:] - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    ap = np.array([px, py]) - a
    t = np.clip(np.einsum("ij,ij->i", ap, ab) / L2, 0.0, 1.0)
    foot = a + t[:, None] * ab
    d = np.hypot(px - foot[:, 0], py - foot[:, 1])
    i = int(np.argmin(d))
    seglen = np.sqrt(L2)
    s = float(np.sum(seglen[:i]) + t[i] * seglen[i])
    dx, dy = ab[i]
    cross = dx * (py - foot[i, 1]) - dy * (px - foot[i, 0])
    dist = float(d[i])
    if dist <= 1e-12 or cross == 0.0:
        side = "on"
    else:
        side = "left" if cross > 0 else "right"
    return Nearest(dist, side, s, math.atan2(dy, dx))


@dataclass(frozen=True)
class LaneAnnotation:
    """One annotated lane.

    ``points`` run in the direction of travel; the first and last may lie
    outside the map.  Lower ``draw_order`` is painted first.
    """

    points: tuple
    left_marking: Marking = Marking.SOLID
    right_marking: Marking = Marking.SOLID
    lane_width: float = DEFAULT_LANE_WIDTH
    draw_order: int = 0

    def __post_init__(self):
        pts = _as_points(self.points)
        object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in pts))
        object.__setattr__(self, "left_marking", Marking(self.left_marking))
        object.__setattr__(self, "right_marking", Marking(self.right_marking))
        if not self.lane_width > 0:
            raise ValueError("lane_width must be positive")
        object.__setattr__(self, "lane_width", float(self.lane_width))
        object.__setattr__(self, "draw_order", int(self.draw_order))

    @cached_property
    def chain(self) -> BezierChain:
        return autosmooth(self.points)

    @cached_property
    def polyline(self) -> np.ndarray:
        return flatten(self.chain, DEFAULT_FLATTEN_TOL)

    @cached_property
    def cumulative_length(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(self.polyline, axis=0).T))])

    @property
    def length(self) -> float:
        return float(self.cumulative_length[-1])

    def point_at(self, s: float):
        """Position and heading at arclength ``s`` along the flattened centerline."""
        cum = self.cumulative_length
        s = min(max(s, 0.0), cum[-1])
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(cum) - 2)
        a, b = self.polyline[i], self.polyline[i + 1]
        f = (s - cum[i]) / (cum[i + 1] - cum[i])
        xy = a + f * (b - a)
        return float(xy[0]), float(xy[1]), math.atan2(b[1] - a[1], b[0] - a[0])


def nearest_centerline(ann: LaneAnnotation, p: Sequence[float]) -> Nearest:
    """Distance, side, arclength and tangent heading of the closest centerline point."""
    return nearest_on_polyline(ann.polyline, p)


def sort_by_draw_order(annotations) -> list:
    return sorted(annotations, key=lambda a: a.draw_order)
