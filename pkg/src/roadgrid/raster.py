"""Road grid map ground truth from lane annotations, and crop cutting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import CropOutsideMapError, ShapeMismatchError
from .grid import (
    DEFAULT_CROP_SIZE,
    MapMeta,
    Pose,
    RemissionGridMap,
    RoadGridMap,
    encode_distance_codes,
)
from .lanes import LaneAnnotation, flatten, sort_by_draw_order

# Painting flattens ten times finer than the geometric-query default: a
# 0.01 m chord error flips cells lying that close to one of the 13 code
# boundaries, which on a curved lane is several percent of its cells.
RASTER_FLATTEN_TOL = 0.001


class LaneField(NamedTuple):
    """Per-cell geometry of one lane relative to its centerline.

    ``inside`` marks cells whose center lies within the stroke (half width,
    butt caps).  ``side`` is +1 left of travel, -1 right, 0 on the line.
    Arrays outside the lane's bounding box hold ``inf``/0.
    """

    distance: np.ndarray
    side: np.ndarray
    arclength: np.ndarray
    inside: np.ndarray


def _index_range(lo: float, hi: float, origin: float, res: float, size: int):
    # Cells whose centers fall in [lo, hi].
    i0 = max(0, math.ceil((lo - origin) / res - 0.5))
    i1 = min(size - 1, math.floor((hi - origin) / res - 0.5))
    return i0, i1


def lane_field(ann: LaneAnnotation, meta: MapMeta) -> LaneField:
    poly = flatten(ann.chain, RASTER_FLATTEN_TOL)
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(poly, axis=0).T))])
    reach = ann.lane_width / 2
    res, n = meta.resolution, meta.size
    xs, ys = meta.cell_centers()

    best = np.full((n, n), np.inf)
    seg = np.full((n, n), -1, dtype=np.int32)
    tpar = np.zeros((n, n))
    cross = np.zeros((n, n))

    nseg = len(poly) - 1
    for i in range(nseg):
        (ax, ay), (bx, by) = poly[i], poly[i + 1]
        c0, c1 = _index_range(min(ax, bx) - reach, max(ax, bx) + reach, meta.origin_x, res, n)
        r0, r1 = _index_range(min(ay, by) - reach, max(ay, by) + reach, meta.origin_y, res, n)
        if c0 > c1 or r0 > r1:
            continue
        px = xs[c0 : c1 + 1][None, :]
        py = ys[r0 : r1 + 1][:, None]
        dx, dy = bx - ax, by - ay
        t = np.clip(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
        fx = ax + t * dx
        fy = ay + t * dy
        d = np.hypot(px - fx, py - fy)
        blk = (slice(r0, r1 + 1), slice(c0, c1 + 1))
        upd = d < best[blk]
        best[blk] = np.where(upd, d, best[blk])
        seg[blk] = np.where(upd, i, seg[blk])
        tpar[blk] = np.where(upd, t, tpar[blk])
        cross[blk] = np.where(upd, dx * (py - fy) - dy * (px - fx), cross[blk])

    inside = best <= reach
    # Butt caps: drop cells whose nearest point is a chain end they lie beyond.
    X, Y = np.meshgrid(xs, ys)
    (sx, sy), (s2x, s2y) = poly[0], poly[1]
    beyond_start = (seg == 0) & (tpar == 0.0) & ((X - sx) * (s2x - sx) + (Y - sy) * (s2y - sy) < 0)
    (ex, ey), (e0x, e0y) = poly[-1], poly[-2]
    beyond_end = (seg == nseg - 1) & (tpar == 1.0) & ((X - ex) * (ex - e0x) + (Y - ey) * (ey - e0y) > 0)
    inside &= ~(beyond_start | beyond_end)

    seglen = np.diff(cum)
    safe = np.maximum(seg, 0)
    arclength = np.where(seg >= 0, cum[safe] + tpar * seglen[safe], 0.0)
    side = np.sign(cross).astype(np.int8)
    return LaneField(best, side, arclength, inside)


def paint_lane(cells: np.ndarray, ann: LaneAnnotation, meta: MapMeta, field: Optional[LaneField] = None):
    """Paint one lane's codes into ``cells`` in place, overwriting earlier lanes."""
    f = field if field is not None else lane_field(ann, meta)
    w = ann.lane_width
    codes = encode_distance_codes(np.where(f.inside, f.distance, 0.0), w)
    band = f.inside & (f.distance > w / 2 - meta.resolution)
    for sign, marking in ((1, ann.left_marking), (-1, ann.right_marking)):
        if marking.code is not None:
            codes[band & (f.side == sign)] = marking.code
    cells[f.inside] = codes[f.inside]


def rasterize(annotations: Sequence[LaneAnnotation], meta: MapMeta) -> RoadGridMap:
    """Render lane annotations into a road grid map.

    Cells are sampled at their centers.  Lanes are painted in ``draw_order``
    and later lanes overwrite earlier ones.  Within a lane the outermost
    resolution-wide band carries the marking code of its side (when the
    side has a marking); every other in-lane cell carries its quantized
    distance to the centerline.
    """
    cells = np.zeros((meta.size, meta.size), np.uint8)
    for ann in sort_by_draw_order(annotations):
        paint_lane(cells, ann, meta)
    return RoadGridMap(meta, cells)


@dataclass(frozen=True)
class CropPair:
    remission: RemissionGridMap
    road: RoadGridMap
    center_pose: Pose

    def __post_init__(self):
        if self.remission.meta != self.road.meta:
            raise ShapeMismatchError("remission and road crops must share their meta")

    @property
    def meta(self) -> MapMeta:
        return self.road.meta


def crop_window(meta: MapMeta, x: float, y: float, size: int = DEFAULT_CROP_SIZE):
    """Row/col of the lower-left cell of a ``size`` crop centered on the grid
    corner nearest to ``(x, y)``."""
    half = size // 2
    col0 = round((x - meta.origin_x) / meta.resolution) - half
    row0 = round((y - meta.origin_y) / meta.resolution) - half
    if row0 < 0 or col0 < 0 or row0 + size > meta.size or col0 + size > meta.size:
        raise CropOutsideMapError(f"a {size}-cell crop at ({x:.2f}, {y:.2f}) exceeds the map extent")
    return row0, col0


def cut_crop(remission: RemissionGridMap, road: RoadGridMap, pose: Pose,
             size: int = DEFAULT_CROP_SIZE) -> CropPair:
    row0, col0 = crop_window(road.meta, pose.x, pose.y, size)
    rem = remission.window(row0, col0, size)
    rd = road.window(row0, col0, size)
    half = size // 2 * road.meta.resolution
    center = Pose(rd.meta.origin_x + half, rd.meta.origin_y + half, pose.yaw)
    return CropPair(rem, rd, center)


def resample_route(route: Sequence[Pose], spacing: float) -> List[Pose]:
    """Poses every ``spacing`` metres of arclength along a route, first point included.

    Headings follow the direction of the route segment each sample falls on.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    xy = np.array([[p.x, p.y] for p in route], dtype=float)
    if len(xy) < 2:
        return [Pose(p.x, p.y, p.yaw) for p in route]
    steps = np.hypot(*np.diff(xy, axis=0).T)
    keep = np.concatenate([[True], steps > 0])
    xy = xy[keep]
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(xy, axis=0).T))])
    count = int(math.floor(cum[-1] / spacing + 1e-9)) + 1
    out = []
    for k in range(count):
        s = min(k * spacing, cum[-1])
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(cum) - 2)
        a, b = xy[i], xy[i + 1]
        f = (s - cum[i]) / (cum[i + 1] - cum[i])
        p = a + f * (b - a)
        out.append(Pose(p[0], p[1], math.atan2(b[1] - a[1], b[0] - a[0])))
    return out


def cut_crop_pairs(remission: RemissionGridMap, road: RoadGridMap, route: Sequence[Pose],
                   spacing: Optional[float] = 5.0, size: int = DEFAULT_CROP_SIZE) -> List[CropPair]:
    """Cut one aligned crop pair per route sample.

    With ``spacing=None`` every route pose is used as a sample.
    """
    if remission.meta != road.meta:
        raise ShapeMismatchError("remission and road maps must share their meta")
    samples = list(route) if spacing is None else resample_route(route, spacing)
    return [cut_crop(remission, road, p, size) for p in samples]
