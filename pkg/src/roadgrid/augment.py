"""Rotation/translation augmentation of crop pairs.

Each output cell center is mapped back into the source map and sampled
nearest-neighbor, so road codes stay in the 0..16 alphabet and UNKNOWN
remission is never smeared.  Source samples outside the map read as
UNKNOWN / off-lane.
"""

from __future__ import annotations

import math
from typing import Iterable, List, Sequence, Tuple

import numba
import numpy as np

from .errors import InsufficientClearanceError, ShapeMismatchError
from .grid import DEFAULT_CROP_SIZE, MapMeta, Pose, RemissionGridMap, RoadGridMap
from .raster import CropPair

ROTATIONS_DEG: Tuple[float, ...] = tuple(15.0 * k for k in range(24))
TRANSLATIONS_M: Tuple[float, ...] = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)
DEFAULT_CLEARANCE = 24.0


def _cos_sin(deg: float) -> Tuple[float, float]:
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    # Quarter turns must map cell centers onto cell centers exactly.
    if deg % 90.0 == 0.0:
        c, s = round(c), round(s)
    return c, s


@numba.njit(cache=True)
def _sample(rem_src, road_src, cu, cv, c, s, du, dv, size, rem_out, road_out):
    n = rem_src.shape[0]
    half = size / 2
    for i in range(size):
        ov = i + 0.5 - half
        bu = cu - s * ov + du
        bv = cv + c * ov + dv
        for j in range(size):
            ou = j + 0.5 - half
            col = int(math.floor(bu + c * ou))
            row = int(math.floor(bv + s * ou))
            if col >= 0 and col < n and row >= 0 and row < n:
                rem_out[i, j] = rem_src[row, col]
                road_out[i, j] = road_src[row, col]
            else:
                rem_out[i, j] = np.nan
                road_out[i, j] = 0


def resample_pair(remission: RemissionGridMap, road: RoadGridMap, center: Pose,
                  rotations_deg: Sequence[float] = (0.0,),
                  translations_m: Sequence[float] = (0.0,),
                  size: int = DEFAULT_CROP_SIZE) -> List[CropPair]:
    """Sample rotated/translated crops of ``size`` cells about ``center``.

    The crop is centered on the grid corner nearest to ``center``; each
    rotation turns the sampling window about that corner and each
    translation shifts it across ``center.yaw`` (positive to the left).
    Output order is rotation-major.
    """
    if remission.meta != road.meta:
        raise ShapeMismatchError("remission and road maps must share their meta")
    meta = road.meta
    res = meta.resolution
    cu = round((center.x - meta.origin_x) / res)
    cv = round((center.y - meta.origin_y) / res)
    # Output crops keep the axis-aligned window of the unaugmented crop.
    out_meta = MapMeta(meta.origin_x + (cu - size // 2) * res,
                       meta.origin_y + (cv - size // 2) * res, res, size)
    nx, ny = -math.sin(center.yaw), math.cos(center.yaw)
    cpose_x = out_meta.origin_x + size / 2 * res
    cpose_y = out_meta.origin_y + size / 2 * res
    out = []
    for deg in rotations_deg:
        c, s = _cos_sin(deg)
        yaw = center.yaw - math.radians(deg)
        for t in translations_m:
            rem = np.empty((size, size))
            rd = np.empty((size, size), np.uint8)
            _sample(remission.cells, road.cells, float(cu), float(cv), c, s,
                    t * nx / res, t * ny / res, size, rem, rd)
            out.append(CropPair(RemissionGridMap(out_meta, rem), RoadGridMap(out_meta, rd),
                                Pose(cpose_x, cpose_y, yaw)))
    return out


def check_clearance(meta: MapMeta, center: Pose, clearance: float = DEFAULT_CLEARANCE):
    margin = min(center.x - meta.origin_x, center.y - meta.origin_y,
                 meta.origin_x + meta.extent - center.x, meta.origin_y + meta.extent - center.y)
    if margin < clearance:
        raise InsufficientClearanceError(
            f"center ({center.x:.2f}, {center.y:.2f}) is {margin:.2f} m from the map edge; "
            f"{clearance} m required"
        )


def augment_pair(remission: RemissionGridMap, road: RoadGridMap, center: Pose,
                 rotations_deg: Sequence[float] = ROTATIONS_DEG,
                 translations_m: Sequence[float] = TRANSLATIONS_M,
                 clearance: float = DEFAULT_CLEARANCE,
                 size: int = DEFAULT_CROP_SIZE) -> List[CropPair]:
    """Expand one crop location into rotated and laterally shifted pairs.

    With the default sets (24 rotations 15 degrees apart, 7 offsets from
    -1.5 m to 1.5 m) this yields 168 pairs.  Pass ``clearance=0`` to sample
    from a source smaller than the rotated window (e.g. a stored crop).
    """
    if clearance > 0:
        check_clearance(road.meta, center, clearance)
    return resample_pair(remission, road, center, rotations_deg, translations_m, size)


def augment_all(remission: RemissionGridMap, road: RoadGridMap, centers: Iterable[Pose],
                **kwargs) -> Iterable[CropPair]:
    """Lazily augment many locations; full datasets do not fit in memory."""
    for c in centers:
        yield from augment_pair(remission, road, c, **kwargs)
