"""Grid-map types, world/cell transforms and the lane cell-code alphabet.

Conventions
-----------
Cells are indexed ``(row, col)`` with ``row`` along world y and ``col`` along
world x.  The map origin is the lower-left corner of cell ``(0, 0)`` and cell
intervals are half-open, so ``world_to_cell`` is constant on
``[x0, x0 + res) x [y0, y0 + res)``.

Road cell codes::

    0       off lane
    1       solid line marking
    2       broken line marking
    3       solid line marking (50% confidence)
    4       broken line marking (50% confidence)
    5..16   distance to the lane center, in 1/22 lane-width bins
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import (
    InvalidCodeError,
    InvalidDistanceError,
    OutOfBoundsError,
    ShapeMismatchError,
)

DEFAULT_RESOLUTION = 0.2
DEFAULT_MAP_SIZE = 1050
DEFAULT_CROP_SIZE = 120
DEFAULT_LANE_WIDTH = 3.2

OFF_LANE = 0
SOLID = 1
BROKEN = 2
SOLID_50 = 3
BROKEN_50 = 4
CENTER_CODE = 5
MAX_CODE = 16
NUM_CODES = 17

# Remission cells never hit by a ray.  NaN keeps every valid value in [0, 1].
UNKNOWN = float("nan")

# Absorbs binary representation error so decimal ties such as 5.5 round up.
_TIE_EPS = 1e-9


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.remainder(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "yaw", normalize_angle(float(self.yaw)))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def advanced(self, distance: float) -> "Pose":
        """Pose moved ``distance`` metres along its own heading."""
        return Pose(
            self.x + distance * math.cos(self.yaw),
            self.y + distance * math.sin(self.yaw),
            self.yaw,
        )


@dataclass(frozen=True)
class MapMeta:
    """Georeferencing of a square grid.

    Parameters
    ----------
    origin_x, origin_y : float
        World coordinates (m) of the lower-left map corner.
    resolution : float
        Cell edge length in metres.
    size : int
        Side length in cells.
    """

    origin_x: float
    origin_y: float
    resolution: float = DEFAULT_RESOLUTION
    size: int = DEFAULT_MAP_SIZE

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if int(self.size) != self.size or self.size <= 0:
            raise ValueError(f"size must be a positive integer, got {self.size}")
        object.__setattr__(self, "size", int(self.size))
        object.__setattr__(self, "origin_x", float(self.origin_x))
        object.__setattr__(self, "origin_y", float(self.origin_y))
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def extent(self) -> float:
        return self.size * self.resolution

    def contains(self, x: float, y: float) -> bool:
        u = (x - self.origin_x) / self.resolution
        v = (y - self.origin_y) / self.resolution
        return 0 <= u < self.size and 0 <= v < self.size

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """1-D arrays of cell-center x (per column) and y (per row)."""
        idx = np.arange(self.size)
        xs = self.origin_x + (idx + 0.5) * self.resolution
        ys = self.origin_y + (idx + 0.5) * self.resolution
        return xs, ys

    def subwindow(self, row0: int, col0: int, size: int) -> "MapMeta":
        return MapMeta(
            self.origin_x + col0 * self.resolution,
            self.origin_y + row0 * self.resolution,
            self.resolution,
            size,
        )


def world_to_cell(x: float, y: float, meta: MapMeta) -> Tuple[int, int]:
    """Return the ``(row, col)`` of the cell containing world point ``(x, y)``."""
    col = math.floor((x - meta.origin_x) / meta.resolution)
    row = math.floor((y - meta.origin_y) / meta.resolution)
    if not (0 <= row < meta.size and 0 <= col < meta.size):
        raise OutOfBoundsError(f"point ({x}, {y}) lies outside the map extent")
    return row, col


def cell_to_world(row: int, col: int, meta: MapMeta) -> Tuple[float, float]:
    """Return the world coordinates of the center of cell ``(row, col)``."""
    if not (0 <= row < meta.size and 0 <= col < meta.size):
        raise OutOfBoundsError(f"cell ({row}, {col}) lies outside a {meta.size}-cell map")
    return (
        meta.origin_x + (col + 0.5) * meta.resolution,
        meta.origin_y + (row + 0.5) * meta.resolution,
    )


def encode_distance_code(d: float, lane_width: float = DEFAULT_LANE_WIDTH) -> int:
    """Quantize an unsigned distance to the lane center into codes 5..16."""
    if d < 0 or d > lane_width / 2:
        raise InvalidDistanceError(f"distance {d} outside [0, {lane_width / 2}]")
    return CENTER_CODE + min(11, math.floor(22.0 * d / lane_width + 0.5 + _TIE_EPS))


def encode_distance_codes(d: np.ndarray, lane_width: float = DEFAULT_LANE_WIDTH) -> np.ndarray:
    """Vectorized :func:`encode_distance_code` without range checking."""
    q = np.floor(22.0 * np.asarray(d) / lane_width + 0.5 + _TIE_EPS)
    return (CENTER_CODE + np.clip(q, 0, 11)).astype(np.uint8)


def decode_distance(code: int, lane_width: float = DEFAULT_LANE_WIDTH) -> float:
    if not CENTER_CODE <= code <= MAX_CODE:
        raise InvalidCodeError(f"code {code} is not a distance code (5..16)")
    return (code - CENTER_CODE) / 22.0 * lane_width


def decode_distance_table(lane_width: float = DEFAULT_LANE_WIDTH) -> np.ndarray:
    """Distance to lane center per code; off-lane maps to NaN, markings to half width."""
    table = np.full(NUM_CODES, np.nan)
    table[SOLID:CENTER_CODE] = lane_width / 2
    table[CENTER_CODE:] = (np.arange(CENTER_CODE, NUM_CODES) - CENTER_CODE) / 22.0 * lane_width
    return table


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def _check_shape(cells: np.ndarray, meta: MapMeta):
    if cells.shape != (meta.size, meta.size):
        raise ShapeMismatchError(
            f"cells have shape {cells.shape}, meta expects {(meta.size, meta.size)}"
        )


@dataclass(frozen=True, eq=False)
class RoadGridMap:
    """Square grid of lane cell codes (uint8, 0..16), read-only."""

    meta: MapMeta
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        cells = np.asarray(self.cells)
        _check_shape(cells, self.meta)
        if cells.dtype.kind == "f" and not np.all(np.isfinite(cells) & (cells == np.round(cells))):
            bad = np.argwhere(~(np.isfinite(cells) & (cells == np.round(cells))))[0]
            raise InvalidCodeError(f"cell {tuple(int(i) for i in bad)} holds non-integer {cells[tuple(bad)]}")
        if cells.size and (cells.min() < 0 or cells.max() > MAX_CODE):
            bad = np.argwhere((cells < 0) | (cells > MAX_CODE))[0]
            raise InvalidCodeError(
                f"cell {tuple(int(i) for i in bad)} holds code {cells[tuple(bad)]}, outside 0..16"
            )
        object.__setattr__(self, "cells", _frozen(cells.astype(np.uint8)))

    @classmethod
    def empty(cls, meta: MapMeta) -> "RoadGridMap":
        return cls(meta, np.zeros((meta.size, meta.size), np.uint8))

    def code_at(self, x: float, y: float) -> int:
        return int(self.cells[world_to_cell(x, y, self.meta)])

    def window(self, row0: int, col0: int, size: int) -> "RoadGridMap":
        return RoadGridMap(
            self.meta.subwindow(row0, col0, size),
            self.cells[row0 : row0 + size, col0 : col0 + size],
        )


@dataclass(frozen=True, eq=False)
class RemissionGridMap:
    """Square grid of mean remission in [0, 1]; NaN marks UNKNOWN cells."""

    meta: MapMeta
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        _check_shape(cells, self.meta)
        # NaN compares false, so UNKNOWN cells pass both tests.
        if (cells < 0.0).any() or (cells > 1.0).any():
            raise ValueError("known remission values must lie in [0, 1]")
        object.__setattr__(self, "cells", _frozen(cells))

    @classmethod
    def unknown(cls, meta: MapMeta) -> "RemissionGridMap":
        return cls(meta, np.full((meta.size, meta.size), np.nan))

    @property
    def unknown_mask(self) -> np.ndarray:
        return np.isnan(self.cells)

    def window(self, row0: int, col0: int, size: int) -> "RemissionGridMap":
        return RemissionGridMap(
            self.meta.subwindow(row0, col0, size),
            self.cells[row0 : row0 + size, col0 : col0 + size],
        )
