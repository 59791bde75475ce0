"""70 m x 70 m submap tiles and 3x3 stitched windows.

Tiles live in one directory as ``{kind}_{tile_x}_{tile_y}.png`` where the
tile containing world point ``(x, y)`` is ``(floor(x / 70), floor(y / 70))``.
A window is the 3x3 block of tiles centered on the tile holding the query
pose; absent neighbors read as UNKNOWN remission or off-lane road.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from . import io
from .errors import CentralTileMissingError, FormatError, MisalignedOriginError, StorageFailureError
from .grid import DEFAULT_RESOLUTION, MapMeta, Pose, RemissionGridMap, RoadGridMap

TILE_EXTENT = 70.0
REMISSION = "remission"
ROAD = "road"
KINDS = (REMISSION, ROAD)

GridMap = Union[RemissionGridMap, RoadGridMap]

_TILE_RE = re.compile(r"^(remission|road)_(-?\d+)_(-?\d+)\.png$")


@dataclass(frozen=True, order=True)
class TileKey:
    kind: str
    tile_x: int
    tile_y: int

    @property
    def filename(self) -> str:
        return f"{self.kind}_{self.tile_x}_{self.tile_y}.png"

    def origin(self, extent: float = TILE_EXTENT) -> Tuple[float, float]:
        return self.tile_x * extent, self.tile_y * extent


def kind_of(grid: GridMap) -> str:
    return ROAD if isinstance(grid, RoadGridMap) else REMISSION


def tile_of(x: float, y: float, extent: float = TILE_EXTENT) -> Tuple[int, int]:
    return math.floor(x / extent), math.floor(y / extent)


def _aligned_index(value: float, extent: float) -> int:
    k = round(value / extent)
    if abs(k * extent - value) > 1e-6:
        raise MisalignedOriginError(f"origin {value} m is not a multiple of {extent} m")
    return k


def _dir_resolution(directory: Path, default: float) -> float:
    try:
        return float(io.read_meta(directory)["resolution"])
    except (FormatError, KeyError):
        return default


def save_map_as_tiles(grid: GridMap, directory, extent: float = TILE_EXTENT) -> List[TileKey]:
    """Split a map into tile files; returns the keys written."""
    meta = grid.meta
    tile_cells = round(extent / meta.resolution)
    if abs(tile_cells * meta.resolution - extent) > 1e-9:
        raise MisalignedOriginError(f"resolution {meta.resolution} does not divide the {extent} m tile")
    if meta.size % tile_cells:
        raise MisalignedOriginError(f"map size {meta.size} is not a multiple of {tile_cells} cells")
    tx0 = _aligned_index(meta.origin_x, extent)
    ty0 = _aligned_index(meta.origin_y, extent)

    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageFailureError(f"cannot create {d}: {exc}") from exc
    if (d / io.META_FILE).exists():
        res = _dir_resolution(d, meta.resolution)
        if abs(res - meta.resolution) > 1e-12:
            raise StorageFailureError(f"{d} holds tiles at resolution {res}, not {meta.resolution}")
    else:
        io.write_meta(d, {"resolution": meta.resolution, "tile_extent": float(extent),
                          "tile_size": tile_cells})

    kind = kind_of(grid)
    keys = []
    per_side = meta.size // tile_cells
    for j in range(per_side):
        for i in range(per_side):
            key = TileKey(kind, tx0 + i, ty0 + j)
            block = grid.window(j * tile_cells, i * tile_cells, tile_cells)
            if kind == ROAD:
                io.write_road_png(d / key.filename, block)
            else:
                io.write_remission_png(d / key.filename, block)
            keys.append(key)
    return keys


def read_tile(directory, key: TileKey, resolution: float = DEFAULT_RESOLUTION,
              extent: float = TILE_EXTENT) -> GridMap:
    tile_cells = round(extent / resolution)
    ox, oy = key.origin(extent)
    meta = MapMeta(ox, oy, resolution, tile_cells)
    path = Path(directory) / key.filename
    if key.kind == ROAD:
        return io.read_road_png(path, meta)
    return io.read_remission_png(path, meta)


def list_tiles(directory, kind: str) -> List[TileKey]:
    keys = []
    for p in Path(directory).glob(f"{kind}_*.png"):
        m = _TILE_RE.match(p.name)
        if m and m.group(1) == kind:
            keys.append(TileKey(kind, int(m.group(2)), int(m.group(3))))
    return sorted(keys)


def _stitch(directory: Path, kind: str, tx0: int, ty0: int, nx: int, ny: int,
            resolution: float, extent: float) -> GridMap:
    tile_cells = round(extent / resolution)
    size = max(nx, ny) * tile_cells
    meta = MapMeta(tx0 * extent, ty0 * extent, resolution, size)
    if kind == ROAD:
        cells = np.zeros((size, size), np.uint8)
    else:
        cells = np.full((size, size), np.nan)
    for j in range(ny):
        for i in range(nx):
            key = TileKey(kind, tx0 + i, ty0 + j)
            if not (directory / key.filename).exists():
                continue
            tile = read_tile(directory, key, resolution, extent)
            cells[j * tile_cells:(j + 1) * tile_cells, i * tile_cells:(i + 1) * tile_cells] = tile.cells
    return RoadGridMap(meta, cells) if kind == ROAD else RemissionGridMap(meta, cells)


def load_window(pose: Pose, kind: str, directory, extent: float = TILE_EXTENT) -> GridMap:
    """3x3-tile window whose central tile contains ``pose``."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    d = Path(directory)
    resolution = _dir_resolution(d, DEFAULT_RESOLUTION)
    tx, ty = tile_of(pose.x, pose.y, extent)
    central = TileKey(kind, tx, ty)
    if not (d / central.filename).exists():
        raise CentralTileMissingError(f"{d / central.filename}: central tile for pose "
                                      f"({pose.x:.2f}, {pose.y:.2f}) is missing")
    return _stitch(d, kind, tx - 1, ty - 1, 3, 3, resolution, extent)


def load_all(directory, kind: str, extent: float = TILE_EXTENT) -> GridMap:
    """Stitch every tile of ``kind`` into the smallest square covering them."""
    d = Path(directory)
    keys = list_tiles(d, kind)
    if not keys:
        raise CentralTileMissingError(f"{d}: no {kind} tiles")
    resolution = _dir_resolution(d, DEFAULT_RESOLUTION)
    xs = [k.tile_x for k in keys]
    ys = [k.tile_y for k in keys]
    return _stitch(d, kind, min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1,
                   resolution, extent)
