"""Color-coded pictures of road and remission maps with waypoint overlays.

Road codes use a display palette: off-lane gray, solid markings red,
broken markings blue, and lane-center distances a green ramp from bright
(at the center) to dark (at the edge).  Remission renders as grayscale
with UNKNOWN cells in dark blue.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Union

import numpy as np
from PIL import Image, ImageDraw

from .grid import (BROKEN, BROKEN_50, CENTER_CODE, MAX_CODE, NUM_CODES, SOLID, SOLID_50, MapMeta,
                   RemissionGridMap, RoadGridMap)
from .rddf import Waypoint

OFF_LANE_RGB = (128, 128, 128)
SOLID_RGB = (220, 30, 30)
BROKEN_RGB = (30, 60, 220)
UNKNOWN_RGB = (0, 0, 60)
WAYPOINT_RGB = (255, 220, 0)
CURRENT_RGB = (255, 0, 255)


def road_palette() -> np.ndarray:
    """RGB color per cell code, shape ``(17, 3)``."""
    pal = np.zeros((NUM_CODES, 3), np.uint8)
    pal[0] = OFF_LANE_RGB
    pal[SOLID] = pal[SOLID_50] = SOLID_RGB
    pal[BROKEN] = pal[BROKEN_50] = BROKEN_RGB
    steps = MAX_CODE - CENTER_CODE
    for code in range(CENTER_CODE, MAX_CODE + 1):
        f = (code - CENTER_CODE) / steps
        pal[code] = (0, int(round(230 - 150 * f)), 0)
    return pal


def road_to_rgb(road: RoadGridMap) -> np.ndarray:
    # Pixel row 0 is the northernmost cell row.
    return np.flipud(road_palette()[road.cells])


def remission_to_rgb(remission: RemissionGridMap) -> np.ndarray:
    c = remission.cells
    unknown = np.isnan(c)
    g = np.rint(np.where(unknown, 0.0, c) * 255).astype(np.uint8)
    rgb = np.repeat(g[..., None], 3, axis=2)
    rgb[unknown] = UNKNOWN_RGB
    return np.flipud(rgb)


def _pixel(meta: MapMeta, x: float, y: float):
    col = (x - meta.origin_x) / meta.resolution
    row = (y - meta.origin_y) / meta.resolution
    return col, meta.size - row


def render(grid: Union[RoadGridMap, RemissionGridMap],
           waypoints: Optional[Sequence[Waypoint]] = None,
           current: Optional[int] = None, scale: int = 1) -> Image.Image:
    """Picture of ``grid`` with an optional waypoint polyline drawn on top."""
    rgb = road_to_rgb(grid) if isinstance(grid, RoadGridMap) else remission_to_rgb(grid)
    img = Image.fromarray(np.ascontiguousarray(rgb))
    if scale > 1:
        img = img.resize((img.width * scale, img.height * scale), Image.NEAREST)
    if waypoints:
        draw = ImageDraw.Draw(img)
        pts = [tuple(v * scale for v in _pixel(grid.meta, w.x, w.y)) for w in waypoints]
        if len(pts) > 1:
            draw.line(pts, fill=WAYPOINT_RGB, width=max(1, scale))
        for p in pts:
            draw.point(p, fill=WAYPOINT_RGB)
        if current is not None and 0 <= current < len(pts):
            x, y = pts[current]
            r = 2 * scale
            draw.ellipse([x - r, y - r, x + r, y + r], outline=CURRENT_RGB)
    return img


def save_render(path, grid, waypoints: Optional[Iterable[Waypoint]] = None, **kwargs):
    render(grid, list(waypoints) if waypoints is not None else None, **kwargs).save(path, format="PNG")
