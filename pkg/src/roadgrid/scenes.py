"""Synthetic lane scenes with analytic centerlines.

Each builder returns a :class:`Scene` holding the annotations, a map extent
that contains them with margin, and a densely sampled analytic centerline
of the primary lane for fidelity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .grid import DEFAULT_LANE_WIDTH, DEFAULT_RESOLUTION, MapMeta
from .lanes import LaneAnnotation, Marking


@dataclass
class Scene:
    name: str
    annotations: List[LaneAnnotation]
    meta: MapMeta
    truth: np.ndarray  # analytic centerline samples, shape (n, 2)
    start_arclength: float = 0.0
    drive_length: float = 0.0

    @property
    def lane(self) -> LaneAnnotation:
        return self.annotations[0]


def _meta_around(pts: np.ndarray, margin: float, res: float, multiple: int = 10) -> MapMeta:
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    side = max(hi - lo)
    size = int(math.ceil(side / res / multiple)) * multiple
    # Snap the origin to the cell grid so cell centers land on round numbers.
    ox = math.floor(lo[0] / res) * res
    oy = math.floor(lo[1] / res) * res
    return MapMeta(round(ox, 9), round(oy, 9), res, size)


def straight(length: float = 200.0, lead: float = 80.0, y: float = 0.1,
             lane_width: float = DEFAULT_LANE_WIDTH, res: float = DEFAULT_RESOLUTION,
             left: Marking = Marking.BROKEN, right: Marking = Marking.SOLID) -> Scene:
    """Lane along +x at height ``y``, from ``-lead`` to ``length + lead``."""
    pts = np.array([[-lead, y], [length + lead, y]])
    ann = LaneAnnotation(pts, left, right, lane_width, 0)
    truth = np.column_stack([np.linspace(-lead, length + lead, 20001), np.full(20001, y)])
    meta = _meta_around(pts, 8.0, res)
    return Scene("straight", [ann], meta, truth, start_arclength=lead, drive_length=length)


def circle(radius: float = 50.0, lane_width: float = DEFAULT_LANE_WIDTH,
           res: float = DEFAULT_RESOLUTION, step_deg: float = 5.0,
           overlap_deg: float = 120.0) -> Scene:
    """Counter-clockwise circle about the origin.

    The control polyline runs from ``-overlap_deg`` to ``360 + overlap_deg``
    so the lane has no ends near the lap; travel starts at angle 0.
    """
    ang = np.radians(np.arange(-overlap_deg, 360.0 + overlap_deg + 1e-9, step_deg))
    pts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    ann = LaneAnnotation(pts, Marking.BROKEN, Marking.SOLID, lane_width, 0)
    a = np.linspace(0, 2 * np.pi, 40001)
    truth = radius * np.column_stack([np.cos(a), np.sin(a)])
    meta = _meta_around(pts, 8.0, res)
    start = radius * math.radians(overlap_deg)
    return Scene("circle", [ann], meta, truth, start_arclength=start,
                 drive_length=2 * math.pi * radius)


def s_curve(length: float = 200.0, amplitude: float = 8.0, wavelength: float = 100.0,
            lead: float = 80.0, lane_width: float = DEFAULT_LANE_WIDTH,
            res: float = DEFAULT_RESOLUTION, step: float = 2.5) -> Scene:
    """Sinusoidal lane ``y = A sin(2 pi x / wavelength)``; min radius wavelength^2/(4 pi^2 A)."""
    x = np.arange(-lead, length + lead + 1e-9, step)
    k = 2 * math.pi / wavelength
    pts = np.column_stack([x, amplitude * np.sin(k * x)])
    ann = LaneAnnotation(pts, Marking.BROKEN, Marking.SOLID, lane_width, 0)
    xt = np.linspace(-lead, length + lead, 60001)
    truth = np.column_stack([xt, amplitude * np.sin(k * xt)])
    meta = _meta_around(pts, 8.0, res)
    start = float(ann.length * lead / (length + 2 * lead))
    return Scene("s_curve", [ann], meta, truth, start_arclength=start,
                 drive_length=float(ann.length * length / (length + 2 * lead)))


def fork(length: float = 60.0, lane_width: float = DEFAULT_LANE_WIDTH,
         res: float = DEFAULT_RESOLUTION) -> Scene:
    """Straight main lane with a secondary lane branching off to the left."""
    main = LaneAnnotation([[-10.0, 0.1], [length + 10.0, 0.1]], Marking.SOLID, Marking.SOLID,
                          lane_width, 0)
    branch_pts = [[10.0, 0.1], [20.0, 0.6], [30.0, 3.0], [40.0, 7.5], [length + 10.0, 16.0]]
    branch = LaneAnnotation(branch_pts, Marking.BROKEN, Marking.SOLID, lane_width, 1)
    pts = np.array(main.points + branch.points)
    meta = _meta_around(pts, 4.0, res)
    truth = np.column_stack([np.linspace(-10, length + 10, 8001), np.full(8001, 0.1)])
    return Scene("fork", [main, branch], meta, truth)


def crossing(length: float = 60.0, lane_width: float = DEFAULT_LANE_WIDTH,
             res: float = DEFAULT_RESOLUTION) -> Scene:
    """Two straight lanes crossing at right angles; the vertical one is drawn last."""
    h = LaneAnnotation([[-length / 2, 0.1], [length / 2, 0.1]], Marking.SOLID, Marking.BROKEN,
                       lane_width, 0)
    v = LaneAnnotation([[0.1, -length / 2], [0.1, length / 2]], Marking.BROKEN_50, Marking.SOLID_50,
                       lane_width, 1)
    pts = np.array(h.points + v.points)
    meta = _meta_around(pts, 2.0, res)
    truth = np.column_stack([np.linspace(-length / 2, length / 2, 8001), np.full(8001, 0.1)])
    return Scene("crossing", [h, v], meta, truth)


SCENES: Dict[str, Callable[..., Scene]] = {
    "straight": straight,
    "circle": circle,
    "s_curve": s_curve,
    "fork": fork,
    "crossing": crossing,
}
