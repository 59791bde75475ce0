"""Synthetic remission grid maps painted from lane annotations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import MapMeta, RemissionGridMap
from .lanes import LaneAnnotation, Marking, sort_by_draw_order
from .raster import lane_field

DASH_LENGTH = 2.0
GAP_LENGTH = 2.0
OFF_LANE_FACTOR = 0.8


@dataclass(frozen=True)
class SynthParams:
    asphalt_mean: float = 0.30
    marking_mean: float = 0.85
    noise_sd: float = 0.05
    unknown_fraction: float = 0.02


def generate_remission(annotations: Sequence[LaneAnnotation], meta: MapMeta,
                       params: SynthParams = SynthParams(), seed: int = 0) -> RemissionGridMap:
    """Paint a remission map: dark asphalt, bright lane markings, random holes.

    Off-lane cells average ``0.8 * asphalt_mean``.  Broken markings are lit
    in 2 m dashes separated by 2 m gaps along the lane's arclength.  Lanes
    are painted in draw order, later lanes overwriting earlier ones.
    """
    rng = np.random.default_rng(seed)
    n = meta.size
    mean = np.full((n, n), params.asphalt_mean * OFF_LANE_FACTOR)
    for ann in sort_by_draw_order(annotations):
        f = lane_field(ann, meta)
        lane_mean = np.full((n, n), params.asphalt_mean)
        band = f.inside & (f.distance > ann.lane_width / 2 - meta.resolution)
        dash_on = np.mod(f.arclength, DASH_LENGTH + GAP_LENGTH) < DASH_LENGTH
        for sign, marking in ((1, ann.left_marking), (-1, ann.right_marking)):
            if marking is Marking.NONE:
                continue
            lit = band & (f.side == sign)
            if marking.is_broken:
                lit &= dash_on
            lane_mean[lit] = params.marking_mean
        mean[f.inside] = lane_mean[f.inside]

    cells = mean + rng.normal(0.0, params.noise_sd, size=(n, n)) if params.noise_sd > 0 else mean
    cells = np.clip(cells, 0.0, 1.0)
    if params.unknown_fraction > 0:
        cells[rng.random((n, n)) < params.unknown_fraction] = np.nan
    return RemissionGridMap(meta, cells)
