"""Remission-to-road segmenters standing in for a trained network.

``Oracle`` returns the aligned ground truth, ``Noisy`` corrupts it at a
fixed per-cell rate, and ``External`` reads predictions produced by any
outside model in the road PNG format as ``{crop_id}_pred.png``.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import io
from .errors import MissingGroundTruthError, MissingInferenceFileError, ShapeMismatchError
from .grid import DEFAULT_CROP_SIZE, NUM_CODES, RemissionGridMap, RoadGridMap


@dataclass(frozen=True)
class Oracle:
    pass


@dataclass(frozen=True)
class Noisy:
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"corruption probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class External:
    directory: str


SegmenterKind = Union[Oracle, Noisy, External]


def parse_kind(text: str) -> SegmenterKind:
    """Parse ``oracle``, ``noisy:P[:SEED]`` or ``external:DIR``."""
    name, _, rest = text.partition(":")
    if name == "oracle" and not rest:
        return Oracle()
    if name == "noisy":
        p, _, seed = rest.partition(":")
        return Noisy(float(p), int(seed) if seed else 0)
    if name == "external" and rest:
        return External(rest)
    raise ValueError(f"unknown segmenter '{text}' (use oracle, noisy:P:SEED or external:DIR)")


def corrupt(codes: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Replace each cell with probability ``p`` by a uniformly chosen different code."""
    hit = rng.random(codes.shape) < p
    shift = rng.integers(1, NUM_CODES, size=codes.shape)
    out = codes.astype(np.int64)
    out[hit] = (out[hit] + shift[hit]) % NUM_CODES
    return out.astype(np.uint8)


def _rng(seed: int, crop_id: Optional[str]) -> np.random.Generator:
    if crop_id is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([seed, zlib.crc32(str(crop_id).encode())])


def segment(kind: SegmenterKind, remission: RemissionGridMap,
            ground_truth: Optional[RoadGridMap] = None, crop_id: Optional[str] = None,
            size: Optional[int] = DEFAULT_CROP_SIZE) -> RoadGridMap:
    """Infer a road crop from a remission crop.

    ``Noisy`` output depends only on ``(seed, crop_id)`` and the inputs.
    Pass ``size=None`` to accept inputs of any size.
    """
    shape = remission.cells.shape
    if size is not None and shape != (size, size):
        raise ShapeMismatchError(f"remission crop is {shape}, expected {(size, size)}")
    if isinstance(kind, External):
        if crop_id is None:
            raise MissingInferenceFileError("external segmentation needs a crop id")
        path = Path(kind.directory) / f"{crop_id}_pred.png"
        if not path.exists():
            raise MissingInferenceFileError(f"{path}: inference file not found")
        return io.read_road_png(path, remission.meta)

    if ground_truth is None:
        raise MissingGroundTruthError(f"no ground truth for crop {crop_id!r}")
    if ground_truth.cells.shape != shape:
        raise ShapeMismatchError(f"ground truth is {ground_truth.cells.shape}, remission is {shape}")
    if isinstance(kind, Oracle):
        return RoadGridMap(remission.meta, ground_truth.cells)
    if isinstance(kind, Noisy):
        rng = _rng(kind.seed, crop_id)
        return RoadGridMap(remission.meta, corrupt(ground_truth.cells, kind.p, rng))
    raise TypeError(f"unsupported segmenter {kind!r}")


def infer_map(kind: SegmenterKind, remission: RemissionGridMap, ground_truth: Optional[RoadGridMap] = None,
              crop: int = DEFAULT_CROP_SIZE) -> RoadGridMap:
    """Segment a full map crop by crop and stitch the results.

    Crops tile the map from its origin; the last row/column is shifted
    inward to stay inside the map, and later crops overwrite the overlap.
    Crop ids are ``r{row0}_c{col0}``.
    """
    n = remission.meta.size
    if ground_truth is not None and ground_truth.meta != remission.meta:
        raise ShapeMismatchError("remission and ground-truth maps must share their meta")
    if n < crop:
        raise ShapeMismatchError(f"map of {n} cells is smaller than one {crop}-cell crop")
    starts = list(range(0, n - crop + 1, crop))
    if starts[-1] != n - crop:
        starts.append(n - crop)
    out = np.zeros((n, n), np.uint8)
    for r in starts:
        for c in starts:
            gt = ground_truth.window(r, c, crop) if ground_truth is not None else None
            pred = segment(kind, remission.window(r, c, crop), gt, f"r{r}_c{c}", crop)
            out[r:r + crop, c:c + crop] = pred.cells
    return RoadGridMap(remission.meta, out)
