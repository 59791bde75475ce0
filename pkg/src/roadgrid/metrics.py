"""Segmentation evaluation: class accuracy, confusion matrix, box-plot summaries."""

from __future__ import annotations

from typing import Dict, Sequence, Union

import numpy as np

from .errors import EmptyListError, ShapeMismatchError
from .grid import NUM_CODES, OFF_LANE, RoadGridMap

ALL_CELLS = "all_cells"
LANE_CELLS_ONLY = "lane_cells_only"

Grid = Union[RoadGridMap, np.ndarray]


def _cells(g: Grid) -> np.ndarray:
    return g.cells if isinstance(g, RoadGridMap) else np.asarray(g)


def _pair(pred: Grid, gt: Grid):
    p, g = _cells(pred), _cells(gt)
    if p.shape != g.shape:
        raise ShapeMismatchError(f"prediction {p.shape} and ground truth {g.shape} differ in shape")
    if isinstance(pred, RoadGridMap) and isinstance(gt, RoadGridMap) and pred.meta != gt.meta:
        raise ShapeMismatchError("prediction and ground truth are not georeferenced alike")
    return p, g


def class_accuracy(pred: Grid, gt: Grid, scope: str = ALL_CELLS) -> float:
    """Fraction of evaluated cells whose predicted code equals the ground truth.

    ``lane_cells_only`` evaluates only cells where the ground truth is not
    off-lane; it returns NaN when there are none.
    """
    p, g = _pair(pred, gt)
    if scope == ALL_CELLS:
        mask = np.ones(g.shape, bool)
    elif scope == LANE_CELLS_ONLY:
        mask = g != OFF_LANE
    else:
        raise ValueError(f"unknown scope {scope!r}")
    total = int(mask.sum())
    if total == 0:
        return float("nan")
    return int((p[mask] == g[mask]).sum()) / total


def confusion_matrix(pred: Grid, gt: Grid) -> np.ndarray:
    """17x17 counts; entry ``[g, p]`` counts cells with truth ``g`` predicted ``p``."""
    p, g = _pair(pred, gt)
    idx = g.astype(np.int64).ravel() * NUM_CODES + p.astype(np.int64).ravel()
    return np.bincount(idx, minlength=NUM_CODES * NUM_CODES).reshape(NUM_CODES, NUM_CODES)


def accuracy_from_confusion(cm: np.ndarray) -> float:
    return float(np.trace(cm)) / float(cm.sum())


def summarize(accuracies: Sequence[float]) -> Dict[str, float]:
    a = np.asarray(list(accuracies), dtype=float)
    if a.size == 0:
        raise EmptyListError("cannot summarize an empty list of accuracies")
    q1, med, q3 = np.percentile(a, [25, 50, 75])
    return {
        "mean": float(a.mean()),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "min": float(a.min()),
        "max": float(a.max()),
        "count": int(a.size),
    }
