import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roadgrid.errors import EmptyListError, ShapeMismatchError
from roadgrid.grid import MapMeta, RoadGridMap
from roadgrid.metrics import (
    ALL_CELLS,
    LANE_CELLS_ONLY,
    accuracy_from_confusion,
    class_accuracy,
    confusion_matrix,
    summarize,
)


def test_ten_percent_altered(rng):
    gt = rng.integers(0, 17, (120, 120))
    pred = gt.copy()
    idx = rng.choice(14400, 1440, replace=False)
    flat = pred.ravel()
    flat[idx] = (flat[idx] + 1) % 17
    assert class_accuracy(pred, gt) == pytest.approx(0.9)


def test_all_wrong_and_identity(rng):
    gt = rng.integers(0, 17, (50, 50))
    assert class_accuracy((gt + 3) % 17, gt) == 0.0
    cm = confusion_matrix(gt, gt)
    assert np.count_nonzero(cm - np.diag(np.diag(cm))) == 0
    np.testing.assert_array_equal(np.diag(cm), np.bincount(gt.ravel(), minlength=17))


def test_confusion_orientation():
    gt = np.array([[1, 1], [5, 0]])
    pred = np.array([[2, 1], [5, 0]])
    cm = confusion_matrix(pred, gt)
    assert cm[1, 2] == 1 and cm[2, 1] == 0
    assert cm.shape == (17, 17) and cm.sum() == 4


@given(st.integers(0, 2**31))
def test_accuracy_equals_confusion_trace(seed):
    r = np.random.default_rng(seed)
    gt = r.integers(0, 17, (30, 30))
    pred = np.where(r.random((30, 30)) < 0.3, r.integers(0, 17, (30, 30)), gt)
    cm = confusion_matrix(pred, gt)
    assert cm.sum() == 900
    assert accuracy_from_confusion(cm) == pytest.approx(class_accuracy(pred, gt))
    lane = gt != 0
    want = (pred[lane] == gt[lane]).mean() if lane.any() else math.nan
    got = class_accuracy(pred, gt, LANE_CELLS_ONLY)
    assert got == pytest.approx(want, nan_ok=True)


def test_lane_scope_without_lane_cells_is_nan():
    z = np.zeros((4, 4), int)
    assert math.isnan(class_accuracy(z, z, LANE_CELLS_ONLY))
    assert class_accuracy(z, z, ALL_CELLS) == 1.0
    with pytest.raises(ValueError):
        class_accuracy(z, z, "some")


def test_shape_and_meta_mismatch():
    with pytest.raises(ShapeMismatchError):
        class_accuracy(np.zeros((3, 3), int), np.zeros((4, 4), int))
    a = RoadGridMap.empty(MapMeta(0, 0, 0.2, 4))
    b = RoadGridMap.empty(MapMeta(1, 0, 0.2, 4))
    with pytest.raises(ShapeMismatchError):
        confusion_matrix(a, b)


def test_summarize_examples():
    s = summarize([0.5])
    assert all(s[k] == 0.5 for k in ("mean", "median", "q1", "q3", "min", "max"))
    s = summarize([0.0, 0.25, 0.5, 0.75, 1.0])
    assert (s["median"], s["q1"], s["q3"]) == (0.5, 0.25, 0.75)
    assert s["count"] == 5 and s["mean"] == 0.5
    with pytest.raises(EmptyListError):
        summarize([])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_summary_ordering(values):
    s = summarize(values)
    assert s["min"] <= s["q1"] <= s["median"] <= s["q3"] <= s["max"]
    assert s["min"] - 1e-12 <= s["mean"] <= s["max"] + 1e-12
