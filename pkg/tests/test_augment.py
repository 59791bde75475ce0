import math

import numpy as np
import pytest

from roadgrid.augment import ROTATIONS_DEG, TRANSLATIONS_M, augment_pair, resample_pair
from roadgrid.errors import InsufficientClearanceError, ShapeMismatchError
from roadgrid.grid import MapMeta, Pose, RemissionGridMap, RoadGridMap
from roadgrid.lanes import LaneAnnotation, Marking
from roadgrid.raster import cut_crop, rasterize
from roadgrid.synth import generate_remission

META = MapMeta(0.0, 0.0, 0.2, 400)
CENTER = Pose(40.0, 40.0, math.radians(30))


@pytest.fixture(scope="module")
def world():
    lane = LaneAnnotation([(0, 40 - 40 * math.tan(math.radians(30))), (80, 40 + 40 * math.tan(math.radians(30)))],
                          Marking.BROKEN, Marking.SOLID)
    road = rasterize([lane], META)
    rem = generate_remission([lane], META, seed=5)
    return rem, road


def test_default_sets():
    assert len(ROTATIONS_DEG) == 24 and ROTATIONS_DEG[1] == 15.0
    assert TRANSLATIONS_M == (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)


def test_168_outputs(world):
    rem, road = world
    out = augment_pair(rem, road, CENTER)
    assert len(out) == 168
    assert all(p.meta.size == 120 for p in out)
    assert out[0].center_pose.yaw == pytest.approx(CENTER.yaw)
    assert out[7].center_pose.yaw == pytest.approx(CENTER.yaw - math.radians(15))


def test_identity_transform(world):
    rem, road = world
    ident = resample_pair(rem, road, CENTER)[0]
    crop = cut_crop(rem, road, CENTER)
    assert ident.meta == crop.meta
    np.testing.assert_array_equal(ident.road.cells, crop.road.cells)
    np.testing.assert_array_equal(ident.remission.cells, crop.remission.cells)


def test_half_turn_twice_restores(world):
    rem, road = world
    once = resample_pair(rem, road, CENTER, (180.0,))[0]
    big = RoadGridMap(META, road.cells.copy())
    # Paste the rotated crop back and rotate it again about the same corner.
    cells = np.zeros_like(big.cells)
    r0 = round(once.meta.origin_y / 0.2)
    c0 = round(once.meta.origin_x / 0.2)
    cells[r0:r0 + 120, c0:c0 + 120] = once.road.cells
    pasted = RoadGridMap(META, cells)
    twice = resample_pair(RemissionGridMap.unknown(META), pasted, CENTER, (180.0,))[0]
    np.testing.assert_array_equal(twice.road.cells, cut_crop(rem, road, CENTER).road.cells)


def test_alphabet_and_source_values(world):
    rem, road = world
    src_rem = set(np.unique(rem.cells[~np.isnan(rem.cells)]))
    for pair in augment_pair(rem, road, CENTER)[::7]:
        assert pair.road.cells.max() <= 16
        vals = pair.remission.cells[~np.isnan(pair.remission.cells)]
        assert set(np.unique(vals)) <= src_rem


def test_radial_symmetry():
    meta = MapMeta(0.0, 0.0, 0.2, 400)
    xs, ys = meta.cell_centers()
    X, Y = np.meshgrid(xs, ys)
    r = np.hypot(X - 40.0, Y - 40.0)
    road = RoadGridMap(meta, (np.floor(r) % 17).astype(int))
    rem = RemissionGridMap(meta, (np.floor(r) % 10) / 10)
    out = resample_pair(rem, road, Pose(40.0, 40.0), ROTATIONS_DEG)
    for k in range(12):
        np.testing.assert_array_equal(out[k].road.cells, out[k + 12].road.cells)


def test_histogram_stability(world):
    rem, road = world
    base = np.bincount(cut_crop(rem, road, CENTER).road.cells.ravel(), minlength=17)
    for pair in resample_pair(rem, road, CENTER, ROTATIONS_DEG):
        h = np.bincount(pair.road.cells.ravel(), minlength=17)
        assert np.abs(h - base).sum() / 2 < 0.05 * 120 * 120


def test_translation_moves_across_heading():
    meta = MapMeta(0.0, 0.0, 0.2, 400)
    lane = LaneAnnotation([(0, 40.0), (80, 40.0)], Marking.SOLID, Marking.SOLID)
    road = rasterize([lane], meta)
    rem = RemissionGridMap.unknown(meta)
    base, left = resample_pair(rem, road, Pose(40.0, 40.0, 0.0), (0.0,), (0.0, 1.0))
    # Shifting the window 1 m to the left moves the lane 5 rows down in the crop.
    np.testing.assert_array_equal(left.road.cells[:-5], base.road.cells[5:])
    assert base.road.cells.any()


def test_out_of_map_samples_are_unknown():
    meta = MapMeta(0.0, 0.0, 0.2, 120)
    road = RoadGridMap(meta, np.full((120, 120), 7))
    rem = RemissionGridMap(meta, np.full((120, 120), 0.5))
    rot = resample_pair(rem, road, Pose(12.0, 12.0), (45.0,))[0]
    assert rot.road.cells[0, 0] == 0 and np.isnan(rot.remission.cells[0, 0])
    assert rot.road.cells[60, 60] == 7


def test_clearance_check(world):
    rem, road = world
    with pytest.raises(InsufficientClearanceError):
        augment_pair(rem, road, Pose(10.0, 40.0))
    assert len(augment_pair(rem, road, Pose(10.0, 40.0), clearance=0.0)) == 168


def test_meta_mismatch(world):
    rem, road = world
    with pytest.raises(ShapeMismatchError):
        resample_pair(RemissionGridMap.unknown(MapMeta(0, 0, 0.2, 10)), road, CENTER)
