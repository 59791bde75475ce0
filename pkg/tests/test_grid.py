import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roadgrid.errors import InvalidCodeError, InvalidDistanceError, OutOfBoundsError, ShapeMismatchError
from roadgrid.grid import (
    MapMeta,
    Pose,
    RemissionGridMap,
    RoadGridMap,
    cell_to_world,
    decode_distance,
    decode_distance_table,
    encode_distance_code,
    encode_distance_codes,
    normalize_angle,
    world_to_cell,
)

META = MapMeta(0.0, 0.0, 0.2, 1050)


def test_world_to_cell_examples():
    assert world_to_cell(0.0, 0.0, META) == (0, 0)
    assert world_to_cell(0.30, 0.10, META) == (0, 1)
    with pytest.raises(OutOfBoundsError):
        world_to_cell(210.0, 0.0, META)
    with pytest.raises(OutOfBoundsError):
        world_to_cell(-1e-9, 5.0, META)


def test_cell_to_world_examples():
    assert cell_to_world(0, 0, META) == pytest.approx((0.1, 0.1))
    assert cell_to_world(0, 1, META) == pytest.approx((0.3, 0.1))
    with pytest.raises(OutOfBoundsError):
        cell_to_world(1050, 0, META)


def test_encode_examples():
    assert encode_distance_code(0.0, 3.2) == 5
    assert encode_distance_code(1.6, 3.2) == 16
    assert encode_distance_code(0.8, 3.2) == 11
    with pytest.raises(InvalidDistanceError):
        encode_distance_code(-0.01, 3.2)
    with pytest.raises(InvalidDistanceError):
        encode_distance_code(1.61, 3.2)


def test_decode_examples():
    assert decode_distance(5, 3.2) == 0.0
    assert decode_distance(16, 3.2) == pytest.approx(1.6)
    for bad in (0, 4, 17):
        with pytest.raises(InvalidCodeError):
            decode_distance(bad, 3.2)


def test_decode_table():
    t = decode_distance_table(3.2)
    assert math.isnan(t[0])
    assert np.all(t[1:5] == 1.6)
    np.testing.assert_allclose(t[5:], [decode_distance(c, 3.2) for c in range(5, 17)])


@given(st.floats(0.5, 10.0))
def test_encode_decode_identity(w):
    for code in range(5, 17):
        assert encode_distance_code(decode_distance(code, w), w) == code


@given(st.floats(0.5, 10.0), st.floats(0.0, 1.0))
def test_quantization_bound(w, f):
    d = f * w / 2
    assert abs(decode_distance(encode_distance_code(d, w), w) - d) <= w / 44 + 1e-12


@given(st.lists(st.floats(0.0, 1.6), min_size=1, max_size=50))
def test_vectorized_encode_matches_scalar(ds):
    got = encode_distance_codes(np.array(ds), 3.2)
    assert list(got) == [encode_distance_code(d, 3.2) for d in ds]


@settings(max_examples=200)
@given(st.integers(0, 1049), st.integers(0, 1049),
       st.floats(-500, 500).map(lambda v: round(v / 0.2) * 0.2), st.floats(-500, 500).map(lambda v: round(v / 0.2) * 0.2))
def test_cell_round_trip(row, col, ox, oy):
    meta = MapMeta(ox, oy, 0.2, 1050)
    x, y = cell_to_world(row, col, meta)
    assert world_to_cell(x, y, meta) == (row, col)


@given(st.integers(0, 99), st.integers(0, 99), st.floats(0.0, 0.999999), st.floats(0.0, 0.999999))
def test_world_to_cell_constant_on_half_open_cell(row, col, fu, fv):
    meta = MapMeta(0.0, 0.0, 0.25, 100)  # binary-exact resolution keeps cell edges exact
    x = (col + fu) * 0.25
    y = (row + fv) * 0.25
    assert world_to_cell(x, y, meta) == (row, col)


@given(st.floats(-50, 50))
def test_pose_yaw_normalized(a):
    p = Pose(0, 0, a)
    assert -math.pi < p.yaw <= math.pi
    assert math.isclose(math.cos(p.yaw), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(p.yaw), math.sin(a), abs_tol=1e-9)


def test_normalize_angle_boundaries():
    assert normalize_angle(math.pi) == math.pi
    assert normalize_angle(-math.pi) == math.pi
    assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)


def test_pose_advanced():
    p = Pose(1.0, 2.0, math.pi / 2).advanced(3.0)
    assert (p.x, p.y) == pytest.approx((1.0, 5.0))


def test_meta_validation():
    with pytest.raises(ValueError):
        MapMeta(0, 0, 0.0, 10)
    with pytest.raises(ValueError):
        MapMeta(0, 0, 0.2, 0)
    with pytest.raises(ValueError):
        MapMeta(0, 0, 0.2, 10.5)
    assert MapMeta(0, 0, 0.2, 1050).extent == pytest.approx(210.0)


def test_road_map_rejects_bad_codes():
    meta = MapMeta(0, 0, 0.2, 4)
    cells = np.zeros((4, 4), int)
    cells[2, 3] = 17
    with pytest.raises(InvalidCodeError, match=r"\(2, 3\)"):
        RoadGridMap(meta, cells)
    cells[2, 3] = -1
    with pytest.raises(InvalidCodeError):
        RoadGridMap(meta, cells)
    f = np.zeros((4, 4))
    f[1, 1] = 2.5
    with pytest.raises(InvalidCodeError, match=r"\(1, 1\)"):
        RoadGridMap(meta, f)
    with pytest.raises(ShapeMismatchError):
        RoadGridMap(meta, np.zeros((3, 4), int))


def test_maps_are_read_only():
    meta = MapMeta(0, 0, 0.2, 4)
    road = RoadGridMap(meta, np.ones((4, 4), int) * 5)
    with pytest.raises(ValueError):
        road.cells[0, 0] = 1
    rem = RemissionGridMap.unknown(meta)
    assert rem.unknown_mask.all()
    with pytest.raises(ValueError):
        rem.cells[0, 0] = 0.5


def test_remission_range_checked():
    meta = MapMeta(0, 0, 0.2, 2)
    with pytest.raises(ValueError):
        RemissionGridMap(meta, [[0.0, 1.1], [0.2, np.nan]])
    with pytest.raises(ValueError):
        RemissionGridMap(meta, [[0.0, -np.inf], [0.2, np.nan]])
    RemissionGridMap(meta, [[0.0, 1.0], [0.2, np.nan]])


def test_window_and_code_at():
    meta = MapMeta(10.0, 20.0, 0.2, 8)
    cells = np.arange(64).reshape(8, 8) % 17
    road = RoadGridMap(meta, cells)
    w = road.window(2, 3, 4)
    assert w.meta == MapMeta(10.6, 20.4, 0.2, 4)
    np.testing.assert_array_equal(w.cells, cells[2:6, 3:7])
    assert road.code_at(10.0 + 3 * 0.2 + 0.05, 20.0 + 2 * 0.2 + 0.05) == cells[2, 3]
