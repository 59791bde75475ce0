import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from roadgrid.errors import DegeneratePolylineError
from roadgrid.lanes import LaneAnnotation, Marking, autosmooth, flatten, nearest_centerline, nearest_on_polyline

coords = st.floats(-50, 50, allow_nan=False)
polylines = st.lists(st.tuples(coords, coords), min_size=2, max_size=8).filter(
    lambda p: all(math.dist(a, b) > 0.5 for a, b in zip(p, p[1:]))
)


def test_collinear_chain_is_the_line():
    chain = autosmooth([(0, 0), (1, 0), (2, 0)])
    pts = chain.sample(200)
    assert np.all(pts[:, 1] == 0.0)


def test_two_points_flatten_to_chord():
    poly = flatten(autosmooth([(0, 0), (3, 4)]), 0.01)
    np.testing.assert_allclose(poly, [[0, 0], [3, 4]])


def test_right_angle_joint_tangent():
    chain = autosmooth([(0, 0), (1, 0), (1, 1)])
    t_in = chain.derivative(0, 1.0)
    t_out = chain.derivative(1, 0.0)
    for t in (t_in, t_out):
        assert abs(t[0] * 1 - t[1] * 1) < 1e-12  # parallel to (1, 1)
        assert t[0] > 0


def test_control_points_match_oracle():
    pts = [(0, 0), (4, 1), (7, 5), (12, 5), (14, 9)]
    np.testing.assert_allclose(autosmooth(pts).segments, oracles.control_points(pts), atol=1e-12)


@settings(max_examples=50)
@given(polylines)
def test_autosmooth_interpolates_and_is_c1(pts):
    chain = autosmooth(pts)
    np.testing.assert_allclose(chain.segments[:, 0], np.array(pts[:-1]))
    np.testing.assert_allclose(chain.segments[-1, 3], pts[-1])
    for i in range(len(chain) - 1):
        np.testing.assert_array_equal(chain.segments[i, 3], chain.segments[i + 1, 0])
        a = chain.derivative(i, 1.0)
        b = chain.derivative(i + 1, 0.0)
        assume(np.linalg.norm(a) > 1e-9 and np.linalg.norm(b) > 1e-9)
        cross = a[0] * b[1] - a[1] * b[0]
        assert abs(cross) <= 1e-9 * np.linalg.norm(a) * np.linalg.norm(b)
        assert a @ b > 0


def test_straight_chain_flattens_to_endpoints():
    poly = flatten(autosmooth([(0, 0), (5, 0), (10, 0)]), 0.01)
    assert len(poly) == 3  # control points are kept as segment joints
    np.testing.assert_allclose(poly[:, 1], 0.0)


def _flatten_deviation(pts, tol):
    chain = autosmooth(pts)
    poly = flatten(chain, tol)
    dense = chain.sample(10_000)
    return poly, float(oracles.dist_to_polyline(poly, dense).max()), chain


def test_quarter_arc_flattening_within_tol():
    a = np.radians(np.arange(0, 91, 15))
    pts = 20 * np.column_stack([np.cos(a), np.sin(a)])
    poly, dev, chain = _flatten_deviation(pts, 0.01)
    assert dev <= 0.01
    # Every flattened vertex lies on the curve.
    dense = chain.sample(10_000)
    assert oracles.dist_to_polyline(dense, poly).max() <= 1e-3


@settings(max_examples=25, deadline=None)
@given(polylines, st.sampled_from([0.1, 0.01, 0.003]))
def test_flatten_deviation_bounded(pts, tol):
    _, dev, _ = _flatten_deviation(pts, tol)
    assert dev <= tol + 1e-9


def test_flatten_rejects_bad_tol():
    with pytest.raises(ValueError):
        flatten(autosmooth([(0, 0), (1, 0)]), 0.0)


def test_nearest_examples():
    ann = LaneAnnotation([(0, 0), (10, 0)])
    n = nearest_centerline(ann, (5, 0.4))
    assert n.distance == pytest.approx(0.4)
    assert n.side == "left"
    assert n.arclength == pytest.approx(5.0)
    assert n.tangent == pytest.approx(0.0)
    assert nearest_centerline(ann, (5, -0.4)).side == "right"
    on = nearest_centerline(ann, (3, 0))
    assert on.distance == 0 and on.side == "on"
    beyond = nearest_centerline(ann, (13, 4))
    assert beyond.distance == pytest.approx(5.0)
    assert beyond.arclength == pytest.approx(10.0)


@settings(max_examples=50)
@given(polylines, coords, coords)
def test_nearest_matches_brute_force(pts, px, py):
    ann = LaneAnnotation(pts)
    got = nearest_centerline(ann, (px, py)).distance
    want = float(oracles.dist_to_polyline(ann.polyline, [(px, py)])[0])
    assert got == pytest.approx(want, abs=1e-9)


@settings(max_examples=50)
@given(st.floats(0.05, 0.95), st.floats(0.05, 1.5))
def test_side_flips_when_mirrored(f, off):
    ann = LaneAnnotation([(0, 0), (10, 3), (20, 0)])
    s = f * ann.length
    x, y, yaw = ann.point_at(s)
    nx, ny = -math.sin(yaw), math.cos(yaw)
    left = nearest_centerline(ann, (x + off * nx, y + off * ny))
    right = nearest_centerline(ann, (x - off * nx, y - off * ny))
    assume(left.distance > 1e-6 and right.distance > 1e-6)
    assert {left.side, right.side} == {"left", "right"}
    assert left.side == "left"


def test_nearest_on_polyline_tie_keeps_first_segment():
    poly = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]])
    n = nearest_on_polyline(poly, (1.0, 1.0))
    assert n.distance == pytest.approx(1.0)
    assert n.arclength == pytest.approx(1.0)


def test_annotation_validation():
    with pytest.raises(DegeneratePolylineError):
        LaneAnnotation([(0, 0)])
    with pytest.raises(DegeneratePolylineError):
        LaneAnnotation([(0, 0), (0, 0), (1, 0)])
    with pytest.raises(ValueError):
        LaneAnnotation([(0, 0), (1, 0)], lane_width=0)
    with pytest.raises(ValueError):
        LaneAnnotation([(0, 0), (1, 0)], left_marking="dotted")
    ann = LaneAnnotation([(0, 0), (1, 0)], "broken", "none")
    assert ann.left_marking is Marking.BROKEN and ann.right_marking is Marking.NONE
    assert Marking.NONE.code is None and Marking.SOLID_50.code == 3


def test_point_at():
    ann = LaneAnnotation([(0, 0), (10, 0)])
    assert ann.length == pytest.approx(10.0)
    assert ann.point_at(4.0) == pytest.approx((4.0, 0.0, 0.0))
    assert ann.point_at(99.0)[:2] == pytest.approx((10.0, 0.0))
