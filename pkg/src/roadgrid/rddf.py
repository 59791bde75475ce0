"""Waypoint extraction from road grid maps.

Lane-center waypoints are found by scanning along the line orthogonal to
the current heading, stepping 0.5 m along the lane, and the resulting chain
is smoothed by nonlinear conjugate gradient on the sum of squared second
differences of the waypoint positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Sequence, Tuple

import numba
import numpy as np

from .errors import NoLaneFoundError, TooFewPointsError
from .grid import DEFAULT_LANE_WIDTH, Pose, RoadGridMap, decode_distance_table

WAYPOINT_STEP = 0.5
N_AHEAD = 150
N_BEHIND = 50
SEARCH_HALF_RANGE = 6.4
# Off-lane gaps of up to this many scan samples (one cell) do not split a run.
RUN_BRIDGE = 2
# The walk steers along the displacement from the center this many steps
# back, so per-step centroid noise does not compound into heading noise.
HEADING_BASELINE = 4
CG_GTOL = 1e-6
CG_MAX_ITER = 200
ARMIJO_C = 0.1

ANN_NONE = 0
ANN_MAX_SPEED = 1
ANN_SPEED_BUMP = 2
ANN_CROSSWALK = 3


class Annotation(NamedTuple):
    code: int = ANN_NONE
    value: float = 0.0


NO_ANNOTATION = Annotation()


@dataclass(frozen=True)
class Waypoint:
    pose: Pose
    annotation: Annotation = NO_ANNOTATION

    @property
    def x(self):
        return self.pose.x

    @property
    def y(self):
        return self.pose.y

    @property
    def yaw(self):
        return self.pose.yaw


@dataclass(frozen=True)
class RddfCrop:
    """Waypoints ordered behind-to-ahead; ``current`` indexes the car's waypoint."""

    waypoints: List[Waypoint] = field(repr=False)
    current: int = 0

    def __len__(self):
        return len(self.waypoints)

    def as_array(self) -> np.ndarray:
        return np.array([[w.x, w.y, w.yaw] for w in self.waypoints])


def _weights(lane_width: float) -> np.ndarray:
    # Centroid weight per code: half width minus decoded distance; 0 off lane
    # and on marking bands.
    d = decode_distance_table(lane_width)
    w = lane_width / 2 - d
    w[0] = 0.0
    w[1:5] = 0.0
    return w


@numba.njit(cache=True)
def _central_scan(cells, ox, oy, res, px, py, yaw, half_range, weights, bridge):
    n = cells.shape[0]
    step = res / 2
    k_max = int(round(half_range / step))
    m = 2 * k_max + 1
    nx = -math.sin(yaw)
    ny = math.cos(yaw)

    codes = np.zeros(m, np.int64)
    offs = np.zeros(m)
    for q in range(m):
        k = q - k_max
        col = int(math.floor((px + k * step * nx - ox) / res))
        row = int(math.floor((py + k * step * ny - oy) / res))
        if 0 <= row < n and 0 <= col < n:
            codes[q] = cells[row, col]
            # The sample's cell, at its center projected on the scan line.
            offs[q] = ((ox + (col + 0.5) * res - px) * nx + (oy + (row + 0.5) * res - py) * ny) / step

    # Short off-lane gaps between in-lane samples belong to the run.
    member = codes > 0
    q = 0
    while q < m:
        if member[q]:
            q += 1
            continue
        r = q
        while r < m and not member[r]:
            r += 1
        if q > 0 and r < m and r - q <= bridge:
            member[q:r] = True
        q = r

    best_near = 1 << 30
    best_off = np.inf
    best_centroid = 0.0
    found = False
    q = 0
    while q < m:
        if not member[q]:
            q += 1
            continue
        near = 1 << 30
        wsum = 0.0
        wk = 0.0
        ksum = 0.0
        count = 0
        while q < m and member[q]:
            near = min(near, abs(q - k_max))
            if codes[q] > 0:
                w = weights[codes[q]]
                wsum += w
                wk += w * offs[q]
                ksum += offs[q]
                count += 1
            q += 1
        centroid = wk / wsum if wsum > 0 else ksum / count
        off = abs(centroid)
        if near < best_near or (near == best_near and off < best_off):
            best_near = near
            best_off = off
            best_centroid = centroid
            found = True
    return found, best_near, px + best_centroid * step * nx, py + best_centroid * step * ny


@numba.njit(cache=True)
def _walk(cells, ox, oy, res, x, y, yaw, count, spacing, half_range, weights, bridge, baseline):
    n = cells.shape[0]
    extent_x = ox + n * res
    extent_y = oy + n * res
    out = np.empty((count, 3))
    m = 0
    nx, ny, nyaw = x, y, yaw
    for i in range(count):
        if i > 0 and not (ox <= nx < extent_x and oy <= ny < extent_y):
            break
        found, near, cx, cy = _central_scan(cells, ox, oy, res, nx, ny, nyaw, half_range, weights, bridge)
        if not found:
            break
        # A step that lands off the lane has run past its end; the scan
        # would otherwise latch onto the ragged end cells and turn back.
        if i > 0 and near > bridge:
            break
        if i == 0:
            wyaw = nyaw
            syaw = nyaw
        else:
            wyaw = math.atan2(cy - out[i - 1, 1], cx - out[i - 1, 0])
            j = max(0, i - baseline)
            syaw = math.atan2(cy - out[j, 1], cx - out[j, 0])
        out[i, 0] = cx
        out[i, 1] = cy
        out[i, 2] = wyaw
        m += 1
        nx = cx + spacing * math.cos(syaw)
        ny = cy + spacing * math.sin(syaw)
        nyaw = syaw
    return out[:m]


def _wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def get_lane_central_pose(pose: Pose, road: RoadGridMap,
                          search_half_range: float = SEARCH_HALF_RANGE,
                          lane_width: float = DEFAULT_LANE_WIDTH) -> Pose:
    """Lane center crossed by the line orthogonal to ``pose``.

    Samples every half cell along ``yaw +/- 90deg`` within
    ``search_half_range``.  Among contiguous in-lane runs the one holding
    the sample nearest to ``pose`` wins (ties: centroid nearest to pose);
    its weighted centroid is returned with the input heading.
    """
    m = road.meta
    if not m.contains(pose.x, pose.y):
        raise NoLaneFoundError(f"pose ({pose.x:.2f}, {pose.y:.2f}) is outside the map")
    found, _, cx, cy = _central_scan(road.cells, m.origin_x, m.origin_y, m.resolution,
                                  pose.x, pose.y, pose.yaw, search_half_range, _weights(lane_width),
                                  RUN_BRIDGE)
    if not found:
        raise NoLaneFoundError(f"no in-lane cell within {search_half_range} m of ({pose.x:.2f}, {pose.y:.2f})")
    return Pose(cx, cy, pose.yaw)


def _ahead_array(pose: Pose, road: RoadGridMap, n: int, search_half_range: float,
                 lane_width: float) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    m = road.meta
    if not m.contains(pose.x, pose.y):
        raise NoLaneFoundError(f"pose ({pose.x:.2f}, {pose.y:.2f}) is outside the map")
    wps = _walk(road.cells, m.origin_x, m.origin_y, m.resolution, pose.x, pose.y, pose.yaw,
                n, WAYPOINT_STEP, search_half_range, _weights(lane_width), RUN_BRIDGE,
                HEADING_BASELINE)
    if len(wps) == 0:
        raise NoLaneFoundError(f"no lane near ({pose.x:.2f}, {pose.y:.2f})")
    return wps


def _behind_array(pose: Pose, road: RoadGridMap, n: int, search_half_range: float,
                  lane_width: float) -> np.ndarray:
    back = Pose(pose.x, pose.y, pose.yaw + math.pi)
    wps = _ahead_array(back, road, n + 1, search_half_range, lane_width)[1:][::-1].copy()
    wps[:, 2] = _wrap(wps[:, 2] + math.pi)
    return wps


def _to_waypoints(arr: np.ndarray) -> List[Waypoint]:
    return [Waypoint(Pose(x, y, yaw)) for x, y, yaw in arr]


def get_waypoints_ahead(pose: Pose, road: RoadGridMap, n: int = N_AHEAD,
                        search_half_range: float = SEARCH_HALF_RANGE,
                        lane_width: float = DEFAULT_LANE_WIDTH) -> List[Waypoint]:
    """Up to ``n`` lane-center waypoints 0.5 m apart starting at the car.

    The first waypoint keeps the pose heading; each later one is oriented
    along the displacement from its predecessor, while the walk itself
    steps along the displacement from the waypoint HEADING_BASELINE steps
    back.  Extraction stops early
    when no lane is found, the walk leaves the map, or a step lands off the
    lane (the lane has ended).
    """
    return _to_waypoints(_ahead_array(pose, road, n, search_half_range, lane_width))


def get_waypoints_behind(pose: Pose, road: RoadGridMap, n: int = N_BEHIND,
                         search_half_range: float = SEARCH_HALF_RANGE,
                         lane_width: float = DEFAULT_LANE_WIDTH) -> List[Waypoint]:
    """Up to ``n`` waypoints behind the car, farthest first, headings along travel.

    The car's own lane-center point is not included.
    """
    return _to_waypoints(_behind_array(pose, road, n, search_half_range, lane_width))


@numba.njit(cache=True)
def _objective(x, grad):
    n = x.shape[0]
    grad[:] = 0.0
    f = 0.0
    for i in range(1, n - 1):
        for j in range(2):
            r = x[i + 1, j] - 2.0 * x[i, j] + x[i - 1, j]
            f += r * r
            grad[i - 1, j] += 2.0 * r
            grad[i, j] -= 4.0 * r
            grad[i + 1, j] += 2.0 * r
    return f


def smoothness_objective(points) -> Tuple[float, np.ndarray]:
    """Sum of squared second differences and its gradient, shape ``(n, 2)``."""
    x = np.ascontiguousarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2 or len(x) < 3:
        raise TooFewPointsError("the smoothness objective needs at least 3 points")
    g = np.empty_like(x)
    f = _objective(x, g)
    return f, g


@numba.njit(cache=True)
def _dot_interior(a, b):
    s = 0.0
    for i in range(1, a.shape[0] - 1):
        s += a[i, 0] * b[i, 0] + a[i, 1] * b[i, 1]
    return s


@numba.njit(cache=True)
def _abs_max(a):
    m = 0.0
    for i in range(a.shape[0]):
        m = max(m, abs(a[i, 0]), abs(a[i, 1]))
    return m


@numba.njit(cache=True)
def _step(out, x, alpha, d):
    for i in range(x.shape[0]):
        out[i, 0] = x[i, 0] + alpha * d[i, 0]
        out[i, 1] = x[i, 1] + alpha * d[i, 1]


@numba.njit(cache=True)
def _cg(x, gtol, max_iter):
    n = x.shape[0]
    g = np.empty_like(x)
    f = _objective(x, g)
    g[0, :] = 0.0
    g[n - 1, :] = 0.0
    d = -g
    trial = np.empty_like(x)
    g_new = np.empty_like(x)
    iterations = 0
    for it in range(max_iter):
        if _abs_max(g) <= gtol:
            break
        slope = _dot_interior(g, d)
        if slope >= 0.0:
            d[:, :] = -g
            slope = _dot_interior(g, d)
        # Backtracking from a unit step until sufficient decrease.
        alpha = 1.0
        accepted = False
        f_try = f
        for _ in range(60):
            _step(trial, x, alpha, d)
            f_try = _objective(trial, g_new)
            if f_try <= f + ARMIJO_C * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        x[:, :] = trial
        g_new[0, :] = 0.0
        g_new[n - 1, :] = 0.0
        gg = _dot_interior(g, g)
        beta = (_dot_interior(g_new, g_new) - _dot_interior(g_new, g)) / gg if gg > 0.0 else 0.0
        if beta < 0.0:
            beta = 0.0
        f = f_try
        g[:, :] = g_new
        for i in range(n):
            d[i, 0] = beta * d[i, 0] - g[i, 0]
            d[i, 1] = beta * d[i, 1] - g[i, 1]
        iterations = it + 1
    return f, iterations


def _headings(xy: np.ndarray) -> np.ndarray:
    d = np.empty_like(xy)
    d[1:-1] = xy[2:] - xy[:-2]
    d[0] = xy[1] - xy[0]
    d[-1] = xy[-1] - xy[-2]
    return np.arctan2(d[:, 1], d[:, 0])


def smooth_path(xy, gtol: float = CG_GTOL, max_iter: int = CG_MAX_ITER) -> Tuple[np.ndarray, int]:
    """Minimize the smoothness objective over interior points, endpoints fixed.

    Polak-Ribiere+ conjugate gradient with Armijo backtracking.  Returns the
    smoothed positions and the number of iterations taken.
    """
    x = np.array(xy, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2 or len(x) < 3:
        raise TooFewPointsError("smoothing needs at least 3 points")
    _, iterations = _cg(x, gtol, max_iter)
    return x, iterations


def smooth_rddf_using_conjugate_gradient(waypoints: Sequence[Waypoint]) -> List[Waypoint]:
    """Smooth waypoint positions and re-derive headings from their neighbors."""
    if len(waypoints) < 3:
        raise TooFewPointsError("smoothing needs at least 3 waypoints")
    xy = np.array([[w.x, w.y] for w in waypoints])
    sm, _ = smooth_path(xy)
    yaw = _headings(sm)
    return [Waypoint(Pose(p[0], p[1], a), w.annotation) for p, a, w in zip(sm, yaw, waypoints)]


def rddf_array(pose: Pose, road: RoadGridMap, n_ahead: int = N_AHEAD, n_behind: int = N_BEHIND,
               search_half_range: float = SEARCH_HALF_RANGE,
               lane_width: float = DEFAULT_LANE_WIDTH) -> Tuple[np.ndarray, int]:
    """Array form of :func:`compute_rddf_from_road_grid_map`: ``(x, y, yaw)`` rows and current index."""
    ahead = _ahead_array(pose, road, n_ahead, search_half_range, lane_width)
    # Behind starts from the car's lane-center point so both halves share
    # one origin.
    center = Pose(ahead[0, 0], ahead[0, 1], pose.yaw)
    try:
        behind = _behind_array(center, road, n_behind, search_half_range, lane_width)
    except NoLaneFoundError:
        behind = np.empty((0, 3))
    chain = np.vstack([behind, ahead])
    if len(chain) >= 3:
        xy, _ = smooth_path(chain[:, :2])
        chain = np.column_stack([xy, _headings(xy)])
    return chain, len(behind)


def compute_rddf_from_road_grid_map(pose: Pose, road: RoadGridMap, n_ahead: int = N_AHEAD,
                                    n_behind: int = N_BEHIND,
                                    search_half_range: float = SEARCH_HALF_RANGE,
                                    lane_width: float = DEFAULT_LANE_WIDTH) -> RddfCrop:
    """RDDF crop around ``pose``: ``n_behind`` waypoints behind, ``n_ahead`` ahead, smoothed."""
    chain, current = rddf_array(pose, road, n_ahead, n_behind, search_half_range, lane_width)
    return RddfCrop(_to_waypoints(chain), current)
