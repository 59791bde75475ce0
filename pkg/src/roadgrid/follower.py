"""Closed-loop lane keeping: a kinematic bicycle following RDDF crops.

Every control step recomputes the RDDF crop from the current pose, steers
by pure pursuit toward the first waypoint at least ``lookahead`` away, and
integrates a rear-axle kinematic bicycle.  Cross-track error is measured
against the true lane centerline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NoLaneFoundError
from .grid import Pose, RoadGridMap, normalize_angle
from .lanes import LaneAnnotation, nearest_centerline
from .rddf import rddf_array


@dataclass(frozen=True)
class CarParams:
    wheelbase: float = 2.6
    speed: float = 5.0
    lookahead: float = 3.0
    dt: float = 0.05
    max_steer: float = 0.55

    def __post_init__(self):
        for name in ("wheelbase", "speed", "lookahead", "dt", "max_steer"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.lookahead > self.dt * self.speed:
            raise ValueError("lookahead must exceed the distance covered in one step")


TRACE_COLUMNS = ("t", "x", "y", "yaw", "steer", "cte")


@dataclass
class FollowResult:
    trace: np.ndarray = field(repr=False)  # columns TRACE_COLUMNS
    rms_cte: float
    max_cte: float
    steer_rate_max: float
    distance: float
    completed: bool
    failure: Optional[str] = None


def pure_pursuit(pose: Pose, path: np.ndarray, start: int, params: CarParams) -> float:
    """Steering angle toward the first path point beyond the lookahead distance."""
    d = np.hypot(path[start:, 0] - pose.x, path[start:, 1] - pose.y)
    far = np.nonzero(d >= params.lookahead)[0]
    j = start + (int(far[0]) if far.size else len(d) - 1)
    dist = max(float(d[j - start]), 1e-6)
    alpha = normalize_angle(math.atan2(path[j, 1] - pose.y, path[j, 0] - pose.x) - pose.yaw)
    steer = math.atan2(2.0 * params.wheelbase * math.sin(alpha), dist)
    return max(-params.max_steer, min(params.max_steer, steer))


def simulate_follow(start: Pose, road: RoadGridMap, truth_centerline: LaneAnnotation,
                    params: CarParams = CarParams(), horizon: float = 40.0) -> FollowResult:
    """Drive for ``horizon`` seconds; leaving the lane ends the run as a failure.

    Steering rates are taken between consecutive commands, the first command
    being the initial steering state.
    """
    steps = int(round(horizon / params.dt))
    rows = []
    pose = start
    failure = None
    travelled = 0.0
    for k in range(steps + 1):
        try:
            path, current = rddf_array(pose, road)
        except NoLaneFoundError as exc:
            failure = str(exc)
            break
        steer = pure_pursuit(pose, path, current, params)
        cte = nearest_centerline(truth_centerline, (pose.x, pose.y)).distance
        rows.append((k * params.dt, pose.x, pose.y, pose.yaw, steer, cte))
        if k == steps:
            break
        step = params.speed * params.dt
        pose = Pose(pose.x + step * math.cos(pose.yaw),
                    pose.y + step * math.sin(pose.yaw),
                    pose.yaw + step / params.wheelbase * math.tan(steer))
        travelled += step
        if not road.meta.contains(pose.x, pose.y):
            failure = f"car left the map at ({pose.x:.2f}, {pose.y:.2f})"
            break

    trace = np.array(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))
    cte = trace[:, 5]
    rates = np.abs(np.diff(trace[:, 4])) / params.dt if len(trace) > 1 else np.zeros(1)
    return FollowResult(
        trace=trace,
        rms_cte=float(np.sqrt(np.mean(cte**2))) if len(cte) else float("nan"),
        max_cte=float(cte.max()) if len(cte) else float("nan"),
        steer_rate_max=float(rates.max()) if rates.size else 0.0,
        distance=travelled,
        completed=failure is None,
        failure=failure,
    )
