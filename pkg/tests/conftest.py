import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roadgrid import scenes  # noqa: E402
from roadgrid.grid import Pose  # noqa: E402
from roadgrid.raster import rasterize  # noqa: E402
from roadgrid.rddf import rddf_array  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


class SceneMap:
    def __init__(self, scene):
        self.scene = scene
        self.road = rasterize(scene.annotations, scene.meta)

    def pose_at(self, s, offset=0.0):
        x, y, yaw = self.scene.lane.point_at(s)
        return Pose(x - offset * np.sin(yaw), y + offset * np.cos(yaw), yaw)


@pytest.fixture(scope="session")
def scene_maps():
    return {name: SceneMap(build()) for name, build in scenes.SCENES.items()}


@pytest.fixture(scope="session")
def warm_jit(scene_maps):
    # First numba calls compile (or load from cache); keep that out of timings.
    sm = scene_maps["straight"]
    rddf_array(sm.pose_at(sm.scene.start_arclength), sm.road)
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_AC_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_ac"):
        key = name.split("_")[1]
        prev = _AC_RESULTS.get(key, True)
        _AC_RESULTS[key] = prev and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        CRITERIA = {}
    terminalreporter.section("acceptance criteria")
    for key in sorted(_AC_RESULTS, key=lambda k: int(k[2:])):
        status = "PASS" if _AC_RESULTS[key] else "FAIL"
        terminalreporter.write_line(f"{key.upper()} {status}  {CRITERIA.get(key, '')}")
