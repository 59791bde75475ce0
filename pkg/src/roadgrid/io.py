"""On-disk formats.

Remission PNG
    8-bit grayscale.  Pixel 0 is UNKNOWN; pixel ``v`` in 1..255 stores
    remission ``(v - 1) / 254``.
Road PNG
    8-bit single channel holding the cell code 0..16 verbatim.
Both
    Pixel row 0 is the northernmost cell row.
Directory sidecar ``meta.txt``
    ``key=value`` lines with at least ``resolution``; tile and crop
    directories add their own keys.
RDDF text
    ``# rddf v1`` header, then ``x y yaw ann_code ann_value`` per waypoint.
Lane annotation text
    ``lane <draw_order> <lane_width> <left> <right>``, ``pt <x> <y>`` lines,
    ``end``.  ``#`` starts a comment.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from .errors import FormatError, InvalidCodeError, StorageFailureError
from .grid import MapMeta, Pose, RemissionGridMap, RoadGridMap
from .lanes import LaneAnnotation, Marking
from .raster import CropPair
from .rddf import Annotation, RddfCrop, Waypoint

PathLike = Union[str, os.PathLike]

META_FILE = "meta.txt"
CROP_INDEX = "crops.txt"
RDDF_HEADER = "# rddf v1"


def _num(v: float) -> str:
    return repr(float(v))


# -- grid PNGs -------------------------------------------------------------

def remission_to_pixels(cells: np.ndarray) -> np.ndarray:
    unknown = np.isnan(cells)
    v = np.rint(np.where(unknown, 0.0, cells) * 254.0).astype(np.int64) + 1
    return np.where(unknown, 0, v).astype(np.uint8)


def pixels_to_remission(px: np.ndarray) -> np.ndarray:
    px = px.astype(np.float64)
    return np.where(px == 0, np.nan, (px - 1.0) / 254.0)


def _write_png(path: PathLike, pixels: np.ndarray):
    try:
        Image.fromarray(np.ascontiguousarray(np.flipud(pixels).astype(np.uint8))).save(path, format="PNG")
    except OSError as exc:
        raise StorageFailureError(f"cannot write {path}: {exc}") from exc


def _read_png(path: PathLike) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise FormatError(f"{path}: expected an 8-bit single-channel PNG, got mode {im.mode}")
            return np.flipud(np.asarray(im, dtype=np.uint8)).copy()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise FormatError(f"{path}: unreadable PNG ({exc})") from exc


def write_remission_png(path: PathLike, grid: RemissionGridMap):
    _write_png(path, remission_to_pixels(grid.cells))


def write_road_png(path: PathLike, grid: RoadGridMap):
    _write_png(path, grid.cells)


def read_remission_png(path: PathLike, meta: MapMeta) -> RemissionGridMap:
    px = _read_png(path)
    return RemissionGridMap(_meta_for(px, meta, path), pixels_to_remission(px))


def read_road_png(path: PathLike, meta: MapMeta) -> RoadGridMap:
    px = _read_png(path)
    try:
        return RoadGridMap(_meta_for(px, meta, path), px)
    except InvalidCodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _meta_for(px: np.ndarray, meta: MapMeta, path) -> MapMeta:
    if px.shape != (meta.size, meta.size):
        raise FormatError(f"{path}: image is {px.shape[1]}x{px.shape[0]}, expected {meta.size}x{meta.size}")
    return meta


# -- sidecar ---------------------------------------------------------------

def write_meta(directory: PathLike, values: Dict[str, object]):
    lines = [f"{k}={_num(v) if isinstance(v, float) else v}" for k, v in values.items()]
    Path(directory, META_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_meta(directory: PathLike) -> Dict[str, str]:
    path = Path(directory, META_FILE)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise FormatError(f"{path}: missing directory metadata") from exc
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


# -- RDDF ------------------------------------------------------------------

def format_rddf(waypoints: Iterable[Waypoint]) -> str:
    lines = [RDDF_HEADER]
    for w in waypoints:
        a = w.annotation
        lines.append(f"{_num(w.x)} {_num(w.y)} {_num(w.yaw)} {int(a.code)} {_num(a.value)}")
    return "\n".join(lines) + "\n"


def write_rddf(path: PathLike, waypoints: Union[RddfCrop, Iterable[Waypoint]]):
    if isinstance(waypoints, RddfCrop):
        waypoints = waypoints.waypoints
    Path(path).write_text(format_rddf(waypoints), encoding="utf-8")


def parse_rddf(text: str, source: str = "<rddf>") -> List[Waypoint]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != RDDF_HEADER:
        raise FormatError(f"{source}:1: missing '{RDDF_HEADER}' header")
    out = []
    for n, line in enumerate(lines[1:], 2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"{source}:{n}: expected 'x y yaw ann_code ann_value'")
        try:
            x, y, yaw = (float(p) for p in parts[:3])
            code, value = int(parts[3]), float(parts[4])
        except ValueError as exc:
            raise FormatError(f"{source}:{n}: {exc}") from exc
        if code not in (0, 1, 2, 3):
            raise FormatError(f"{source}:{n}: unknown annotation code {code}")
        out.append(Waypoint(Pose(x, y, yaw), Annotation(code, value)))
    return out


def read_rddf(path: PathLike) -> List[Waypoint]:
    return parse_rddf(Path(path).read_text(encoding="utf-8"), str(path))


# -- lane annotations --------------------------------------------------------

def format_annotations(annotations: Iterable[LaneAnnotation]) -> str:
    out = []
    for a in annotations:
        out.append(f"lane {a.draw_order} {_num(a.lane_width)} {a.left_marking.value} {a.right_marking.value}")
        out.extend(f"pt {_num(x)} {_num(y)}" for x, y in a.points)
        out.append("end")
    return "\n".join(out) + "\n"


def write_annotations(path: PathLike, annotations: Iterable[LaneAnnotation]):
    Path(path).write_text(format_annotations(annotations), encoding="utf-8")


def parse_annotations(text: str, source: str = "<annotations>") -> List[LaneAnnotation]:
    anns = []
    header = None
    pts: List[Tuple[float, float]] = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "lane":
                if header is not None:
                    raise FormatError(f"{source}:{n}: 'lane' before 'end' of previous lane")
                if len(parts) != 5:
                    raise FormatError(f"{source}:{n}: expected 'lane <order> <width> <left> <right>'")
                header = (int(parts[1]), float(parts[2]), Marking(parts[3]), Marking(parts[4]), n)
                pts = []
            elif parts[0] == "pt":
                if header is None or len(parts) != 3:
                    raise FormatError(f"{source}:{n}: 'pt x y' outside a lane block")
                pts.append((float(parts[1]), float(parts[2])))
            elif parts[0] == "end":
                if header is None:
                    raise FormatError(f"{source}:{n}: 'end' without 'lane'")
                order, width, left, right, start = header
                try:
                    anns.append(LaneAnnotation(tuple(pts), left, right, width, order))
                except ValueError as exc:
                    raise FormatError(f"{source}:{start}: {exc}") from exc
                header = None
            else:
                raise FormatError(f"{source}:{n}: unknown keyword '{parts[0]}'")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{source}:{n}: {exc}") from exc
    if header is not None:
        raise FormatError(f"{source}: lane starting at line {header[4]} has no 'end'")
    return anns


def read_annotations(path: PathLike) -> List[LaneAnnotation]:
    return parse_annotations(Path(path).read_text(encoding="utf-8"), str(path))


# -- crop directories --------------------------------------------------------

def crop_paths(directory: PathLike, crop_id: str) -> Tuple[Path, Path]:
    d = Path(directory)
    return d / f"{crop_id}_rem.png", d / f"{crop_id}_road.png"


_CROP_INDEX_HEADER = "# id origin_x origin_y resolution size center_x center_y center_yaw"


class CropWriter:
    """Write crop pairs one at a time, keeping only the index in memory.

    Use as a context manager; ``crops.txt`` is written on exit.
    """

    def __init__(self, directory: PathLike):
        self.directory = Path(directory)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailureError(f"cannot create {self.directory}: {exc}") from exc
        self._rows = [_CROP_INDEX_HEADER]
        self.ids: List[str] = []

    def add(self, crop_id: str, pair: CropPair):
        rem_path, road_path = crop_paths(self.directory, crop_id)
        write_remission_png(rem_path, pair.remission)
        write_road_png(road_path, pair.road)
        m, c = pair.meta, pair.center_pose
        self._rows.append(" ".join([crop_id, _num(m.origin_x), _num(m.origin_y), _num(m.resolution),
                                    str(m.size), _num(c.x), _num(c.y), _num(c.yaw)]))
        self.ids.append(crop_id)

    def close(self):
        path = self.directory / CROP_INDEX
        try:
            path.write_text("\n".join(self._rows) + "\n", encoding="utf-8")
        except OSError as exc:
            raise StorageFailureError(f"cannot write {path}: {exc}") from exc

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        return False


def write_crops(directory: PathLike, pairs: Iterable[CropPair], ids: Sequence[str] = None) -> List[str]:
    """Write crop pairs and their index; ids default to ``000000``, ``000001``, ..."""
    with CropWriter(directory) as w:
        for i, pair in enumerate(pairs):
            w.add(ids[i] if ids is not None else f"{i:06d}", pair)
    return w.ids


def read_crop_index(directory: PathLike) -> List[Tuple[str, MapMeta, Pose]]:
    path = Path(directory, CROP_INDEX)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise FormatError(f"{path}: missing crop index") from exc
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        p = line.split()
        if len(p) != 8:
            raise FormatError(f"{path}:{n}: expected 8 fields")
        try:
            meta = MapMeta(float(p[1]), float(p[2]), float(p[3]), int(p[4]))
            pose = Pose(float(p[5]), float(p[6]), float(p[7]))
        except ValueError as exc:
            raise FormatError(f"{path}:{n}: {exc}") from exc
        out.append((p[0], meta, pose))
    return out


def read_crops(directory: PathLike) -> List[Tuple[str, CropPair]]:
    out = []
    for cid, meta, pose in read_crop_index(directory):
        rem_path, road_path = crop_paths(directory, cid)
        out.append((cid, CropPair(read_remission_png(rem_path, meta), read_road_png(road_path, meta), pose)))
    return out
