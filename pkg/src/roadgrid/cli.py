"""Command-line front end: ``roadgrid <command> ...``.

Relative paths resolve against ``--data-dir``, which defaults to the
``ROADGRID_DATA`` environment variable (or the working directory).
Usage errors exit with status 2, data errors with status 1 and a message
naming the offending file or cell.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import io, render, scenes, segment, synth, tilestore
from .augment import DEFAULT_CLEARANCE, ROTATIONS_DEG, TRANSLATIONS_M, augment_pair
from .errors import FormatError, RoadGridError
from .follower import TRACE_COLUMNS, CarParams, simulate_follow
from .grid import DEFAULT_RESOLUTION, MapMeta, Pose
from .lanes import LaneAnnotation
from .metrics import (ALL_CELLS, LANE_CELLS_ONLY, accuracy_from_confusion, class_accuracy, confusion_matrix,
                      summarize)
from .raster import cut_crop_pairs, rasterize
from .rddf import compute_rddf_from_road_grid_map

DATA_ENV = "ROADGRID_DATA"
_SCOPES = {"all": ALL_CELLS, "lane": LANE_CELLS_ONLY}


def _floats(n: int):
    def parse(text: str):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        if len(vals) != n or not all(math.isfinite(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return vals
    return parse


def _float_list(text: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _segmenter(text: str):
    try:
        return segment.parse_kind(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _seeded(kind, seed: Optional[int]):
    # --seed overrides the seed embedded in a noisy:P:SEED string.
    if seed is not None and isinstance(kind, segment.Noisy):
        return segment.Noisy(kind.p, seed)
    return kind


def _tile_aligned_meta(annotations: Sequence[LaneAnnotation], resolution: float,
                       margin: float = 10.0) -> MapMeta:
    pts = np.vstack([np.asarray(a.points) for a in annotations])
    lo = np.floor((pts.min(axis=0) - margin) / tilestore.TILE_EXTENT)
    hi = np.ceil((pts.max(axis=0) + margin) / tilestore.TILE_EXTENT)
    tiles = int(max(hi - lo))
    cells = round(tilestore.TILE_EXTENT / resolution)
    return MapMeta(float(lo[0] * tilestore.TILE_EXTENT), float(lo[1] * tilestore.TILE_EXTENT),
                   resolution, tiles * cells)


class Runner:
    def __init__(self, args):
        self.args = args
        self.data_dir = Path(args.data_dir)

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.data_dir / p

    def _check_extent(self):
        a = self.args
        if (a.origin is None) != (a.size is None):
            raise _UsageError("--origin and --size go together")

    def _map_meta(self, annotations) -> MapMeta:
        a = self.args
        if a.origin is None:
            return _tile_aligned_meta(annotations, a.resolution)
        return MapMeta(a.origin[0], a.origin[1], a.resolution, a.size)

    def rasterize(self):
        self._check_extent()
        anns = io.read_annotations(self.path(self.args.annotations))
        road = rasterize(anns, self._map_meta(anns))
        keys = tilestore.save_map_as_tiles(road, self.path(self.args.out))
        print(f"wrote {len(keys)} road tiles of a {road.meta.size}-cell map to {self.args.out}")

    def synth(self):
        a = self.args
        self._check_extent()
        anns = io.read_annotations(self.path(a.annotations))
        params = synth.SynthParams(a.asphalt, a.marking, a.noise, a.unknown)
        rem = synth.generate_remission(anns, self._map_meta(anns), params, a.seed)
        keys = tilestore.save_map_as_tiles(rem, self.path(a.out))
        print(f"wrote {len(keys)} remission tiles to {a.out}")

    def crops(self):
        a = self.args
        map_dir = self.path(a.map)
        rem = tilestore.load_all(map_dir, tilestore.REMISSION)
        road = tilestore.load_all(map_dir, tilestore.ROAD)
        if rem.meta != road.meta:
            raise FormatError(f"{map_dir}: remission and road tiles cover different areas")
        route = [w.pose for w in io.read_rddf(self.path(a.route))]
        pairs = cut_crop_pairs(rem, road, route, a.spacing, a.crop_size)
        ids = io.write_crops(self.path(a.out), pairs)
        print(f"wrote {len(ids)} crop pairs to {a.out}")

    def augment(self):
        a = self.args
        src = self.path(getattr(a, "in"))
        full = None
        if a.map:
            map_dir = self.path(a.map)
            full = (tilestore.load_all(map_dir, tilestore.REMISSION), tilestore.load_all(map_dir, tilestore.ROAD))
        count = 0
        with io.CropWriter(self.path(a.out)) as w:
            for cid, meta, pose in io.read_crop_index(src):
                if full is not None:
                    rem, road = full
                    clearance = DEFAULT_CLEARANCE
                else:
                    rem_path, road_path = io.crop_paths(src, cid)
                    rem = io.read_remission_png(rem_path, meta)
                    road = io.read_road_png(road_path, meta)
                    # A stored crop is its own source; cells rotated in
                    # from beyond it read as UNKNOWN / off-lane.
                    clearance = 0.0
                pairs = augment_pair(rem, road, pose, a.rotations, a.translations,
                                     clearance=clearance, size=meta.size)
                for k, pair in enumerate(pairs):
                    w.add(f"{cid}_{k:03d}", pair)
                    count += 1
        print(f"wrote {count} augmented pairs to {a.out}")

    def extract_rddf(self):
        a = self.args
        pose = Pose(*a.pose)
        road = tilestore.load_window(pose, tilestore.ROAD, self.path(a.map))
        crop = compute_rddf_from_road_grid_map(pose, road)
        io.write_rddf(self.path(a.out), crop)
        print(f"wrote {len(crop)} waypoints ({crop.current} behind) to {a.out}")

    def infer_map(self):
        a = self.args
        map_dir = self.path(a.map)
        rem = tilestore.load_all(map_dir, tilestore.REMISSION)
        gt = None
        if not isinstance(a.segmenter, segment.External):
            gt_dir = self.path(a.gt) if a.gt else map_dir
            gt = tilestore.load_all(gt_dir, tilestore.ROAD)
        pred = segment.infer_map(_seeded(a.segmenter, a.seed), rem, gt, a.crop_size)
        keys = tilestore.save_map_as_tiles(pred, self.path(a.out))
        print(f"wrote {len(keys)} inferred road tiles to {a.out}")

    def evaluate(self):
        a = self.args
        pred_dir, gt_dir = self.path(a.pred), self.path(a.gt)
        scope = _SCOPES[a.scope]
        rows = []
        total = None
        for cid, meta, _ in io.read_crop_index(gt_dir):
            gt = io.read_road_png(io.crop_paths(gt_dir, cid)[1], meta)
            pred = io.read_road_png(_prediction_path(pred_dir, cid), meta)
            rows.append((cid, class_accuracy(pred, gt, scope)))
            cm = confusion_matrix(pred, gt)
            total = cm if total is None else total + cm
        if not rows:
            raise FormatError(f"{gt_dir / io.CROP_INDEX}: no crops listed")
        scored = [acc for _, acc in rows if not math.isnan(acc)]
        if not scored:
            raise FormatError(f"{gt_dir}: no crop has lane cells to score")
        stats = summarize(scored)
        report = self.path(a.report)
        with open(report, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["crop", "accuracy"])
            for cid, acc in rows:
                out.writerow([cid, repr(acc)])
            for k in ("mean", "median", "q1", "q3", "min", "max", "count"):
                out.writerow([f"summary:{k}", repr(stats[k])])
            if scope == ALL_CELLS:
                out.writerow(["summary:pooled", repr(accuracy_from_confusion(total))])
        if a.confusion:
            np.savetxt(self.path(a.confusion), total, fmt="%d", delimiter=",")
        print(f"crops={stats['count']} mean={stats['mean']:.6f} median={stats['median']:.6f} "
              f"q1={stats['q1']:.6f} q3={stats['q3']:.6f}")

    def render(self):
        a = self.args
        map_dir = self.path(a.map)
        kind = tilestore.ROAD if tilestore.list_tiles(map_dir, tilestore.ROAD) else tilestore.REMISSION
        grid = tilestore.load_all(map_dir, kind)
        wps = io.read_rddf(self.path(a.overlay)) if a.overlay else None
        render.save_render(self.path(a.out), grid, wps, scale=a.scale)
        print(f"rendered {kind} map to {a.out}")

    def simulate(self):
        a = self.args
        if a.track in scenes.SCENES:
            sc = scenes.SCENES[a.track]()
            anns, meta = sc.annotations, sc.meta
            start_s, length = sc.start_arclength, sc.drive_length
        else:
            anns = io.read_annotations(self.path(a.track))
            meta = _tile_aligned_meta(anns, DEFAULT_RESOLUTION)
            start_s = 0.0
            length = max(anns[0].length - 20.0, 0.0)
        lane = anns[0]
        if a.start is not None:
            start_s = a.start
        if not 0.0 <= start_s <= lane.length:
            raise _UsageError(f"--start {start_s} lies outside the lane (length {lane.length:.1f} m)")
        road = rasterize(anns, meta)
        if not isinstance(a.segmenter, segment.Oracle):
            seed = a.seed if a.seed is not None else 0
            rem = synth.generate_remission(anns, meta, seed=seed)
            road = segment.infer_map(_seeded(a.segmenter, a.seed), rem, road)
        params = CarParams(speed=a.speed, lookahead=a.lookahead)
        x, y, yaw = lane.point_at(start_s)
        nx, ny = -math.sin(yaw), math.cos(yaw)
        start = Pose(x + a.offset * nx, y + a.offset * ny, yaw)
        horizon = a.horizon if a.horizon is not None else length / params.speed
        result = simulate_follow(start, road, lane, params, horizon)
        with open(self.path(a.out), "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(TRACE_COLUMNS)
            for row in result.trace:
                out.writerow([repr(float(v)) for v in row])
        print(f"rms_cte={result.rms_cte:.4f} max_cte={result.max_cte:.4f} "
              f"steer_rate_max={result.steer_rate_max:.4f} distance={result.distance:.1f} "
              f"completed={result.completed}" + (f" failure={result.failure}" if result.failure else ""))
        return 0 if result.completed else 1

    def scene(self):
        sc = scenes.SCENES[self.args.name]()
        io.write_annotations(self.path(self.args.out), sc.annotations)
        print(f"wrote {len(sc.annotations)} lanes of scene {sc.name} to {self.args.out}")


class _UsageError(Exception):
    pass


def _prediction_path(pred_dir: Path, crop_id: str) -> Path:
    for name in (f"{crop_id}_pred.png", f"{crop_id}_road.png"):
        p = pred_dir / name
        if p.exists():
            return p
    raise segment.MissingInferenceFileError(f"{pred_dir / (crop_id + '_pred.png')}: prediction not found")


def _add_extent(p):
    p.add_argument("--origin", type=_floats(2), metavar="X,Y",
                   help="map lower-left corner in metres (tile aligned); default fits the annotations")
    p.add_argument("--size", type=_positive_int, help="map side in cells, a multiple of the tile size")
    p.add_argument("--resolution", type=_positive_float, default=DEFAULT_RESOLUTION)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roadgrid", description="Road grid maps, lane-center waypoints and a lane follower.")
    parser.add_argument("--data-dir", default=os.environ.get(DATA_ENV, "."),
                        help=f"base for relative paths (default: ${DATA_ENV} or the working directory)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rasterize", help="rasterize lane annotations into road map tiles")
    p.add_argument("--annotations", required=True)
    _add_extent(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="paint a synthetic remission map into tiles")
    p.add_argument("--annotations", required=True)
    _add_extent(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--asphalt", type=float, default=synth.SynthParams.asphalt_mean)
    p.add_argument("--marking", type=float, default=synth.SynthParams.marking_mean)
    p.add_argument("--noise", type=float, default=synth.SynthParams.noise_sd)
    p.add_argument("--unknown", type=float, default=synth.SynthParams.unknown_fraction)
    p.add_argument("--out", required=True)

    p = sub.add_parser("crops", help="cut aligned crop pairs along a route")
    p.add_argument("--route", required=True, help="route poses in RDDF format")
    p.add_argument("--map", default=".", help="directory with remission and road tiles")
    p.add_argument("--spacing", type=_positive_float, default=5.0)
    p.add_argument("--crop-size", type=_positive_int, default=120)
    p.add_argument("--out", required=True)

    p = sub.add_parser("augment", help="expand every crop pair 168-fold")
    p.add_argument("--in", required=True, metavar="DIR")
    p.add_argument("--map", help="sample from these full-map tiles instead of the stored crops")
    p.add_argument("--rotations", type=_float_list, default=list(ROTATIONS_DEG), metavar="DEG,...")
    p.add_argument("--translations", type=_float_list, default=list(TRANSLATIONS_M), metavar="M,...")
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract-rddf", help="extract a smoothed waypoint crop around a pose")
    p.add_argument("--pose", required=True, type=_floats(3), metavar="X,Y,YAW")
    p.add_argument("--map", default=".", help="directory with road tiles")
    p.add_argument("--out", required=True)

    p = sub.add_parser("infer-map", help="segment a remission map crop by crop and stitch the result")
    p.add_argument("--map", default=".", help="directory with remission tiles")
    p.add_argument("--segmenter", type=_segmenter, default=segment.Oracle(),
                   help="oracle, noisy:P[:SEED] or external:DIR")
    p.add_argument("--gt", help="directory with ground-truth road tiles (default: --map)")
    p.add_argument("--seed", type=int, help="seed of the noisy segmenter (overrides noisy:P:SEED)")
    p.add_argument("--crop-size", type=_positive_int, default=120)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score predicted road crops against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--scope", choices=sorted(_SCOPES), default="all")
    p.add_argument("--report", required=True)
    p.add_argument("--confusion", help="also write the pooled 17x17 confusion matrix here")

    p = sub.add_parser("render", help="draw a map, optionally with an RDDF overlay")
    p.add_argument("--map", default=".")
    p.add_argument("--overlay")
    p.add_argument("--scale", type=_positive_int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="drive the lane follower along a track")
    p.add_argument("--track", required=True,
                   help=f"scene name ({', '.join(scenes.SCENES)}) or annotation file; lane 0 is followed")
    p.add_argument("--segmenter", type=_segmenter, default=segment.Oracle())
    p.add_argument("--seed", type=int,
                   help="seed of the synthetic remission map and the noisy segmenter (default 0)")
    p.add_argument("--start", type=float, help="start arclength along the lane in metres")
    p.add_argument("--offset", type=float, default=0.0, help="lateral start offset in metres (left positive)")
    p.add_argument("--horizon", type=_positive_float, help="seconds to drive")
    p.add_argument("--speed", type=_positive_float, default=CarParams.speed)
    p.add_argument("--lookahead", type=_positive_float, default=CarParams.lookahead)
    p.add_argument("--out", required=True)

    p = sub.add_parser("scene", help="write the annotations of a built-in synthetic scene")
    p.add_argument("name", choices=sorted(scenes.SCENES))
    p.add_argument("--out", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    runner = Runner(args)
    try:
        status = getattr(runner, args.command.replace("-", "_"))()
    except _UsageError as exc:
        parser.error(str(exc))
    except (RoadGridError, OSError, ValueError) as exc:
        print(f"roadgrid {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
