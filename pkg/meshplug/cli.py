"""
Command-line entry point: `meshplug <subcommand> ...`.

Every subcommand prints one JSON object on stdout (`"schema": 1`); logs go
to stderr. Angles are degrees on the command line and radians inside.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .body_model import (
    BodyModelSpec,
    BodyParams,
    lbs_forward,
    load_body_spec,
    load_params,
    root_pivot,
    save_params,
    toy_body_spec,
    write_obj,
)
from .camera import DEFAULT_FOV_DIAG, Extrinsics, intrinsics_from_fov
from .datagen import DatasetBuilder, SamplerRanges, SceneRecord, derive_child_seed, iter_manifest
from .datagen.record import SCHEMA_VERSION
from .errors import MeshPlugError, RecordError, SchemaError, SpecNotFoundError
from .fitting import FitConfig, adjust_mesh, estimate_pitch, estimate_pitch_depth, estimate_pitch_roll, perturb_init, world_init
from .losses import loss_cam
from .metrics import pa_mpjpe, w_mpjpe, wpve
from .rasterizer import render_depth, write_pfm
from .setup_logging import configure_stderr_logging, get_logger
from .transform import camera_to_world, world_to_camera
from .types import PoseSource

logger = get_logger("CLI")

TOY_SPEC = "toy"


def _emit(payload: Dict[str, Any]) -> None:
    sys.stdout.write(json.dumps({"schema": SCHEMA_VERSION, **payload}) + "\n")


@lru_cache(maxsize=8)
def _spec(ref: str) -> BodyModelSpec:
    return toy_body_spec() if ref == TOY_SPEC else load_body_spec(ref)


def _fit_config(args) -> FitConfig:
    cfg = FitConfig.load(args.config) if args.config else FitConfig()
    cfg = cfg.replace(weights=cfg.weights.replace(lroot=args.lroot), seed=args.seed)
    if getattr(args, "max_iters", None) is not None:
        cfg = cfg.replace(max_iters=args.max_iters)
    return cfg


def _manifest_dir(path: str) -> Path:
    return Path(path).resolve().parent


def _record_error(item: RecordError) -> Dict[str, Any]:
    return {"line": item.line_number, "error": str(item)}


def _heading_truth(spec: BodyModelSpec, record: SceneRecord):
    params = record.heading_params(spec)
    return params, lbs_forward(spec, params)


def cmd_gen_dataset(args) -> int:
    ranges = SamplerRanges.from_dict(json.loads(Path(args.ranges).read_text(encoding="utf-8"))) if args.ranges else SamplerRanges()
    changes: Dict[str, Any] = {}
    for name, value in (
        ("pitch_deg", args.pitch_range),
        ("roll_deg", args.roll_range),
        ("yaw_deg", args.yaw_range),
        ("distance_m", args.distance_range),
    ):
        if value is not None:
            changes[name] = tuple(value)
    if args.pose_source is not None:
        changes["pose_source"] = args.pose_source
        changes["pose_file"] = args.pose_file
    ranges = ranges.replace(**changes)

    generator = (
        DatasetBuilder(_spec(args.spec), args.out, spec_ref=args.spec)
        .ranges(ranges)
        .image_size(args.width, args.height)
        .fov(args.fov_deg)
        .mask_ratio(args.mask_ratio)
        .seed(args.seed)
        .build()
    )
    if args.n < 0:
        raise SchemaError(f"n is invalid: must be >= 0, got {args.n}.")
    manifest = generator.generate(args.n)
    _emit({"manifest": str(manifest), "n_records": args.n, "seed": args.seed, "ranges": ranges.to_dict()})
    return 0


def _noisy_keypoints(record: SceneRecord, seed: int, sigma: float) -> np.ndarray:
    if sigma <= 0.0:
        return record.keypoints2d
    rng = np.random.default_rng(derive_child_seed(seed, record.index, namespace="keypoint-noise"))
    return record.keypoints2d + rng.normal(0.0, sigma, size=record.keypoints2d.shape)


def _estimate_one(record: SceneRecord, args, cfg: FitConfig, base_dir: Path) -> Dict[str, Any]:
    result: Dict[str, Any] = {"id": record.record_id, "index": record.index, "gt_pitch_deg": math.degrees(record.pitch)}
    if args.method == "depth":
        spec = _spec(record.spec_ref)
        _, truth = _heading_truth(spec, record)
        observed = record.load_depth(base_dir)
        camera_root = record.extrinsics.rotation @ record.joints3d[0] - record.t_b
        hypothesis = truth.translated(camera_root - truth.root)
        pitch, report = estimate_pitch_depth(observed, hypothesis, record.intrinsics, cfg)
    elif args.pitch_only:
        keypoints = _noisy_keypoints(record, args.seed, args.noise_px)
        pitch, _, report = estimate_pitch(record.heading_joints(), keypoints, record.intrinsics, cfg)
    else:
        keypoints = _noisy_keypoints(record, args.seed, args.noise_px)
        pitch, roll, _, report = estimate_pitch_roll(record.heading_joints(), keypoints, record.intrinsics, cfg)
        result["roll_deg"] = math.degrees(roll)
        result["gt_roll_deg"] = math.degrees(record.extrinsics.roll)
        result["cam_loss"] = loss_cam((pitch, roll), (record.pitch, record.extrinsics.roll), cfg.weights)
    result["pitch_deg"] = math.degrees(pitch)
    result["error_deg"] = abs(math.degrees(pitch - record.pitch))
    result["loss"] = report.final_loss
    return result


def cmd_estimate_pitch(args) -> int:
    cfg = _fit_config(args)
    base_dir = _manifest_dir(args.manifest)
    results: List[Dict[str, Any]] = []
    for item in iter_manifest(args.manifest):
        if isinstance(item, RecordError):
            results.append(_record_error(item))
            continue
        try:
            results.append(_estimate_one(item, args, cfg, base_dir))
        except MeshPlugError as e:
            logger.warning(f"record {item.record_id}: {e}")
            results.append({"id": item.record_id, "index": item.index, "error": str(e)})
    errors = [r["error_deg"] for r in results if "error_deg" in r]
    _emit(
        {
            "method": args.method,
            "n_records": len(results),
            "mean_abs_error_deg": _mean(errors),
            "median_abs_error_deg": float(np.median(errors)) if errors else None,
            "results": results,
        }
    )
    return 0


def cmd_transform(args) -> int:
    params = load_params(args.params)
    pitch = math.radians(args.pitch_deg)
    pivot = None
    if args.pivot:
        pivot = root_pivot(_spec(args.spec), params.shape)
    transformed = world_to_camera(params, pitch, pivot) if args.inverse else camera_to_world(params, pitch, pivot)
    if args.out:
        save_params(args.out, transformed)
        _emit({"out": str(args.out), "pitch_deg": args.pitch_deg, "inverse": args.inverse})
    else:
        _emit({"pitch_deg": args.pitch_deg, "inverse": args.inverse, "params": transformed.to_dict()})
    return 0


def _fit_one(record: SceneRecord, args, cfg: FitConfig) -> Dict[str, Any]:
    spec = _spec(record.spec_ref)
    truth_params, truth_mesh = _heading_truth(spec, record)
    init = record.camera_params
    if args.init == "perturbed":
        init = perturb_init(init, np.random.default_rng(derive_child_seed(args.seed, record.index, namespace="init")))
    if args.pitch_source == "estimate":
        pitch, _, _ = estimate_pitch(record.heading_joints(), record.keypoints2d, record.intrinsics, cfg)
    else:
        pitch = record.pitch

    fit_cfg = cfg
    gt3d = gt_verts = gt_pose = None
    if args.supervision == "full":
        gt3d, gt_verts, gt_pose = truth_mesh.joints, truth_mesh.vertices, truth_params.pose
    else:
        fit_cfg = cfg.replace(weights=cfg.weights.replace(l3d=0.0, lv=0.0, lmix=0.0))
    params, report = adjust_mesh(
        init, pitch, record.keypoints2d, spec, record.intrinsics, fit_cfg,
        gt3d=gt3d, gt_verts=gt_verts, gt_pose=gt_pose, t_b=record.t_b,
    )
    fitted = lbs_forward(spec, params)
    return {
        "id": record.record_id,
        "index": record.index,
        "pitch": pitch,
        "params": params.to_dict(),
        "report": report.to_dict(),
        "w_mpjpe_mm": w_mpjpe(fitted.joints, truth_mesh.joints),
    }


def cmd_fit(args) -> int:
    cfg = _fit_config(args)
    rows: List[Dict[str, Any]] = []
    summary: List[Dict[str, Any]] = []
    for item in iter_manifest(args.manifest):
        if isinstance(item, RecordError):
            summary.append(_record_error(item))
            continue
        try:
            row = _fit_one(item, args, cfg)
        except MeshPlugError as e:
            logger.warning(f"record {item.record_id}: {e}")
            summary.append({"id": item.record_id, "index": item.index, "error": str(e)})
            continue
        rows.append(row)
        summary.append(
            {
                "id": row["id"],
                "index": row["index"],
                "status": row["report"]["status"],
                "iterations": row["report"]["iterations"],
                "final_loss": row["report"]["final_loss"],
                "w_mpjpe_mm": row["w_mpjpe_mm"],
            }
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps({"schema": SCHEMA_VERSION, **row}, separators=(",", ":")) + "\n")
    _emit(
        {
            "out": str(out),
            "n_records": len(summary),
            "n_fitted": len(rows),
            "n_converged": sum(1 for row in rows if row["report"]["converged"]),
            "results": summary,
        }
    )
    return 0


def _read_predictions(path: str) -> List[BodyParams]:
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"predictions not found: {path}")
    predictions = []
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                predictions.append(BodyParams.from_dict(json.loads(line)["params"]))
            except (json.JSONDecodeError, KeyError, TypeError, MeshPlugError) as e:
                raise RecordError(f"prediction is invalid: {e}", line_number) from e
    return predictions


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def _metric_row(name: str, pairs) -> Dict[str, Any]:
    wm, pa, wv = [], [], []
    for pred, truth in pairs:
        wm.append(w_mpjpe(pred.joints, truth.joints))
        pa.append(pa_mpjpe(pred.joints, truth.joints))
        wv.append(wpve(pred.vertices, truth.vertices, pred.root, truth.root))
    return {"name": name, "wmpjpe_mm": _mean(wm), "pampjpe_mm": _mean(pa), "wpve_mm": _mean(wv), "n_records": len(wm)}


def cmd_metrics(args) -> int:
    records, errors = [], []
    for item in iter_manifest(args.gt):
        (errors if isinstance(item, RecordError) else records).append(item)
    if errors:
        raise errors[0]
    truths = [_heading_truth(_spec(r.spec_ref), r)[1] for r in records]

    rows = []
    if args.pred:
        predictions = _read_predictions(args.pred)
        if len(predictions) != len(records):
            raise SchemaError(f"predictions is invalid: {len(predictions)} predictions for {len(records)} records.")
        meshes = [lbs_forward(_spec(r.spec_ref), p) for r, p in zip(records, predictions)]
        rows.append(_metric_row("prediction", zip(meshes, truths)))
    if args.baselines:
        naive = [lbs_forward(_spec(r.spec_ref), r.camera_params) for r in records]
        geometric = [
            lbs_forward(_spec(r.spec_ref), world_init(_spec(r.spec_ref), r.camera_params, r.pitch, r.t_b))
            for r in records
        ]
        rows.append(_metric_row("naive", zip(naive, truths)))
        rows.append(_metric_row("geometric", zip(geometric, truths)))
    if not rows:
        raise SchemaError("metrics needs --pred, --baselines or both.")
    head = rows[0]
    _emit(
        {
            "wmpjpe_mm": head["wmpjpe_mm"],
            "pampjpe_mm": head["pampjpe_mm"],
            "wpve_mm": head["wpve_mm"],
            "n_records": len(records),
            "rows": rows,
        }
    )
    return 0


def cmd_render(args) -> int:
    params = load_params(args.params)
    spec = _spec(args.spec)
    mesh = lbs_forward(spec, params)
    out = Path(args.out)
    if out.suffix.lower() == ".obj":
        write_obj(mesh, out)
        _emit({"out": str(out), "vertices": int(mesh.vertices.shape[0]), "faces": int(mesh.faces.shape[0])})
        return 0
    if out.suffix.lower() != ".pfm":
        raise SchemaError(f"out is invalid: expected a .pfm or .obj path, got {out.name}.")
    intr = intrinsics_from_fov(args.width, args.height, math.radians(args.fov_deg))
    ext = Extrinsics(
        math.radians(args.pitch_deg), math.radians(args.roll_deg), math.radians(args.yaw_deg), tuple(args.camera_center)
    )
    depth = render_depth(mesh, intr, ext, ext.t_b)
    write_pfm(out, depth)
    near, far = depth.depth_range()
    _emit(
        {
            "out": str(out),
            "width": depth.width,
            "height": depth.height,
            "coverage": depth.coverage,
            "depth_min": near if depth.coverage else None,
            "depth_max": far if depth.coverage else None,
        }
    )
    return 0


def _parent(*adders) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    for add in adders:
        add(parent)
    return parent


def _common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed for every random stage")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _spec_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", default=TOY_SPEC, help=f"body spec JSON path, or '{TOY_SPEC}'")


def _camera_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fov-deg", type=float, default=math.degrees(DEFAULT_FOV_DIAG), help="diagonal field of view")


def _fit_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="FitConfig JSON file")
    parser.add_argument("--lroot", type=float, default=2.0, help="root-orientation weight of the pose term")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meshplug", description="Camera-to-world transforms for parametric body meshes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-dataset", parents=[_parent(_common_args, _spec_args, _camera_args)],
                         help="generate synthetic scene records")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--ranges", help="SamplerRanges JSON file")
    gen.add_argument("--pitch-range", type=float, nargs=2, metavar=("LO", "HI"))
    gen.add_argument("--roll-range", type=float, nargs=2, metavar=("LO", "HI"))
    gen.add_argument("--yaw-range", type=float, nargs=2, metavar=("LO", "HI"))
    gen.add_argument("--distance-range", type=float, nargs=2, metavar=("LO", "HI"))
    gen.add_argument("--pose-source", choices=[s.value for s in PoseSource])
    gen.add_argument("--pose-file")
    gen.add_argument("--width", type=int, default=320)
    gen.add_argument("--height", type=int, default=240)
    gen.add_argument("--mask-ratio", type=float, default=0.0, help="fraction of masked 16x16 depth blocks")
    gen.set_defaults(handler=cmd_gen_dataset)

    est = sub.add_parser("estimate-pitch", parents=[_parent(_common_args, _fit_args)],
                         help="estimate camera pitch per record")
    est.add_argument("--manifest", required=True)
    est.add_argument("--method", choices=["keypoints", "depth"], default="keypoints")
    est.add_argument("--pitch-only", action="store_true", help="keypoint search over pitch alone, roll held at 0")
    est.add_argument("--noise-px", type=float, default=0.0, help="Gaussian keypoint noise (pixels)")
    est.set_defaults(handler=cmd_estimate_pitch)

    tr = sub.add_parser("transform", parents=[_parent(_common_args, _spec_args)],
                        help="camera-to-world transform of a params file")
    tr.add_argument("--params", required=True)
    tr.add_argument("--pitch-deg", type=float, required=True)
    tr.add_argument("--inverse", action="store_true", help="world-to-camera instead")
    tr.add_argument("--pivot", action="store_true", help="rotate about the shaped rest root of --spec")
    tr.add_argument("--out")
    tr.set_defaults(handler=cmd_transform)

    fit = sub.add_parser("fit", parents=[_parent(_common_args, _fit_args)], help="fit world-frame bodies to records")
    fit.add_argument("--manifest", required=True)
    fit.add_argument("--out", required=True, help="JSON-lines predictions file")
    fit.add_argument("--init", choices=["camera", "perturbed"], default="camera")
    fit.add_argument("--pitch-source", choices=["gt", "estimate"], default="gt")
    fit.add_argument("--supervision", choices=["full", "2d"], default="full")
    fit.add_argument("--max-iters", type=int)
    fit.set_defaults(handler=cmd_fit)

    met = sub.add_parser("metrics", parents=[_parent(_common_args)], help="world-frame metrics of predictions")
    met.add_argument("--gt", required=True, help="ground-truth manifest")
    met.add_argument("--pred", help="predictions written by `fit`")
    met.add_argument("--baselines", action="store_true", help="add naive and geometric rows")
    met.set_defaults(handler=cmd_metrics)

    ren = sub.add_parser("render", parents=[_parent(_common_args, _spec_args, _camera_args)],
                         help="render a params file to .pfm depth or .obj mesh")
    ren.add_argument("--params", required=True)
    ren.add_argument("--out", required=True)
    ren.add_argument("--width", type=int, default=320)
    ren.add_argument("--height", type=int, default=240)
    ren.add_argument("--pitch-deg", type=float, default=0.0)
    ren.add_argument("--roll-deg", type=float, default=0.0)
    ren.add_argument("--yaw-deg", type=float, default=0.0)
    ren.add_argument("--camera-center", type=float, nargs=3, default=(0.0, 0.0, -3.0), metavar=("X", "Y", "Z"))
    ren.set_defaults(handler=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_stderr_logging(args.log_level)
    try:
        return args.handler(args)
    except (MeshPlugError, OSError, json.JSONDecodeError) as e:
        logger.error(str(e))
        _emit({"error": str(e), "type": type(e).__name__})
        return 1


if __name__ == "__main__":
    sys.exit(main())
