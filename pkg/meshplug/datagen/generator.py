"""
Synthetic scene generation: sample a body and a camera, render depth,
project keypoints and write the record.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from ..body_model import BodyModelSpec, BodyParams, NUM_BETAS, lbs_forward, root_pivot
from ..camera import Extrinsics, Intrinsics, bbox_encode, bbox_from_projection, project, to_camera
from ..errors import BehindCameraError, DegenerateInputError, InfeasibleError
from ..rasterizer import NEAR_PLANE, crop_resize_depth, render_depth, write_pfm
from ..rasterizer.depth_map import DepthMap
from ..setup_logging import get_logger
from ..transform import rotate_params
from ..types import PoseSource
from .masking import apply_block_mask
from .record import MANIFEST_NAME, MaskInfo, SceneRecord, record_to_line
from .sampler_ranges import SamplerRanges
from .seeding import build_record_id, derive_child_seed

logger = get_logger("DatasetGenerator")

MAX_CAMERA_TRIES = 100
JITTER_SIGMA = 0.2
JITTER_CLAMP = 0.8
DEPTH_DIR = "depth"


def _uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def sample_body(
    rng: np.random.Generator,
    ranges: SamplerRanges,
    spec: BodyModelSpec,
    pose_bank: Optional[Sequence[BodyParams]] = None,
) -> BodyParams:
    """
    Upright world body: root orientation zero, pose from `ranges.pose_source`,
    shape ~ N(0, shape_sigma) and a horizontal offset within +-body_offset_m.
    """
    joints = spec.joint_count
    source = ranges.pose_source
    if source is PoseSource.Zero:
        pose = np.zeros((joints, 3))
    elif source is PoseSource.Jitter:
        pose = np.clip(rng.normal(0.0, JITTER_SIGMA, size=(joints, 3)), -JITTER_CLAMP, JITTER_CLAMP)
        pose[0] = 0.0
    else:
        if not pose_bank:
            raise InfeasibleError("pose_source is 'file' but no poses were loaded.")
        pose = np.array(pose_bank[int(rng.integers(len(pose_bank)))].pose)
        if pose.shape[0] != joints:
            raise InfeasibleError(f"pose file entry has {pose.shape[0]} joints, body model has {joints}.")
    shape = rng.normal(0.0, ranges.shape_sigma, size=NUM_BETAS) if ranges.shape_sigma > 0 else np.zeros(NUM_BETAS)
    offset = ranges.body_offset_m
    translation = np.array([rng.uniform(-offset, offset), 0.0, rng.uniform(-offset, offset)]) if offset > 0 else np.zeros(3)
    return BodyParams(pose, shape, translation)


def sample_camera(
    rng: np.random.Generator,
    ranges: SamplerRanges,
    intr: Intrinsics,
    points: Optional[np.ndarray] = None,
    target: Optional[np.ndarray] = None,
) -> Tuple[Extrinsics, np.ndarray]:
    """
    Camera looking at `target` from a sampled distance and orientation.

    The target lands at d * (ox, oy, 1) in camera coordinates with ox, oy
    uniform in +-offset_fraction. Samples that put any of `points` at or in
    front of the near plane are redrawn.

    :return: (extrinsics, t_b = R C)
    :raises InfeasibleError: after 100 rejected samples.
    """
    target = np.zeros(3) if target is None else np.asarray(target, dtype=np.float64).reshape(3)
    for attempt in range(MAX_CAMERA_TRIES):
        pitch = math.radians(_uniform(rng, ranges.pitch_deg))
        roll = math.radians(_uniform(rng, ranges.roll_deg))
        yaw = math.radians(_uniform(rng, ranges.yaw_deg))
        distance = _uniform(rng, ranges.distance_m)
        ox = _uniform(rng, (-ranges.offset_fraction, ranges.offset_fraction))
        oy = _uniform(rng, (-ranges.offset_fraction, ranges.offset_fraction))

        probe = Extrinsics(pitch, roll, yaw)
        center = target - distance * probe.rotation.T @ np.array([ox, oy, 1.0])
        ext = Extrinsics(pitch, roll, yaw, tuple(center))
        t_b = ext.t_b
        if points is None or np.all(to_camera(points, ext.rotation, t_b)[:, 2] > NEAR_PLANE):
            return ext, t_b
        logger.debug(f"camera sample {attempt} rejected: body crosses the near plane")
    raise InfeasibleError(f"no camera sample kept the body in front of the camera after {MAX_CAMERA_TRIES} tries.")


def camera_frame_params(spec: BodyModelSpec, world_params: BodyParams, ext: Extrinsics, t_b: np.ndarray) -> BodyParams:
    """The world body expressed in camera coordinates: vertices R X_w - t_b."""
    rotated = rotate_params(world_params, ext.rotation, pivot=root_pivot(spec, world_params.shape))
    return rotated.replace(translation=rotated.translation - np.asarray(t_b, dtype=np.float64))


def generate_record(
    spec: BodyModelSpec,
    world_params: BodyParams,
    camera: Tuple[Extrinsics, np.ndarray],
    intr: Intrinsics,
    out_dir,
    record_id: str = "record",
    spec_ref: str = "toy",
    index: int = 0,
    mask_ratio: float = 0.0,
    mask_seed: int = 0,
) -> SceneRecord:
    """
    Render and serialize one scene. Writes `depth/<id>.pfm` (and
    `depth/<id>_crop.pfm` when masking) under `out_dir`.

    :raises BehindCameraError: if a joint projects from behind the camera.
    """
    ext, t_b = camera
    t_b = np.asarray(t_b, dtype=np.float64).reshape(3)
    out_dir = Path(out_dir)
    mesh = lbs_forward(spec, world_params)
    keypoints = project(mesh.joints, intr, ext, t_b)
    bbox = bbox_from_projection(keypoints, intr.width, intr.height)
    encoding = bbox_encode(*bbox, intr.width, intr.height)

    depth = render_depth(mesh, intr, ext, t_b)
    depth_file = f"{DEPTH_DIR}/{record_id}.pfm"
    write_pfm(out_dir / depth_file, depth)

    crop_file, mask = None, None
    if mask_ratio > 0.0:
        crop = crop_resize_depth(depth, bbox)
        masked, blocks = apply_block_mask(crop.depth, mask_ratio, mask_seed)
        crop_file = f"{DEPTH_DIR}/{record_id}_crop.pfm"
        write_pfm(out_dir / crop_file, DepthMap(crop.width, crop.height, masked))
        mask = MaskInfo(int(mask_seed), float(mask_ratio), tuple(int(b) for b in blocks))

    return SceneRecord(
        record_id=record_id,
        spec_ref=spec_ref,
        world_params=world_params,
        camera_params=camera_frame_params(spec, world_params, ext, t_b),
        intrinsics=intr,
        extrinsics=ext,
        t_b=t_b,
        joints3d=mesh.joints,
        keypoints2d=keypoints,
        bbox=bbox,
        bbox_encoding=encoding,
        depth_file=depth_file,
        crop_file=crop_file,
        mask=mask,
        index=index,
    )


class DatasetGenerator:
    """Produces records from a validated GeneratorConfig; built by DatasetBuilder."""

    def __init__(self, config, ranges: SamplerRanges, intr: Intrinsics):
        self._config = config
        self.ranges = ranges
        self.intrinsics = intr

    @property
    def out_dir(self) -> Path:
        return self._config.out_dir

    @property
    def manifest_path(self) -> Path:
        return self._config.out_dir / MANIFEST_NAME

    def record(self, index: int) -> SceneRecord:
        """Record `index`; depends only on (master seed, index)."""
        config = self._config
        child_seed = derive_child_seed(config.seed, index)
        rng = np.random.default_rng(child_seed)
        record_id = build_record_id(config.seed, index)
        for attempt in range(MAX_CAMERA_TRIES):
            body = sample_body(rng, self.ranges, config.spec, config.pose_bank)
            mesh = lbs_forward(config.spec, body)
            try:
                camera = sample_camera(rng, self.ranges, self.intrinsics, mesh.vertices, target=mesh.root)
                record = generate_record(
                    config.spec,
                    body,
                    camera,
                    self.intrinsics,
                    config.out_dir,
                    record_id=record_id,
                    spec_ref=config.spec_ref,
                    index=index,
                    mask_ratio=config.mask_ratio if config.has_mask else 0.0,
                    mask_seed=derive_child_seed(config.seed, index, namespace="mask"),
                )
            except (BehindCameraError, DegenerateInputError, InfeasibleError) as e:
                logger.warning(f"record {record_id}: sample {attempt} rejected ({e})")
                continue
            return record.validate() if config.validate_records else record
        raise InfeasibleError(f"record {record_id}: no valid scene after {MAX_CAMERA_TRIES} samples.")

    def records(self, count: int) -> Iterator[SceneRecord]:
        for index in range(count):
            yield self.record(index)

    def generate(self, count: int) -> Path:
        """Write `count` records and their depth files; returns the manifest path."""
        path = self.manifest_path
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for record in self.records(count):
                handle.write(record_to_line(record) + "\n")
        logger.info(f"{count} record(s) written to {path}")
        return path


__all__ = [
    "sample_body",
    "sample_camera",
    "camera_frame_params",
    "generate_record",
    "DatasetGenerator",
]
