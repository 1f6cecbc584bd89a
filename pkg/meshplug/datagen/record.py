"""
SceneRecord and the JSON-lines manifest.

A dataset directory holds `manifest.jsonl` (one record per line, each
carrying `"schema": 1`) and the PFM depth files the records point at,
relative to the manifest.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from ..body_model import BodyModelSpec, BodyParams, root_pivot
from ..camera import BBoxEncoding, Extrinsics, Intrinsics, bbox_encode, project, yaw_matrix
from ..errors import InvariantViolation, MeshPlugError, RecordError, SchemaError, SpecNotFoundError
from ..rasterizer import DepthMap, read_pfm
from ..setup_logging import get_logger
from ..transform import rotate_params

logger = get_logger("SceneRecord")

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.jsonl"
REPROJECTION_TOL = 1e-6

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class MaskInfo:
    seed: int
    ratio: float
    blocks: Tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"seed": self.seed, "ratio": self.ratio, "blocks": list(self.blocks)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MaskInfo":
        return cls(int(data["seed"]), float(data["ratio"]), tuple(int(b) for b in data["blocks"]))


@dataclass(frozen=True, eq=False)
class SceneRecord:
    """
    One synthetic scene.

    `world_params` is the ground-truth body in the gravity-aligned world
    frame. `camera_params` is the same body as an ideal camera-frame
    backbone would report it (vertices R X_w - t_b). Joints and keypoints
    follow the body model's joint order.
    """

    record_id: str
    spec_ref: str
    world_params: BodyParams
    camera_params: BodyParams
    intrinsics: Intrinsics
    extrinsics: Extrinsics
    t_b: np.ndarray
    joints3d: np.ndarray
    keypoints2d: np.ndarray
    bbox: Tuple[float, float, float]
    bbox_encoding: BBoxEncoding
    depth_file: str
    crop_file: Optional[str] = None
    mask: Optional[MaskInfo] = None
    index: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "t_b", np.asarray(self.t_b, dtype=np.float64).reshape(3))
        object.__setattr__(self, "joints3d", np.asarray(self.joints3d, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "keypoints2d", np.asarray(self.keypoints2d, dtype=np.float64).reshape(-1, 2))
        object.__setattr__(self, "bbox", tuple(float(v) for v in self.bbox))

    @property
    def pitch(self) -> float:
        return self.extrinsics.pitch

    @property
    def heading_rotation(self) -> np.ndarray:
        return yaw_matrix(self.extrinsics.yaw)

    def heading_params(self, spec: BodyModelSpec) -> BodyParams:
        """Ground-truth world body turned by the camera yaw about the vertical axis."""
        return rotate_params(self.world_params, self.heading_rotation, pivot=root_pivot(spec, self.world_params.shape))

    def heading_joints(self) -> np.ndarray:
        return self.joints3d @ self.heading_rotation.T

    def heading_t_b(self) -> np.ndarray:
        """t_b is unchanged by the heading turn: R_pitch R_roll (R_yaw C) = R C."""
        return self.t_b

    def load_depth(self, base_dir: PathLike) -> DepthMap:
        return read_pfm(Path(base_dir) / self.depth_file)

    def load_crop(self, base_dir: PathLike) -> Optional[DepthMap]:
        return None if self.crop_file is None else read_pfm(Path(base_dir) / self.crop_file)

    def validate(self) -> "SceneRecord":
        """
        Re-check reprojection, box containment and the box encoding.

        :raises InvariantViolation: naming the first failing check.
        """
        if self.joints3d.shape[0] != self.keypoints2d.shape[0]:
            raise InvariantViolation("keypoints2d is invalid: count differs from joints3d.")
        if not np.allclose(self.t_b, self.extrinsics.t_b, rtol=0.0, atol=1e-9):
            raise InvariantViolation("t_b is invalid: inconsistent with the camera center.")
        reprojected = project(self.joints3d, self.intrinsics, self.extrinsics, self.t_b)
        error = float(np.max(np.abs(reprojected - self.keypoints2d))) if len(reprojected) else 0.0
        if error > REPROJECTION_TOL:
            raise InvariantViolation(f"keypoints2d is invalid: reprojection error {error:.3g} px.")
        c_x, c_y, side = self.bbox
        cx0, cy0 = self.intrinsics.principal_point
        lo = np.array([cx0 + c_x - side / 2.0, cy0 + c_y - side / 2.0])
        hi = lo + side
        if np.any(self.keypoints2d < lo - REPROJECTION_TOL) or np.any(self.keypoints2d > hi + REPROJECTION_TOL):
            raise InvariantViolation("bbox is invalid: it does not contain every keypoint.")
        expected = bbox_encode(c_x, c_y, side, self.intrinsics.width, self.intrinsics.height)
        if expected.as_tuple() != self.bbox_encoding.as_tuple():
            raise InvariantViolation("bbox_encoding is invalid: inconsistent with bbox.")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "id": self.record_id,
            "index": self.index,
            "spec": self.spec_ref,
            "world_params": self.world_params.to_dict(),
            "camera_params": self.camera_params.to_dict(),
            "intrinsics": self.intrinsics.to_dict(),
            "extrinsics": self.extrinsics.to_dict(),
            "t_b": self.t_b.tolist(),
            "joints3d": self.joints3d.tolist(),
            "keypoints2d": self.keypoints2d.tolist(),
            "bbox": list(self.bbox),
            "bbox_encoding": list(self.bbox_encoding.as_tuple()),
            "depth": self.depth_file,
            "crop": self.crop_file,
            "mask": None if self.mask is None else self.mask.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Any) -> "SceneRecord":
        if not isinstance(data, dict):
            raise SchemaError("record is invalid: expected an object.")
        if data.get("schema") != SCHEMA_VERSION:
            raise SchemaError(f"schema is invalid: expected {SCHEMA_VERSION}, got {data.get('schema')!r}.")
        try:
            return cls(
                record_id=str(data["id"]),
                spec_ref=str(data["spec"]),
                world_params=BodyParams.from_dict(data["world_params"]),
                camera_params=BodyParams.from_dict(data["camera_params"]),
                intrinsics=Intrinsics.from_dict(data["intrinsics"]),
                extrinsics=Extrinsics.from_dict(data["extrinsics"]),
                t_b=data["t_b"],
                joints3d=data["joints3d"],
                keypoints2d=data["keypoints2d"],
                bbox=tuple(data["bbox"]),
                bbox_encoding=BBoxEncoding(*(float(v) for v in data["bbox_encoding"])),
                depth_file=str(data["depth"]),
                crop_file=data.get("crop"),
                mask=None if data.get("mask") is None else MaskInfo.from_dict(data["mask"]),
                index=int(data.get("index", 0)),
            )
        except MeshPlugError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"record is invalid: {type(e).__name__} {e}.") from e


def record_to_line(record: SceneRecord) -> str:
    return json.dumps(record.to_dict(), separators=(",", ":"))


def write_manifest(path: PathLike, records: Iterable[SceneRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record_to_line(record) + "\n")
    return path


def write_record(path: PathLike, record: SceneRecord) -> Path:
    """Append one record to a manifest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        handle.write(record_to_line(record) + "\n")
    return path


def iter_manifest(path: PathLike, validate: bool = True) -> Iterator[Union[SceneRecord, RecordError]]:
    """
    Yield every record of a manifest in file order.

    A line that cannot be parsed or fails validation yields a RecordError
    carrying its 1-based line number instead; reading continues.
    """
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"manifest not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = SceneRecord.from_dict(json.loads(line))
                yield record.validate() if validate else record
            except json.JSONDecodeError as e:
                logger.warning(f"{path}:{line_number}: unreadable record ({e.msg})")
                yield RecordError(f"not valid JSON ({e.msg})", line_number)
            except MeshPlugError as e:
                logger.warning(f"{path}:{line_number}: {e}")
                yield RecordError(str(e), line_number)


def read_manifest(path: PathLike, validate: bool = True) -> Tuple[List[SceneRecord], List[RecordError]]:
    records, errors = [], []
    for item in iter_manifest(path, validate):
        (errors if isinstance(item, RecordError) else records).append(item)
    return records, errors


def read_record(path: PathLike, line_number: int = 1) -> SceneRecord:
    """The record on `line_number` (1-based) of a manifest."""
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"manifest not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        for current, line in enumerate(handle, start=1):
            if current == line_number:
                try:
                    return SceneRecord.from_dict(json.loads(line))
                except json.JSONDecodeError as e:
                    raise RecordError(f"not valid JSON ({e.msg})", line_number) from e
                except MeshPlugError as e:
                    raise RecordError(str(e), line_number) from e
    raise RecordError("no such line", line_number)


__all__ = [
    "SCHEMA_VERSION",
    "MANIFEST_NAME",
    "MaskInfo",
    "SceneRecord",
    "record_to_line",
    "write_manifest",
    "write_record",
    "iter_manifest",
    "read_manifest",
    "read_record",
]
