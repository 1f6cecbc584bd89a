from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from ..errors import SchemaError, SpecNotFoundError
from ..rotations import normalize_rotvecs
from .spec import NUM_BETAS, SCHEMA_VERSION

PathLike = Union[str, Path]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class BodyParams:
    """Pose (J axis-angle vectors, radians), shape (10) and translation (meters)."""

    pose: np.ndarray
    shape: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        pose = np.array(self.pose, dtype=np.float64)
        if pose.ndim != 2 or pose.shape[1] != 3 or pose.shape[0] < 1:
            raise SchemaError(f"pose is invalid: expected J x 3, got {pose.shape}.")
        shape = np.array(self.shape, dtype=np.float64).reshape(-1)
        if shape.shape != (NUM_BETAS,):
            raise SchemaError(f"shape is invalid: expected {NUM_BETAS} coefficients, got {shape.size}.")
        translation = np.array(self.translation, dtype=np.float64).reshape(-1)
        if translation.shape != (3,):
            raise SchemaError(f"translation is invalid: expected 3 values, got {translation.size}.")
        object.__setattr__(self, "pose", _frozen(normalize_rotvecs(pose)))
        object.__setattr__(self, "shape", _frozen(shape))
        object.__setattr__(self, "translation", _frozen(translation))

    @classmethod
    def zeros(cls, joint_count: int) -> "BodyParams":
        return cls(np.zeros((joint_count, 3)), np.zeros(NUM_BETAS), np.zeros(3))

    @property
    def joint_count(self) -> int:
        return int(self.pose.shape[0])

    @property
    def root_orientation(self) -> np.ndarray:
        return self.pose[0]

    def replace(self, **changes) -> "BodyParams":
        return dataclasses.replace(self, **changes)

    def as_vector(self) -> np.ndarray:
        """Flat [pose (3J), shape (10), translation (3)] vector used by the optimizer."""
        return np.concatenate([self.pose.reshape(-1), self.shape, self.translation])

    @classmethod
    def from_vector(cls, vector: np.ndarray, joint_count: int) -> "BodyParams":
        vector = np.asarray(vector, dtype=np.float64)
        n_pose = 3 * joint_count
        return cls(
            pose=vector[:n_pose].reshape(joint_count, 3),
            shape=vector[n_pose:n_pose + NUM_BETAS],
            translation=vector[n_pose + NUM_BETAS:n_pose + NUM_BETAS + 3],
        )

    def allclose(self, other: "BodyParams", atol: float = 1e-9) -> bool:
        return (
            self.pose.shape == other.pose.shape
            and np.allclose(self.pose, other.pose, rtol=0.0, atol=atol)
            and np.allclose(self.shape, other.shape, rtol=0.0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0.0, atol=atol)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pose": self.pose.tolist(),
            "shape": self.shape.tolist(),
            "translation": self.translation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Any) -> "BodyParams":
        if not isinstance(data, dict):
            raise SchemaError("params is invalid: expected an object with pose, shape and translation.")
        missing = [key for key in ("pose", "shape", "translation") if key not in data]
        if missing:
            raise SchemaError(f"params is invalid: missing {', '.join(missing)}.")
        try:
            return cls(data["pose"], data["shape"], data["translation"])
        except (TypeError, ValueError) as e:
            if isinstance(e, SchemaError):
                raise
            raise SchemaError(f"params is invalid: {e}.") from e


@dataclass(frozen=True, eq=False)
class Mesh:
    """Posed vertices and joints (meters) sharing the spec's face list."""

    vertices: np.ndarray
    faces: np.ndarray
    joints: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "faces", np.asarray(self.faces, dtype=np.int64).reshape(-1, 3))
        object.__setattr__(self, "joints", np.asarray(self.joints, dtype=np.float64).reshape(-1, 3))

    @property
    def root(self) -> np.ndarray:
        return self.joints[0]

    def translated(self, offset: np.ndarray) -> "Mesh":
        offset = np.asarray(offset, dtype=np.float64).reshape(3)
        return Mesh(self.vertices + offset, self.faces, self.joints + offset)

    def transformed(self, rotation: np.ndarray, offset: np.ndarray = None) -> "Mesh":
        """Apply x -> rotation @ x + offset to vertices and joints."""
        rotation = np.asarray(rotation, dtype=np.float64)
        offset = np.zeros(3) if offset is None else np.asarray(offset, dtype=np.float64).reshape(3)
        return Mesh(self.vertices @ rotation.T + offset, self.faces, self.joints @ rotation.T + offset)


def save_params(path: PathLike, params: Union[BodyParams, Sequence[BodyParams]]) -> Path:
    """Write one BodyParams as an object, or a sequence as a JSON array."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(params, BodyParams):
        payload: Any = {"schema": SCHEMA_VERSION, **params.to_dict()}
    else:
        payload = [item.to_dict() for item in params]
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def _read_json(path: PathLike) -> Any:
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"params file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"params is invalid: {path} is not valid JSON ({e.msg}).") from e


def load_params(path: PathLike) -> BodyParams:
    data = _read_json(path)
    if isinstance(data, dict):
        data = {key: value for key, value in data.items() if key != "schema"}
    return BodyParams.from_dict(data)


def load_params_list(path: PathLike) -> List[BodyParams]:
    """A JSON array of BodyParams objects; a single object is read as a one-element list."""
    data = _read_json(path)
    if isinstance(data, dict):
        return [load_params(path)]
    if not isinstance(data, list) or not data:
        raise SchemaError("params is invalid: expected a non-empty array of params objects.")
    return [BodyParams.from_dict(item) for item in data]


__all__ = ["BodyParams", "Mesh", "save_params", "load_params", "load_params_list"]
