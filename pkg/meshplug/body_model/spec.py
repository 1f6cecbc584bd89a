from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import InvariantViolation, SchemaError, SpecNotFoundError
from ..setup_logging import get_logger

logger = get_logger("BodySpec")

NUM_BETAS = 10
SCHEMA_VERSION = 1
ROW_SUM_TOL = 1e-6

PathLike = Union[str, Path]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class BodyModelSpec:
    """
    The M(theta, beta) machinery: template, kinematic tree, skinning and blend shapes.

    Arrays are read-only after construction so one spec can be shared
    between threads. `pose_blendshapes` is reserved for real SMPL exports
    and is carried through load/save untouched; the forward pass ignores it.
    """

    template_vertices: np.ndarray  # N x 3, meters
    faces: np.ndarray  # F x 3, vertex indices
    joint_regressor: np.ndarray  # J x N
    parents: np.ndarray  # J, root is -1
    skinning_weights: np.ndarray  # N x J
    shape_blendshapes: np.ndarray  # 10 x N x 3
    pose_blendshapes: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "template_vertices", _frozen(np.array(self.template_vertices, dtype=np.float64)))
        object.__setattr__(self, "faces", _frozen(np.array(self.faces, dtype=np.int64).reshape(-1, 3)))
        object.__setattr__(self, "joint_regressor", _frozen(np.array(self.joint_regressor, dtype=np.float64)))
        object.__setattr__(self, "parents", _frozen(np.array(self.parents, dtype=np.int64)))
        object.__setattr__(self, "skinning_weights", _frozen(np.array(self.skinning_weights, dtype=np.float64)))
        object.__setattr__(self, "shape_blendshapes", _frozen(np.array(self.shape_blendshapes, dtype=np.float64)))
        if self.pose_blendshapes is not None:
            object.__setattr__(self, "pose_blendshapes", _frozen(np.array(self.pose_blendshapes, dtype=np.float64)))

    @property
    def joint_count(self) -> int:
        return int(self.parents.shape[0])

    @property
    def vertex_count(self) -> int:
        return int(self.template_vertices.shape[0])

    @property
    def rest_joints(self) -> np.ndarray:
        """Joints regressed from the unshaped template."""
        return self.joint_regressor @ self.template_vertices

    def equals(self, other: "BodyModelSpec") -> bool:
        """Bitwise equality of the numeric payload."""
        if not isinstance(other, BodyModelSpec):
            return False
        names = ("template_vertices", "faces", "joint_regressor", "parents", "skinning_weights", "shape_blendshapes")
        for name in names:
            a, b = getattr(self, name), getattr(other, name)
            if a.shape != b.shape or a.dtype != b.dtype or a.tobytes() != b.tobytes():
                return False
        if (self.pose_blendshapes is None) != (other.pose_blendshapes is None):
            return False
        if self.pose_blendshapes is not None:
            return self.pose_blendshapes.tobytes() == other.pose_blendshapes.tobytes()
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "template_vertices": self.template_vertices.tolist(),
            "faces": self.faces.tolist(),
            "joint_regressor": self.joint_regressor.tolist(),
            "parents": self.parents.tolist(),
            "skinning_weights": self.skinning_weights.tolist(),
            "shape_blendshapes": self.shape_blendshapes.tolist(),
            "pose_blendshapes": None if self.pose_blendshapes is None else self.pose_blendshapes.tolist(),
        }


def _array(data: Dict[str, Any], key: str, dtype, ndim: int) -> np.ndarray:
    if key not in data:
        raise SchemaError(f"{key} is invalid: field is missing.")
    try:
        value = np.array(data[key], dtype=dtype)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{key} is invalid: {e}.") from e
    if value.ndim != ndim:
        raise SchemaError(f"{key} is invalid: expected {ndim} dimensions, got {value.ndim}.")
    return value


def body_spec_from_dict(data: Any) -> BodyModelSpec:
    """Parse and validate a body spec JSON object."""
    if not isinstance(data, dict):
        raise SchemaError("body spec is invalid: top level must be an object.")

    template = _array(data, "template_vertices", np.float64, 2)
    faces = np.array(data.get("faces", []), dtype=np.int64)
    if faces.size == 0:
        faces = faces.reshape(0, 3)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise SchemaError("faces is invalid: expected an F x 3 index list.")

    pose_blendshapes = data.get("pose_blendshapes")
    spec = BodyModelSpec(
        template_vertices=template,
        faces=faces,
        joint_regressor=_array(data, "joint_regressor", np.float64, 2),
        parents=_array(data, "parents", np.int64, 1),
        skinning_weights=_array(data, "skinning_weights", np.float64, 2),
        shape_blendshapes=_array(data, "shape_blendshapes", np.float64, 3),
        pose_blendshapes=None if pose_blendshapes is None else np.array(pose_blendshapes, dtype=np.float64),
    )
    _check_shapes(spec)
    validate_body_spec(spec)
    return spec


def _check_shapes(spec: BodyModelSpec) -> None:
    n, j = spec.vertex_count, spec.joint_count
    if spec.template_vertices.shape[1] != 3:
        raise SchemaError("template_vertices is invalid: expected N x 3.")
    if spec.joint_regressor.shape != (j, n):
        raise SchemaError(f"joint_regressor is invalid: expected {j} x {n}, got {spec.joint_regressor.shape}.")
    if spec.skinning_weights.shape != (n, j):
        raise SchemaError(f"skinning_weights is invalid: expected {n} x {j}, got {spec.skinning_weights.shape}.")
    if spec.shape_blendshapes.shape != (NUM_BETAS, n, 3):
        raise SchemaError(
            f"shape_blendshapes is invalid: expected {NUM_BETAS} x {n} x 3, got {spec.shape_blendshapes.shape}."
        )


def validate_body_spec(spec: BodyModelSpec) -> BodyModelSpec:
    """
    Check every BodyModelSpec invariant.

    Raises InvariantViolation naming the first offending field and row.
    """
    _check_shapes(spec)
    n = spec.vertex_count

    weights = spec.skinning_weights
    negative = np.argwhere(weights < 0.0)
    if negative.size:
        row = int(negative[0, 0])
        raise InvariantViolation(f"skinning_weights is invalid: row {row} has a negative weight.")
    row_sums = weights.sum(axis=1)
    bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        row = int(bad[0])
        raise InvariantViolation(f"skinning_weights is invalid: row {row} sums to {row_sums[row]!r}, expected 1.")

    reg_sums = spec.joint_regressor.sum(axis=1)
    bad = np.flatnonzero(np.abs(reg_sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        row = int(bad[0])
        raise InvariantViolation(f"joint_regressor is invalid: row {row} sums to {reg_sums[row]!r}, expected 1.")

    parents = spec.parents
    if parents.size == 0 or parents[0] != -1:
        raise InvariantViolation("parents is invalid: joint 0 must be the root (-1).")
    for k in range(1, parents.size):
        if not 0 <= parents[k] < k:
            raise InvariantViolation(f"parents is invalid: row {k} has parent {int(parents[k])}, expected 0 <= parent < {k}.")

    if spec.faces.size and (spec.faces.min() < 0 or spec.faces.max() >= n):
        raise InvariantViolation(f"faces is invalid: indices must lie in [0, {n}).")

    if not np.all(np.isfinite(spec.template_vertices)):
        raise InvariantViolation("template_vertices is invalid: non-finite coordinates.")
    return spec


def save_body_spec(spec: BodyModelSpec, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
    logger.debug(f"body spec written to {path}")
    return path


def load_body_spec(path: PathLike) -> BodyModelSpec:
    """
    Load a JSON body spec.

    Missing files, malformed JSON/fields and invariant violations raise
    SpecNotFoundError, SchemaError and InvariantViolation respectively.
    """
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"body spec not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"body spec is invalid: {path} is not valid JSON ({e.msg} at line {e.lineno}).") from e
    return body_spec_from_dict(data)


__all__ = [
    "NUM_BETAS",
    "BodyModelSpec",
    "body_spec_from_dict",
    "validate_body_spec",
    "save_body_spec",
    "load_body_spec",
]
