"""
Training objectives as scalar functions plus their analytic gradient.

Every point-wise L2 term uses a mean over points; the pose term uses plain
sums with the root counted twice (once weighted by `lroot`, once inside
the full pose difference). Internally each term is a residual block r with
term = ||r||^2, so the total is sum(w * ||r||^2) and its gradient is
2 * sum(w * J^T r). The fitting module reuses the blocks for Gauss-Newton.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .body_model import BodyModelSpec, BodyParams, lbs_forward, lbs_jacobian, parameter_count
from .camera import Intrinsics, pitch_matrix, project_camera_points, to_camera
from .errors import DegenerateInputError, DimensionMismatchError, FitError, InvariantViolation, SchemaError

TERM_NAMES = ("l2d", "l3d", "lv", "lmix")


@dataclass(frozen=True)
class LossWeights:
    """Term weights; JSON keys are the attribute names."""

    l2d: float = 1.0
    l3d: float = 1.0
    lv: float = 1.0
    lmix: float = 1.0
    lroot: float = 2.0
    lalpha: float = 1.0
    lgamma: float = 1.0

    def __post_init__(self):
        for item in dataclasses.fields(self):
            value = float(getattr(self, item.name))
            if not (math.isfinite(value) and value >= 0.0):
                raise InvariantViolation(f"{item.name} is invalid: weights must be finite and >= 0, got {value!r}.")
            object.__setattr__(self, item.name, value)

    def term_weight(self, name: str) -> float:
        return getattr(self, name)

    def replace(self, **changes) -> "LossWeights":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Any) -> "LossWeights":
        if not isinstance(data, dict):
            raise SchemaError("weights is invalid: expected an object.")
        known = {item.name for item in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SchemaError(f"weights is invalid: unknown key(s) {', '.join(unknown)}.")
        try:
            return cls(**{key: float(value) for key, value in data.items()})
        except (TypeError, ValueError) as e:
            if isinstance(e, InvariantViolation):
                raise
            raise SchemaError(f"weights is invalid: {e}.") from e


def _paired(pred: np.ndarray, gt: np.ndarray, width: int, what: str) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, width)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, width)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"{what} is invalid: {pred.shape[0]} predicted vs {gt.shape[0]} target points.")
    if pred.shape[0] == 0:
        raise DegenerateInputError(f"{what} is invalid: no points.")
    return pred, gt


def _mean_squared(pred: np.ndarray, gt: np.ndarray) -> float:
    diff = pred - gt
    return float(np.sum(diff * diff) / pred.shape[0])


def loss_cam(pred: Tuple[float, float], gt: Tuple[float, float], weights: LossWeights) -> float:
    """lalpha * (pitch error)^2 + lgamma * (roll error)^2."""
    d_pitch = float(pred[0]) - float(gt[0])
    d_roll = float(pred[1]) - float(gt[1])
    return weights.lalpha * d_pitch * d_pitch + weights.lgamma * d_roll * d_roll


def loss_3d(pred_joints: np.ndarray, gt_joints: np.ndarray) -> float:
    return _mean_squared(*_paired(pred_joints, gt_joints, 3, "joints"))


def loss_vertex(pred_verts: np.ndarray, gt_verts: np.ndarray) -> float:
    return _mean_squared(*_paired(pred_verts, gt_verts, 3, "vertices"))


def loss_2d(
    pred_joints3d_world: np.ndarray,
    gt_keypoints2d: np.ndarray,
    intr: Intrinsics,
    pitch: float,
    t_b: np.ndarray,
) -> float:
    """
    Mean squared pixel error of the pitch-only projection.

    Raises BehindCameraError when a joint projects from z <= 1e-6.
    """
    cam = to_camera(pred_joints3d_world, pitch_matrix(pitch), t_b)
    pred, gt = _paired(project_camera_points(cam, intr), gt_keypoints2d, 2, "keypoints")
    return _mean_squared(pred, gt)


def loss_mix(pred_pose: np.ndarray, gt_pose: np.ndarray, lroot: float) -> float:
    pred, gt = _paired(pred_pose, gt_pose, 3, "pose")
    diff = pred - gt
    return float(lroot * np.dot(diff[0], diff[0]) + np.sum(diff * diff))


@dataclass(frozen=True, eq=False)
class Supervision:
    """
    Fixed data a body is fitted against.

    `keypoints2d` are ordered like the model joints. Any of the 3D targets
    may be None, in which case its term is absent (and contributes 0).
    """

    intr: Intrinsics
    pitch: float
    keypoints2d: Optional[np.ndarray] = None
    joints3d: Optional[np.ndarray] = None
    vertices: Optional[np.ndarray] = None
    pose: Optional[np.ndarray] = None

    def __post_init__(self):
        for name, width in (("keypoints2d", 2), ("joints3d", 3), ("vertices", 3), ("pose", 3)):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.asarray(value, dtype=np.float64).reshape(-1, width))
        object.__setattr__(self, "pitch", float(self.pitch))

    def available_terms(self) -> Tuple[str, ...]:
        present = {
            "l2d": self.keypoints2d is not None,
            "l3d": self.joints3d is not None,
            "lv": self.vertices is not None,
            "lmix": self.pose is not None,
        }
        return tuple(name for name in TERM_NAMES if present[name])


class ResidualBlock(NamedTuple):
    name: str
    weight: float
    residual: np.ndarray
    # d(residual)/d[params vector, t_b]; None when not requested
    jacobian: Optional[np.ndarray]

    @property
    def value(self) -> float:
        return float(self.residual @ self.residual)


def _pad_t_b(jac: np.ndarray) -> np.ndarray:
    rows = jac.shape[0]
    return np.concatenate([jac, np.zeros((rows, 3))], axis=1)


def residual_blocks(
    spec: BodyModelSpec,
    params: BodyParams,
    t_b: np.ndarray,
    supervision: Supervision,
    weights: LossWeights,
    with_jacobian: bool = False,
) -> List[ResidualBlock]:
    """
    One block per available term.

    Jacobian columns follow `BodyParams.as_vector()` followed by the three
    components of t_b.
    """
    t_b = np.asarray(t_b, dtype=np.float64).reshape(3)
    need_verts = supervision.vertices is not None and weights.lv > 0.0
    if with_jacobian:
        mesh, d_joints, d_verts = lbs_jacobian(spec, params, with_vertices=need_verts)
    else:
        mesh, d_joints, d_verts = lbs_forward(spec, params), None, None
    n_params = parameter_count(spec)
    n_joints = spec.joint_count
    blocks: List[ResidualBlock] = []

    if supervision.keypoints2d is not None:
        rotation = pitch_matrix(supervision.pitch)
        cam = to_camera(mesh.joints, rotation, t_b)
        uv, target = _paired(project_camera_points(cam, supervision.intr), supervision.keypoints2d, 2, "keypoints")
        scale = 1.0 / math.sqrt(uv.shape[0])
        jac = None
        if with_jacobian and weights.l2d > 0.0:
            d_cam = np.zeros((n_joints, 3, n_params + 3))
            d_cam[:, :, :n_params] = np.einsum("ab,kbp->kap", rotation, d_joints)
            d_cam[:, :, n_params:] = -np.eye(3)
            f = supervision.intr.focal
            x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]
            d_proj = np.zeros((n_joints, 2, 3))
            d_proj[:, 0, 0] = f / z
            d_proj[:, 0, 2] = -f * x / (z * z)
            d_proj[:, 1, 1] = f / z
            d_proj[:, 1, 2] = -f * y / (z * z)
            jac = scale * np.einsum("kac,kcp->kap", d_proj, d_cam).reshape(2 * n_joints, n_params + 3)
        blocks.append(ResidualBlock("l2d", weights.l2d, scale * (uv - target).ravel(), jac))

    if supervision.joints3d is not None:
        pred, target = _paired(mesh.joints, supervision.joints3d, 3, "joints")
        scale = 1.0 / math.sqrt(pred.shape[0])
        jac = None
        if with_jacobian and weights.l3d > 0.0:
            jac = scale * _pad_t_b(d_joints.reshape(3 * n_joints, n_params))
        blocks.append(ResidualBlock("l3d", weights.l3d, scale * (pred - target).ravel(), jac))

    if supervision.vertices is not None:
        pred, target = _paired(mesh.vertices, supervision.vertices, 3, "vertices")
        scale = 1.0 / math.sqrt(pred.shape[0])
        jac = None
        if with_jacobian and need_verts:
            jac = scale * _pad_t_b(d_verts.reshape(3 * pred.shape[0], n_params))
        blocks.append(ResidualBlock("lv", weights.lv, scale * (pred - target).ravel(), jac))

    if supervision.pose is not None:
        pred, target = _paired(params.pose, supervision.pose, 3, "pose")
        diff = pred - target
        root_scale = math.sqrt(weights.lroot)
        residual = np.concatenate([root_scale * diff[0], diff.ravel()])
        jac = None
        if with_jacobian and weights.lmix > 0.0:
            jac = np.zeros((3 + 3 * n_joints, n_params + 3))
            jac[:3, :3] = root_scale * np.eye(3)
            jac[3:, :3 * n_joints] = np.eye(3 * n_joints)
        blocks.append(ResidualBlock("lmix", weights.lmix, residual, jac))

    return blocks


def loss_terms(
    spec: BodyModelSpec, params: BodyParams, t_b: np.ndarray, supervision: Supervision, weights: LossWeights
) -> Dict[str, float]:
    """Unweighted value of every term; absent terms are 0."""
    terms = {name: 0.0 for name in TERM_NAMES}
    for block in residual_blocks(spec, params, t_b, supervision, weights):
        terms[block.name] = block.value
    return terms


def weighted_total(terms: Dict[str, float], weights: LossWeights) -> float:
    return float(sum(weights.term_weight(name) * terms.get(name, 0.0) for name in TERM_NAMES))


def loss_total(
    spec: BodyModelSpec, params: BodyParams, t_b: np.ndarray, supervision: Supervision, weights: LossWeights
) -> float:
    """l2d * L_2D + l3d * L_3D + lv * L_V + lmix * L_mix."""
    return weighted_total(loss_terms(spec, params, t_b, supervision, weights), weights)


def grad_loss_total(
    spec: BodyModelSpec, params: BodyParams, t_b: np.ndarray, supervision: Supervision, weights: LossWeights
) -> np.ndarray:
    """
    Gradient of `loss_total` over [pose, shape, translation, t_b].

    :return: vector of length 3J + 13 + 3.
    :raises FitError: when the loss is not finite at `params`.
    """
    blocks = residual_blocks(spec, params, t_b, supervision, weights, with_jacobian=True)
    total = sum(block.weight * block.value for block in blocks)
    if not math.isfinite(total):
        raise FitError(f"loss is not finite at the evaluation point ({total!r}).")
    grad = np.zeros(parameter_count(spec) + 3)
    for block in blocks:
        if block.jacobian is not None:
            grad += 2.0 * block.weight * (block.jacobian.T @ block.residual)
    return grad


__all__ = [
    "TERM_NAMES",
    "LossWeights",
    "Supervision",
    "ResidualBlock",
    "loss_cam",
    "loss_3d",
    "loss_vertex",
    "loss_2d",
    "loss_mix",
    "residual_blocks",
    "loss_terms",
    "weighted_total",
    "loss_total",
    "grad_loss_total",
]
