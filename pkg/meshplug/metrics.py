"""
Evaluation metrics. Inputs are meters, results are millimeters.

World metrics (W-MPJPE, WPVE) align the predicted and ground-truth root
positions by translation only, so orientation and pose errors show up but
absolute depth does not.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError

MM_PER_M = 1000.0
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SimilarityTransform:
    """x -> scale * rotation @ x + translation."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return self.scale * points @ self.rotation.T + self.translation

    def inverse(self) -> "SimilarityTransform":
        rot_t = self.rotation.T
        return SimilarityTransform(1.0 / self.scale, rot_t, -(rot_t @ self.translation) / self.scale)


def _pair(pred: np.ndarray, gt: np.ndarray):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 3)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 3)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"points is invalid: {pred.shape[0]} predicted vs {gt.shape[0]} target points.")
    if pred.shape[0] == 0:
        raise DegenerateInputError("points is invalid: no points.")
    return pred, gt


def procrustes_align(source: np.ndarray, target: np.ndarray) -> SimilarityTransform:
    """
    Least-squares similarity transform mapping `source` onto `target` (Umeyama).

    Reflections are excluded by flipping the smallest singular direction.

    :raises DegenerateInputError: fewer than 3 points or a collinear/coincident source.
    """
    source, target = _pair(source, target)
    if source.shape[0] < 3:
        raise DegenerateInputError(f"source is invalid: need at least 3 points, got {source.shape[0]}.")
    mu_src, mu_tgt = source.mean(axis=0), target.mean(axis=0)
    src_c, tgt_c = source - mu_src, target - mu_tgt

    spread = np.linalg.svd(src_c, compute_uv=False)
    if spread[0] == 0.0 or spread[1] < RANK_TOL * spread[0]:
        raise DegenerateInputError("source is invalid: points are coincident or collinear.")

    n = source.shape[0]
    cov = tgt_c.T @ src_c / n
    U, D, Vt = np.linalg.svd(cov)
    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2, 2] = -1.0
    rotation = U @ S @ Vt
    var_src = np.sum(src_c * src_c) / n
    scale = float(np.trace(np.diag(D) @ S) / var_src)
    translation = mu_tgt - scale * rotation @ mu_src
    return SimilarityTransform(scale, rotation, translation)


def _mean_distance_mm(pred: np.ndarray, gt: np.ndarray) -> float:
    return float(np.mean(np.linalg.norm(pred - gt, axis=1)) * MM_PER_M)


def mpjpe(pred: np.ndarray, gt: np.ndarray) -> float:
    return _mean_distance_mm(*_pair(pred, gt))


def pve(pred_verts: np.ndarray, gt_verts: np.ndarray) -> float:
    return _mean_distance_mm(*_pair(pred_verts, gt_verts))


def pa_mpjpe(pred: np.ndarray, gt: np.ndarray) -> float:
    pred, gt = _pair(pred, gt)
    aligned = procrustes_align(pred, gt).apply(pred)
    return _mean_distance_mm(aligned, gt)


def w_mpjpe(pred_world: np.ndarray, gt_world: np.ndarray, root_index: int = 0) -> float:
    """MPJPE in the world frame after subtracting each skeleton's own root joint."""
    pred, gt = _pair(pred_world, gt_world)
    return _mean_distance_mm(pred - pred[root_index], gt - gt[root_index])


def wpve(
    pred_verts: np.ndarray,
    gt_verts: np.ndarray,
    pred_root: Optional[np.ndarray] = None,
    gt_root: Optional[np.ndarray] = None,
) -> float:
    """
    PVE in the world frame.

    :param pred_root: root joint of the predicted body; with `gt_root` it
                      removes the root offset like `w_mpjpe` does.
    """
    pred, gt = _pair(pred_verts, gt_verts)
    if pred_root is not None and gt_root is not None:
        pred = pred - np.asarray(pred_root, dtype=np.float64).reshape(3)
        gt = gt - np.asarray(gt_root, dtype=np.float64).reshape(3)
    return _mean_distance_mm(pred, gt)


__all__ = [
    "MM_PER_M",
    "SimilarityTransform",
    "procrustes_align",
    "mpjpe",
    "pve",
    "pa_mpjpe",
    "w_mpjpe",
    "wpve",
]
