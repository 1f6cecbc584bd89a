"""
Geometric pitch estimators.

`estimate_pitch` resects a camera whose rotation is restricted to pitch:
for every candidate the translation t_b has a closed form (rays through
the keypoints must pass through R X_k - t_b), and the candidate is scored
with the reprojection loss. `estimate_pitch_depth` instead matches depth
renders of a body hypothesis against an observed depth map.
"""
from __future__ import annotations

import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg, optimize

from ..body_model import Mesh
from ..camera import Extrinsics, Intrinsics, pitch_matrix, rotation_from_euler
from ..errors import BehindCameraError, DegenerateInputError, DimensionMismatchError, InfeasibleError
from ..losses import loss_2d
from ..rasterizer import DepthMap, render_depth
from ..setup_logging import get_logger
from .fit_config import FitConfig, FitReport

logger = get_logger("PitchEstimator")

MIN_KEYPOINTS = 4


def angle_grid(min_deg: float, max_deg: float, step_deg: float) -> np.ndarray:
    """Inclusive grid in radians; candidates are min + i * step."""
    count = int(math.floor((max_deg - min_deg) / step_deg + 1e-9)) + 1
    return np.deg2rad(min_deg + step_deg * np.arange(count))


def _rays(keypoints2d: np.ndarray, intr: Intrinsics) -> np.ndarray:
    cx, cy = intr.principal_point
    rays = np.stack(
        [(keypoints2d[:, 0] - cx) / intr.focal, (keypoints2d[:, 1] - cy) / intr.focal, np.ones(len(keypoints2d))],
        axis=1,
    )
    return rays / np.linalg.norm(rays, axis=1, keepdims=True)


def solve_translation(rotated: np.ndarray, rays: np.ndarray) -> Optional[np.ndarray]:
    """
    t_b minimizing sum_k ||(I - d_k d_k^T)(R X_k - t_b)||^2.

    :param rotated: R X_k for every joint.
    :param rays: unit back-projected rays d_k.
    :return: t_b, or None when the normal equations are singular.
    """
    projectors = np.eye(3)[None, :, :] - rays[:, :, None] * rays[:, None, :]
    lhs = projectors.sum(axis=0)
    rhs = np.einsum("kab,kb->a", projectors, rotated)
    try:
        return linalg.solve(lhs, rhs, assume_a="sym")
    except (linalg.LinAlgError, ValueError):
        return None


class _KeypointScorer:
    def __init__(self, joints: np.ndarray, keypoints2d: np.ndarray, intr: Intrinsics):
        self.joints = joints
        self.keypoints2d = keypoints2d
        self.intr = intr
        self.rays = _rays(keypoints2d, intr)
        self.evaluations = 0

    def solve(self, rotation: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
        self.evaluations += 1
        t_b = solve_translation(self.joints @ rotation.T, self.rays)
        if t_b is None:
            return math.inf, None
        cam = self.joints @ rotation.T - t_b
        if np.any(cam[:, 2] <= 1e-6):
            return math.inf, None
        # loss_2d only rotates by pitch, so project through the full rotation here
        diff = self.intr.focal * cam[:, :2] / cam[:, 2:3] + np.asarray(self.intr.principal_point) - self.keypoints2d
        return float(np.sum(diff * diff) / len(diff)), t_b


def _check_keypoints(gt_joints_world: np.ndarray, keypoints2d: np.ndarray):
    joints = np.asarray(gt_joints_world, dtype=np.float64).reshape(-1, 3)
    keypoints = np.asarray(keypoints2d, dtype=np.float64).reshape(-1, 2)
    if joints.shape[0] != keypoints.shape[0]:
        raise DimensionMismatchError(
            f"keypoints is invalid: {joints.shape[0]} joints vs {keypoints.shape[0]} keypoints."
        )
    if joints.shape[0] < MIN_KEYPOINTS:
        raise DegenerateInputError(f"keypoints is invalid: need at least {MIN_KEYPOINTS}, got {joints.shape[0]}.")
    return joints, keypoints


def _refine(score: Callable[[float], float], center: float, half_width: float, tol: float, lo: float, hi: float):
    bounds = (max(center - half_width, lo), min(center + half_width, hi))
    if bounds[1] - bounds[0] <= tol:
        return center, score(center)
    result = optimize.minimize_scalar(score, bounds=bounds, method="bounded", options={"xatol": tol})
    return float(result.x), float(result.fun)


def estimate_pitch(
    gt_joints_world: np.ndarray, keypoints2d: np.ndarray, intr: Intrinsics, cfg: FitConfig
) -> Tuple[float, np.ndarray, FitReport]:
    """
    Pitch-only camera resectioning.

    :param gt_joints_world: K x 3 joints in a gravity-aligned frame whose heading matches the camera.
    :param keypoints2d: K x 2 observed pixels, ordered like the joints.
    :param intr: camera intrinsics.
    :param cfg: pitch grid and refine tolerance.
    :return: (pitch radians, t_b, report); the report's loss is L_2D at the result.
    :raises InfeasibleError: when no candidate keeps every joint in front of the camera.
    """
    joints, keypoints = _check_keypoints(gt_joints_world, keypoints2d)
    scorer = _KeypointScorer(joints, keypoints, intr)
    grid = angle_grid(cfg.pitch_min_deg, cfg.pitch_max_deg, cfg.pitch_step_deg)
    scores = np.array([scorer.solve(pitch_matrix(p))[0] for p in grid])
    if not np.any(np.isfinite(scores)):
        raise InfeasibleError("every pitch candidate places a joint behind the camera.")

    best = int(np.argmin(scores))
    grid_pitch, grid_score = float(grid[best]), float(scores[best])
    logger.debug(f"pitch grid best {math.degrees(grid_pitch):.2f} deg, L_2D {grid_score:.6g}")

    pitch, refined = _refine(
        lambda p: scorer.solve(pitch_matrix(p))[0],
        grid_pitch,
        math.radians(cfg.pitch_step_deg),
        cfg.pitch_tol,
        grid[0],
        grid[-1],
    )
    if not refined <= grid_score:
        pitch = grid_pitch
    score, t_b = scorer.solve(pitch_matrix(pitch))
    final = loss_2d(joints, keypoints, intr, pitch, t_b)
    report = FitReport(
        final_loss=final,
        iterations=scorer.evaluations,
        terms={"l2d": final},
        converged=True,
        status="ok",
        initial_loss=grid_score,
    )
    return pitch, t_b, report


def estimate_pitch_roll(
    gt_joints_world: np.ndarray, keypoints2d: np.ndarray, intr: Intrinsics, cfg: FitConfig
) -> Tuple[float, float, np.ndarray, FitReport]:
    """
    Joint pitch and roll resectioning.

    A 2-D grid over the configured pitch and roll ranges, then a bounded
    Nelder-Mead polish of both angles within one grid cell. Roll is an
    auxiliary output; downstream stages consume pitch only.
    """
    joints, keypoints = _check_keypoints(gt_joints_world, keypoints2d)
    scorer = _KeypointScorer(joints, keypoints, intr)
    pitches = angle_grid(cfg.pitch_min_deg, cfg.pitch_max_deg, cfg.pitch_step_deg)
    rolls = angle_grid(cfg.roll_min_deg, cfg.roll_max_deg, cfg.roll_step_deg)

    best = (math.inf, 0.0, 0.0)
    for pitch in pitches:
        for roll in rolls:
            score, _ = scorer.solve(rotation_from_euler(pitch, roll))
            if score < best[0]:
                best = (score, float(pitch), float(roll))
    if not math.isfinite(best[0]):
        raise InfeasibleError("every pitch/roll candidate places a joint behind the camera.")
    grid_score, grid_pitch, grid_roll = best

    half = np.radians([cfg.pitch_step_deg, cfg.roll_step_deg])
    lower = np.maximum([grid_pitch, grid_roll] - half, [pitches[0], rolls[0]])
    upper = np.minimum([grid_pitch, grid_roll] + half, [pitches[-1], rolls[-1]])
    result = optimize.minimize(
        lambda x: scorer.solve(rotation_from_euler(x[0], x[1]))[0],
        x0=np.array([grid_pitch, grid_roll]),
        method="Nelder-Mead",
        bounds=list(zip(lower, upper)),
        options={"xatol": cfg.pitch_tol, "fatol": 1e-12, "maxiter": 400},
    )
    pitch, roll = grid_pitch, grid_roll
    if np.isfinite(result.fun) and result.fun <= grid_score:
        pitch, roll = float(result.x[0]), float(result.x[1])
    score, t_b = scorer.solve(rotation_from_euler(pitch, roll))
    report = FitReport(
        final_loss=score,
        iterations=scorer.evaluations,
        terms={"l2d": score},
        converged=True,
        status="ok",
        initial_loss=grid_score,
    )
    return pitch, roll, t_b, report


def depth_discrepancy(observed: DepthMap, candidate: DepthMap, min_overlap: float) -> float:
    """Mean |depth difference| over pixels covered in both maps; +inf below the overlap floor."""
    both = observed.covered & candidate.covered
    overlap = int(np.count_nonzero(both))
    if overlap == 0 or overlap < min_overlap * observed.coverage:
        return math.inf
    return float(np.mean(np.abs(observed.depth[both] - candidate.depth[both])))


def estimate_pitch_depth(
    observed: DepthMap, mesh_hypothesis: Mesh, intr: Intrinsics, cfg: FitConfig
) -> Tuple[float, FitReport]:
    """
    Pitch from depth matching.

    :param observed: depth map seen by the camera.
    :param mesh_hypothesis: world-oriented body whose root sits at the
                            camera-frame root position; candidate P renders
                            it rotated by R(P) about that root.
    :param intr: intrinsics shared by the observation and the renders.
    :param cfg: pitch grid and `min_overlap`.
    :return: (grid pitch, report); ties prefer the smaller |pitch|.
    """
    if (observed.width, observed.height) != (intr.width, intr.height):
        raise DimensionMismatchError(
            f"observed is invalid: {observed.width}x{observed.height} vs camera {intr.width}x{intr.height}."
        )
    if observed.coverage == 0:
        raise InfeasibleError("observed depth map has no covered pixels.")

    root = mesh_hypothesis.root
    camera = Extrinsics()
    grid = angle_grid(cfg.pitch_min_deg, cfg.pitch_max_deg, cfg.pitch_step_deg)
    scores = np.empty(len(grid))
    for i, pitch in enumerate(grid):
        rotation = pitch_matrix(pitch)
        candidate = mesh_hypothesis.transformed(rotation, root - rotation @ root)
        scores[i] = depth_discrepancy(observed, render_depth(candidate, intr, camera, np.zeros(3)), cfg.min_overlap)

    if not np.any(np.isfinite(scores)):
        raise InfeasibleError("no pitch candidate overlaps the observed depth.")
    order = np.lexsort((np.abs(grid), scores))
    best = int(order[0])
    logger.debug(f"depth pitch best {math.degrees(grid[best]):.2f} deg, mean |dz| {scores[best]:.6g}")
    report = FitReport(
        final_loss=float(scores[best]),
        iterations=len(grid),
        terms={"depth": float(scores[best])},
        converged=True,
        status="ok",
        initial_loss=float(scores[np.argmin(np.abs(grid))]),
    )
    return float(grid[best]), report


__all__ = [
    "angle_grid",
    "solve_translation",
    "estimate_pitch",
    "estimate_pitch_roll",
    "depth_discrepancy",
    "estimate_pitch_depth",
]
