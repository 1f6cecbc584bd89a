"""World-frame mesh adjustment: descent on the total loss with an Armijo line search."""
from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..body_model import BodyModelSpec, BodyParams, parameter_count, root_pivot
from ..camera import Intrinsics, pitch_matrix
from ..errors import BehindCameraError, FitError
from ..losses import ResidualBlock, Supervision, residual_blocks, weighted_total
from ..rotations import compose_rotvec, rodrigues
from ..setup_logging import get_logger
from ..transform import camera_to_world
from ..types import DescentDirection
from .fit_config import FitConfig, FitReport

logger = get_logger("MeshAdjuster")


def world_init(spec: BodyModelSpec, init_cam: BodyParams, pitch: float, t_b: np.ndarray) -> BodyParams:
    """
    Lift a camera-frame body (p_c = R X_w - t_b) into the world frame.

    The rotation pivots at the shaped rest root so the world mesh equals
    R^T (camera mesh + t_b) exactly.
    """
    world = camera_to_world(init_cam, pitch, pivot=root_pivot(spec, init_cam.shape))
    return world.replace(translation=world.translation + pitch_matrix(pitch).T @ np.asarray(t_b, dtype=np.float64))


def perturb_init(
    params: BodyParams, rng: np.random.Generator, root_deg: float = 15.0, pose_sigma: float = 0.05
) -> BodyParams:
    """
    Degrade a body the way a noisy backbone would: the root is turned by
    `root_deg` about a random axis and every other joint gets N(0, pose_sigma) noise.
    """
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    pose = params.pose.copy()
    pose[0] = compose_rotvec(rodrigues(math.radians(root_deg) * axis), pose[0])
    pose[1:] += rng.normal(0.0, pose_sigma, size=pose[1:].shape)
    return params.replace(pose=pose)


class _Objective:
    def __init__(self, spec: BodyModelSpec, t_b: np.ndarray, supervision: Supervision, cfg: FitConfig):
        self.spec = spec
        self.t_b = t_b
        self.supervision = supervision
        self.weights = cfg.weights
        self.n_params = parameter_count(spec)

    def params(self, x: np.ndarray) -> BodyParams:
        return BodyParams.from_vector(x, self.spec.joint_count)

    def blocks(self, x: np.ndarray, with_jacobian: bool) -> List[ResidualBlock]:
        return residual_blocks(self.spec, self.params(x), self.t_b, self.supervision, self.weights, with_jacobian)

    def value(self, x: np.ndarray) -> float:
        try:
            blocks = self.blocks(x, with_jacobian=False)
        except BehindCameraError:
            return math.inf
        return float(sum(block.weight * block.value for block in blocks))

    def terms(self, x: np.ndarray):
        terms = {block.name: block.value for block in self.blocks(x, with_jacobian=False)}
        return terms, weighted_total(terms, self.weights)

    def linearize(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        """(loss, gradient, Gauss-Newton matrix) over the body parameters; t_b stays fixed."""
        blocks = self.blocks(x, with_jacobian=True)
        loss = 0.0
        grad = np.zeros(self.n_params)
        gn = np.zeros((self.n_params, self.n_params))
        for block in blocks:
            loss += block.weight * block.value
            if block.jacobian is None:
                continue
            jac = block.jacobian[:, :self.n_params]
            grad += 2.0 * block.weight * (jac.T @ block.residual)
            gn += 2.0 * block.weight * (jac.T @ jac)
        return float(loss), grad, gn


def _direction(grad: np.ndarray, gn: np.ndarray, cfg: FitConfig) -> np.ndarray:
    if cfg.direction is DescentDirection.Gradient:
        return -grad
    scale = max(float(np.mean(np.diag(gn))), 1.0)
    try:
        step = linalg.solve(gn + cfg.damping * scale * np.eye(len(grad)), -grad, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        return -grad
    if not np.all(np.isfinite(step)) or step @ grad >= 0.0:
        return -grad
    return step


def adjust_mesh(
    init_cam: BodyParams,
    pitch: float,
    keypoints2d: Optional[np.ndarray],
    spec: BodyModelSpec,
    intr: Intrinsics,
    cfg: FitConfig,
    gt3d: Optional[np.ndarray] = None,
    gt_verts: Optional[np.ndarray] = None,
    gt_pose: Optional[np.ndarray] = None,
    t_b: Optional[np.ndarray] = None,
) -> Tuple[BodyParams, FitReport]:
    """
    Fit world-frame body parameters starting from a camera-frame estimate.

    :param init_cam: camera-frame body, e.g. a backbone's output.
    :param pitch: camera pitch (radians), estimated or ground truth.
    :param keypoints2d: J x 2 observed keypoints, or None.
    :param spec: body model.
    :param intr: camera intrinsics.
    :param cfg: optimizer settings and loss weights.
    :param gt3d: optional J x 3 world joints.
    :param gt_verts: optional N x 3 world vertices.
    :param gt_pose: optional J x 3 world pose for the pose term.
    :param t_b: camera translation term, zero when omitted; held fixed.
    :return: (world params, report). A stalled line search is reported through `FitReport.status`.
    :raises FitError: when the loss at the starting point is not finite.
    """
    t_b = np.zeros(3) if t_b is None else np.asarray(t_b, dtype=np.float64).reshape(3)
    supervision = Supervision(intr, pitch, keypoints2d, gt3d, gt_verts, gt_pose)
    objective = _Objective(spec, t_b, supervision, cfg)

    x = world_init(spec, init_cam, pitch, t_b).as_vector()
    try:
        loss, grad, gn = objective.linearize(x)
    except BehindCameraError as e:
        raise FitError(f"initial body is behind the camera: {e}") from e
    if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
        raise FitError(f"loss is not finite at the initial point ({loss!r}).")

    initial_loss = loss
    history = [loss]
    status = "max-iters"
    iterations = 0
    for iterations in range(cfg.max_iters):
        if loss <= cfg.loss_tol or float(np.linalg.norm(grad)) < cfg.grad_tol:
            status = "converged"
            break
        direction = _direction(grad, gn, cfg)
        slope = float(grad @ direction)
        step = cfg.initial_step
        accepted = False
        while step >= cfg.min_step:
            # params normalize axis-angle magnitudes; the loss is judged on that form
            trial = objective.params(x + step * direction).as_vector()
            trial_loss = objective.value(trial)
            if trial_loss <= loss + cfg.armijo_c * step * slope:
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            status = "stalled"
            logger.warning(f"line search stalled at iteration {iterations}, loss {loss:.6g}")
            break

        x = trial
        previous = loss
        loss, grad, gn = objective.linearize(x)
        history.append(loss)
        logger.debug(f"iteration {iterations}: loss {loss:.6g}, step {step:.3g}")
        if previous - loss <= cfg.loss_tol * max(1.0, previous):
            status = "converged"
            iterations += 1
            break
    else:
        iterations = cfg.max_iters

    terms, final = objective.terms(x)
    report = FitReport(
        final_loss=final,
        iterations=iterations,
        terms=terms,
        converged=status == "converged",
        status=status,
        initial_loss=initial_loss,
        history=tuple(history),
    )
    logger.info(f"adjust_mesh {status} after {iterations} iteration(s), loss {initial_loss:.6g} -> {final:.6g}")
    return objective.params(x), report


__all__ = ["world_init", "perturb_init", "adjust_mesh"]
