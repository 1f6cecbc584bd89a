"""
Axis-angle helpers.

`rodrigues` and `rodrigues_jacobian` are written out in numpy because the
body-model Jacobian needs the per-component derivative of every joint
rotation; the log map and geodesic distances go through
`scipy.spatial.transform.Rotation`.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

SMALL_ANGLE = 1e-8
TWO_PI = 2.0 * np.pi

_BASIS_SKEW = np.array(
    [
        [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
        [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    ]
)


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix [v]_x for (..., 3) input."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def rodrigues(rotvecs: np.ndarray) -> np.ndarray:
    """
    Axis-angle (..., 3) to rotation matrices (..., 3, 3).

    Angles below `SMALL_ANGLE` use the second-order Taylor expansion
    I + K + K^2 / 2, which removes the 0/0 of the closed form.
    """
    rotvecs = np.asarray(rotvecs, dtype=float)
    theta = np.linalg.norm(rotvecs, axis=-1)
    K = skew(rotvecs)
    K2 = K @ K
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0, np.sin(safe) / safe)
    b = np.where(small, 0.5, (1.0 - np.cos(safe)) / (safe * safe))
    eye = np.broadcast_to(np.eye(3), K.shape)
    return eye + a[..., None, None] * K + b[..., None, None] * K2


def rodrigues_jacobian(rotvec: np.ndarray) -> np.ndarray:
    """
    Derivatives dR/dv_i of a single axis-angle vector, shape (3, 3, 3)
    indexed [i, row, col].
    """
    v = np.asarray(rotvec, dtype=float).reshape(3)
    theta2 = float(v @ v)
    if theta2 < SMALL_ANGLE * SMALL_ANGLE:
        K = skew(v)
        return _BASIS_SKEW + 0.5 * (_BASIS_SKEW @ K + K @ _BASIS_SKEW)

    R = rodrigues(v)
    K = skew(v)
    I_minus_R = np.eye(3) - R
    out = np.empty((3, 3, 3))
    for i in range(3):
        c = np.cross(v, I_minus_R[:, i])
        out[i] = (v[i] * K + skew(c)) @ R / theta2
    return out


def log_map(matrices: np.ndarray) -> np.ndarray:
    """Rotation matrices (..., 3, 3) to axis-angle with angle in [0, pi]."""
    matrices = np.asarray(matrices, dtype=float)
    flat = matrices.reshape(-1, 3, 3)
    rotvecs = Rotation.from_matrix(flat).as_rotvec()
    return rotvecs.reshape(matrices.shape[:-2] + (3,))


def compose_rotvec(rotation: np.ndarray, rotvec: np.ndarray) -> np.ndarray:
    """log(rotation @ exp(rotvec)) for a single 3x3 `rotation`."""
    return log_map(np.asarray(rotation, dtype=float) @ rodrigues(rotvec))


def geodesic_distance(rotvec_a: np.ndarray, rotvec_b: np.ndarray = None) -> float:
    """Angle of the relative rotation between two axis-angle vectors (radians)."""
    a = Rotation.from_rotvec(np.array(rotvec_a, dtype=float).reshape(3))
    if rotvec_b is None:
        return float(a.magnitude())
    b = Rotation.from_rotvec(np.array(rotvec_b, dtype=float).reshape(3))
    return float((a.inv() * b).magnitude())


def normalize_rotvecs(rotvecs: np.ndarray) -> np.ndarray:
    """
    Canonical axis-angle: magnitudes in [0, pi], the branch `log_map` returns.

    A magnitude theta in (pi, 2*pi) becomes (2*pi - theta) about the negated
    axis; multiples of 2*pi are removed first. Both describe the same rotation.
    """
    rotvecs = np.array(rotvecs, dtype=float)
    theta = np.linalg.norm(rotvecs, axis=-1)
    over = theta > np.pi
    if not np.any(over):
        return rotvecs
    axes = rotvecs[over] / theta[over][..., None]
    wrapped = np.mod(theta[over], TWO_PI)
    flip = wrapped > np.pi
    wrapped = np.where(flip, TWO_PI - wrapped, wrapped)
    axes = np.where(flip[..., None], -axes, axes)
    rotvecs[over] = axes * wrapped[..., None]
    return rotvecs


__all__ = [
    "SMALL_ANGLE",
    "skew",
    "rodrigues",
    "rodrigues_jacobian",
    "log_map",
    "compose_rotvec",
    "geodesic_distance",
    "normalize_rotvecs",
]
