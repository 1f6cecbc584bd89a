"""
Full-perspective camera.

Conventions: R maps world to camera coordinates, p_c = R @ X_w - t_b; the
camera frame is x right, y down, z forward. Positive pitch tilts the camera
downward, so a point straight ahead projects above the principal point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Tuple

import numpy as np

from .errors import BehindCameraError, DegenerateInputError, SchemaError

# makes focal equal the image diagonal, f = sqrt(W^2 + H^2)
DEFAULT_FOV_DIAG = 2.0 * math.atan(0.5)
NEAR_EPS = 1e-6


def _wrap_angle(angle: float) -> float:
    """Map to (-pi, pi]; in-range angles are returned untouched."""
    angle = float(angle)
    if -math.pi < angle <= math.pi:
        return angle
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


@dataclass(frozen=True)
class Intrinsics:
    """K = [f 0 W/2; 0 f H/2; 0 0 1]."""

    focal: float
    width: int
    height: int

    def __post_init__(self):
        if not (math.isfinite(self.focal) and self.focal > 0):
            raise DegenerateInputError(f"focal is invalid: must be > 0, got {self.focal!r}.")
        if int(self.width) < 1 or int(self.height) < 1:
            raise DegenerateInputError(f"image size is invalid: got {self.width}x{self.height}.")
        object.__setattr__(self, "focal", float(self.focal))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def principal_point(self) -> Tuple[float, float]:
        return self.width / 2.0, self.height / 2.0

    @property
    def matrix(self) -> np.ndarray:
        cx, cy = self.principal_point
        return np.array([[self.focal, 0.0, cx], [0.0, self.focal, cy], [0.0, 0.0, 1.0]])

    def to_dict(self) -> Dict[str, Any]:
        return {"focal": self.focal, "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, data: Any) -> "Intrinsics":
        try:
            return cls(float(data["focal"]), int(data["width"]), int(data["height"]))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, DegenerateInputError):
                raise
            raise SchemaError(f"intrinsics is invalid: {e}.") from e


def intrinsics_from_fov(width: int, height: int, fov_diag: float = DEFAULT_FOV_DIAG) -> Intrinsics:
    """
    Focal length from a diagonal field of view.

    :param width: image width W in pixels.
    :param height: image height H in pixels.
    :param fov_diag: diagonal field of view in radians, 0 < fov < pi.
    :return: Intrinsics with focal = sqrt(W^2 + H^2) / (2 tan(fov / 2)).
    """
    if width < 1 or height < 1:
        raise DegenerateInputError(f"image size is invalid: got {width}x{height}.")
    if not 0.0 < fov_diag < math.pi:
        raise DegenerateInputError(f"fov_diag is invalid: must lie in (0, pi), got {fov_diag!r}.")
    diagonal = math.hypot(width, height)
    return Intrinsics(diagonal / (2.0 * math.tan(fov_diag / 2.0)), width, height)


def pitch_matrix(pitch: float) -> np.ndarray:
    c, s = math.cos(pitch), math.sin(pitch)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def roll_matrix(roll: float) -> np.ndarray:
    c, s = math.cos(roll), math.sin(roll)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def yaw_matrix(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_from_euler(pitch: float, roll: float = 0.0, yaw: float = 0.0) -> np.ndarray:
    """R = R_pitch @ R_roll @ R_yaw (x, z and y axes)."""
    return pitch_matrix(pitch) @ roll_matrix(roll) @ yaw_matrix(yaw)


@dataclass(frozen=True)
class Extrinsics:
    """Camera rotation angles (radians) and camera center (world, meters)."""

    pitch: float = 0.0
    roll: float = 0.0
    yaw: float = 0.0
    camera_center: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("pitch", "roll", "yaw"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DegenerateInputError(f"{name} is invalid: must be finite.")
            object.__setattr__(self, name, _wrap_angle(value))
        center = tuple(float(c) for c in np.asarray(self.camera_center, dtype=float).reshape(3))
        object.__setattr__(self, "camera_center", center)

    @cached_property
    def rotation(self) -> np.ndarray:
        return rotation_from_euler(self.pitch, self.roll, self.yaw)

    @property
    def t_b(self) -> np.ndarray:
        """Translation term of [R | -t_b] for this camera center: t_b = R C."""
        return self.rotation @ np.asarray(self.camera_center)

    def to_dict(self) -> Dict[str, Any]:
        return {"pitch": self.pitch, "roll": self.roll, "yaw": self.yaw, "camera_center": list(self.camera_center)}

    @classmethod
    def from_dict(cls, data: Any) -> "Extrinsics":
        try:
            return cls(float(data["pitch"]), float(data["roll"]), float(data["yaw"]), tuple(data["camera_center"]))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"extrinsics is invalid: {e}.") from e


def to_camera(points: np.ndarray, rotation: np.ndarray, t_b: np.ndarray) -> np.ndarray:
    """p_c = R X_w - t_b for K x 3 points."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return points @ np.asarray(rotation, dtype=np.float64).T - np.asarray(t_b, dtype=np.float64).reshape(3)


def project_camera_points(points_cam: np.ndarray, intr: Intrinsics) -> np.ndarray:
    """Pinhole projection of camera-frame points; raises on z <= NEAR_EPS."""
    points_cam = np.asarray(points_cam, dtype=np.float64).reshape(-1, 3)
    behind = np.flatnonzero(points_cam[:, 2] <= NEAR_EPS)
    if behind.size:
        raise BehindCameraError(
            f"{behind.size} point(s) at or behind the camera plane (first index {int(behind[0])})", behind
        )
    cx, cy = intr.principal_point
    z = points_cam[:, 2]
    return np.stack([intr.focal * points_cam[:, 0] / z + cx, intr.focal * points_cam[:, 1] / z + cy], axis=1)


def project(points: np.ndarray, intr: Intrinsics, ext: Extrinsics, t_b: np.ndarray) -> np.ndarray:
    """
    Pi = K [R | -t_b] applied to world points.

    :param points: K x 3 world points (meters).
    :param intr: camera intrinsics.
    :param ext: camera rotation; its camera_center is not used, t_b is.
    :param t_b: translation term in camera coordinates.
    :return: K x 2 pixel coordinates, possibly outside the image.
    """
    return project_camera_points(to_camera(points, ext.rotation, t_b), intr)


@dataclass(frozen=True)
class BBoxEncoding:
    cx_norm: float
    cy_norm: float
    b_norm: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.cx_norm, self.cy_norm, self.b_norm


def bbox_encode(c_x: float, c_y: float, b: float, width: float, height: float) -> BBoxEncoding:
    """(c_x / f, c_y / f, b / f) with f = sqrt(W^2 + H^2); centre relative to the image centre."""
    if not b > 0:
        raise DegenerateInputError(f"box size is invalid: must be > 0, got {b!r}.")
    f = math.sqrt(width * width + height * height)
    return BBoxEncoding(c_x / f, c_y / f, b / f)


def bbox_from_projection(points2d: np.ndarray, width: float, height: float) -> Tuple[float, float, float]:
    """
    Tight square box around projected points.

    :return: (c_x, c_y, b): centre relative to the image centre and side
             length, floored at 1 pixel.
    """
    points2d = np.asarray(points2d, dtype=np.float64).reshape(-1, 2)
    if points2d.shape[0] == 0:
        raise DegenerateInputError("points2d is invalid: at least one point is required.")
    lo, hi = points2d.min(axis=0), points2d.max(axis=0)
    center = (lo + hi) / 2.0
    side = max(float(np.max(hi - lo)), 1.0)
    return float(center[0] - width / 2.0), float(center[1] - height / 2.0), side


__all__ = [
    "DEFAULT_FOV_DIAG",
    "NEAR_EPS",
    "Intrinsics",
    "Extrinsics",
    "BBoxEncoding",
    "intrinsics_from_fov",
    "pitch_matrix",
    "roll_matrix",
    "yaw_matrix",
    "rotation_from_euler",
    "to_camera",
    "project_camera_points",
    "project",
    "bbox_encode",
    "bbox_from_projection",
]
