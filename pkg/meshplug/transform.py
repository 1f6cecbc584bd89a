"""
Camera-to-world transforms driven by camera pitch.

The parameter-level transforms rotate the root orientation and the
translation; pose and shape are untouched. The mesh-level transform is a
rigid rotation of every vertex and joint about the origin.
"""
from __future__ import annotations

from typing import Optional, Union

import numpy as np

from .body_model import BodyParams, Mesh
from .camera import pitch_matrix
from .rotations import compose_rotvec
from .types import TransformDirection


def rotate_params(params: BodyParams, rotation: np.ndarray, pivot: Optional[np.ndarray] = None) -> BodyParams:
    """
    Rigidly rotate a parametric body.

    root' = log(rotation @ exp(root)), t' = rotation @ (t + pivot) - pivot.

    :param params: body to rotate.
    :param rotation: 3x3 rotation applied about the origin.
    :param pivot: shaped rest root joint of the body; with it the posed
                  mesh of the result equals the rotated posed mesh. None
                  rotates the translation alone.
    """
    rotation = np.asarray(rotation, dtype=np.float64)
    pose = params.pose.copy()
    pose[0] = compose_rotvec(rotation, params.root_orientation)
    if pivot is None:
        translation = rotation @ params.translation
    else:
        pivot = np.asarray(pivot, dtype=np.float64).reshape(3)
        translation = rotation @ (params.translation + pivot) - pivot
    return params.replace(pose=pose, translation=translation)


def camera_to_world(params_cam: BodyParams, pitch: float, pivot: Optional[np.ndarray] = None) -> BodyParams:
    """Apply R(pitch)^T to a camera-frame body."""
    if pitch == 0.0:
        return params_cam
    return rotate_params(params_cam, pitch_matrix(pitch).T, pivot)


def world_to_camera(params_world: BodyParams, pitch: float, pivot: Optional[np.ndarray] = None) -> BodyParams:
    """Apply R(pitch) to a world-frame body."""
    if pitch == 0.0:
        return params_world
    return rotate_params(params_world, pitch_matrix(pitch), pivot)


def transform_mesh(mesh: Mesh, pitch: float, direction: Union[TransformDirection, str]) -> Mesh:
    """
    Rotate every vertex and joint about the origin.

    :param direction: camera-to-world applies R(pitch)^T, world-to-camera R(pitch).
    """
    direction = TransformDirection(direction)
    rotation = pitch_matrix(pitch)
    if direction is TransformDirection.CameraToWorld:
        rotation = rotation.T
    return mesh.transformed(rotation)


__all__ = ["rotate_params", "camera_to_world", "world_to_camera", "transform_mesh"]
