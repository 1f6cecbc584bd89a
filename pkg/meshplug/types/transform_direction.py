from enum import Enum


class TransformDirection(str, Enum):
    # apply R(pitch)^T: camera frame -> gravity-aligned world frame
    CameraToWorld = "camera-to-world"
    # apply R(pitch): world frame -> camera frame
    WorldToCamera = "world-to-camera"
