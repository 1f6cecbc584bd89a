from .transform_direction import TransformDirection
from .pose_source import PoseSource
from .descent_direction import DescentDirection

__all__ = ["TransformDirection", "PoseSource", "DescentDirection"]
