"""Top-level package for meshplug."""
from . import types
from . import body_model
from . import rasterizer
from . import fitting
from . import datagen
from .errors import MeshPlugError
from .body_model import BodyModelSpec, BodyParams, Mesh, lbs_forward, toy_body_spec
from .camera import Extrinsics, Intrinsics, intrinsics_from_fov, project, rotation_from_euler
from .transform import camera_to_world, transform_mesh, world_to_camera
from .losses import LossWeights
from .fitting import FitConfig, FitReport, adjust_mesh, estimate_pitch, estimate_pitch_depth
from .datagen import DatasetBuilder, SceneRecord


__all__ = [
    "BodyModelSpec",
    "BodyParams",
    "Mesh",
    "lbs_forward",
    "toy_body_spec",
    "Intrinsics",
    "Extrinsics",
    "intrinsics_from_fov",
    "project",
    "rotation_from_euler",
    "camera_to_world",
    "world_to_camera",
    "transform_mesh",
    "LossWeights",
    "FitConfig",
    "FitReport",
    "adjust_mesh",
    "estimate_pitch",
    "estimate_pitch_depth",
    "DatasetBuilder",
    "SceneRecord",
    "MeshPlugError",
    "types",
    "body_model",
    "rasterizer",
    "fitting",
    "datagen",
]
__version__ = "0.1.0"
