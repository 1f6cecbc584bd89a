"""
Optimization-based estimators.

Submodules:
- `fit_config`: FitConfig and FitReport
- `pitch`: keypoint and depth based pitch search
- `adjust`: world-frame mesh adjustment
"""
from .fit_config import FitConfig, FitReport
from .pitch import angle_grid, depth_discrepancy, estimate_pitch, estimate_pitch_depth, estimate_pitch_roll, solve_translation
from .adjust import adjust_mesh, perturb_init, world_init

__all__ = [
    "FitConfig",
    "FitReport",
    "angle_grid",
    "depth_discrepancy",
    "estimate_pitch",
    "estimate_pitch_depth",
    "estimate_pitch_roll",
    "solve_translation",
    "adjust_mesh",
    "perturb_init",
    "world_init",
]
