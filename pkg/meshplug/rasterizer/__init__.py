"""
Depth rendering.

Submodules:
- `depth_map`: DepthMap, PFM I/O and crop/resize
- `raster`: z-buffer renderer
- `oracle`: ray-cast reference renderer
"""
from .depth_map import CROP_SIZE, SENTINEL, DepthMap, crop_resize_depth, read_pfm, write_pfm
from .raster import NEAR_PLANE, render_depth
from .oracle import render_depth_oracle

__all__ = [
    "CROP_SIZE",
    "SENTINEL",
    "NEAR_PLANE",
    "DepthMap",
    "crop_resize_depth",
    "read_pfm",
    "write_pfm",
    "render_depth",
    "render_depth_oracle",
]
