"""
Brute-force ray caster used to check the rasterizer.

Pixel ownership follows the rasterizer's top-left edge rule, so both agree
on which triangle a pixel centre on a shared edge belongs to. Depth is
independent: each owned pixel centre shoots the ray
d = ((u - W/2) / f, (v - H/2) / f, 1) from the camera origin and a
Moller-Trumbore hit at parameter t lies at camera z = t.
Slow and exact: not meant for dataset-sized images.
"""
from __future__ import annotations

import numpy as np

from ..body_model import Mesh
from ..camera import Extrinsics, Intrinsics
from .depth_map import SENTINEL, DepthMap
from .raster import screen_triangles, triangle_coverage


def render_depth_oracle(mesh: Mesh, intr: Intrinsics, ext: Extrinsics, t_b: np.ndarray) -> DepthMap:
    width, height = intr.width, intr.height
    cx, cy = intr.principal_point
    cols, rows = np.meshgrid(np.arange(width) + 0.5, np.arange(height) + 0.5)
    rays = np.stack([(cols - cx) / intr.focal, (rows - cy) / intr.focal, np.ones_like(cols)], axis=-1)

    zbuf = np.full((height, width), SENTINEL)
    tris, screen = screen_triangles(mesh, intr, ext, t_b)
    for (a, b, c), tri in zip(tris, screen):
        cover = triangle_coverage(tri, width, height)
        if cover is None:
            continue
        owned = np.zeros((height, width), dtype=bool)
        owned[cover.rows, cover.cols] = cover.inside

        e1, e2 = b - a, c - a
        pvec = np.cross(rays, e2)
        det = pvec @ e1
        hit = owned & (det != 0.0)
        inv_det = np.divide(1.0, det, out=np.zeros_like(det), where=hit)
        # origin is the camera centre, so s = -a
        qvec = np.cross(-a, e1)
        t = float(e2 @ qvec) * inv_det
        hit &= t > 0.0
        np.minimum(zbuf, np.where(hit, t, SENTINEL), out=zbuf)
    return DepthMap(width, height, zbuf)


__all__ = ["render_depth_oracle"]
