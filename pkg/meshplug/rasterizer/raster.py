"""
Z-buffer depth renderer.

Pixel (row i, col j) samples its centre (j + 0.5, i + 0.5). Coverage uses
edge functions with a top-left tie rule, depth is interpolated
perspective-correctly through 1/z, and triangles with any vertex nearer
than `NEAR_PLANE` are dropped whole.
"""
from __future__ import annotations

from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..body_model import Mesh
from ..camera import Extrinsics, Intrinsics, to_camera
from ..setup_logging import get_logger
from .depth_map import SENTINEL, DepthMap

logger = get_logger("Rasterizer")

NEAR_PLANE = 1e-3


def screen_triangles(mesh: Mesh, intr: Intrinsics, ext: Extrinsics, t_b: np.ndarray):
    """
    Camera-frame triangles that survive the near clip.

    :return: (camera-space triangles T x 3 x 3, pixel-space triangles T x 3 x 2)
    """
    if mesh.faces.shape[0] == 0:
        return np.zeros((0, 3, 3)), np.zeros((0, 3, 2))
    cam = to_camera(mesh.vertices, ext.rotation, t_b)
    tris = cam[mesh.faces]
    keep = np.all(tris[:, :, 2] > NEAR_PLANE, axis=1)
    dropped = int(tris.shape[0] - np.count_nonzero(keep))
    if dropped:
        logger.debug(f"near clip dropped {dropped} triangle(s)")
    tris = tris[keep]
    cx, cy = intr.principal_point
    z = tris[:, :, 2]
    screen = np.stack([intr.focal * tris[:, :, 0] / z + cx, intr.focal * tris[:, :, 1] / z + cy], axis=2)
    return tris, screen


def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def _is_top_left(ax, ay, bx, by) -> bool:
    # interior lies on the positive side; y grows downward
    dx, dy = bx - ax, by - ay
    return (dy == 0.0 and dx > 0.0) or dy < 0.0


class Coverage(NamedTuple):
    """Pixel centres owned by one triangle inside its bounding window."""

    rows: slice
    cols: slice
    inside: np.ndarray
    weights: Tuple[np.ndarray, np.ndarray, np.ndarray]
    area: float
    order: Tuple[int, int, int]


def triangle_coverage(tri: np.ndarray, width: int, height: int) -> Optional[Coverage]:
    """
    Edge-function coverage of a pixel-space triangle with the top-left tie rule.

    Vertices are reordered to positive signed area; `order` records the
    permutation and `weights[k]` is the edge function opposite vertex
    `order[k]`. Degenerate or off-image triangles give None.
    """
    order = (0, 1, 2)
    (x0, y0), (x1, y1), (x2, y2) = tri
    area = _edge(x0, y0, x1, y1, x2, y2)
    if area == 0.0 or not np.isfinite(area):
        return None
    if area < 0.0:
        x1, y1, x2, y2 = x2, y2, x1, y1
        order = (0, 2, 1)
        area = -area

    col_lo = max(int(np.ceil(min(x0, x1, x2) - 0.5)), 0)
    col_hi = min(int(np.floor(max(x0, x1, x2) - 0.5)), width - 1)
    row_lo = max(int(np.ceil(min(y0, y1, y2) - 0.5)), 0)
    row_hi = min(int(np.floor(max(y0, y1, y2) - 0.5)), height - 1)
    if col_lo > col_hi or row_lo > row_hi:
        return None

    px = np.arange(col_lo, col_hi + 1) + 0.5
    py = np.arange(row_lo, row_hi + 1)[:, None] + 0.5
    w0 = _edge(x1, y1, x2, y2, px, py)
    w1 = _edge(x2, y2, x0, y0, px, py)
    w2 = _edge(x0, y0, x1, y1, px, py)
    inside = (
        ((w0 > 0.0) | ((w0 == 0.0) & _is_top_left(x1, y1, x2, y2)))
        & ((w1 > 0.0) | ((w1 == 0.0) & _is_top_left(x2, y2, x0, y0)))
        & ((w2 > 0.0) | ((w2 == 0.0) & _is_top_left(x0, y0, x1, y1)))
    )
    return Coverage(slice(row_lo, row_hi + 1), slice(col_lo, col_hi + 1), inside, (w0, w1, w2), float(area), order)


def render_depth(mesh: Mesh, intr: Intrinsics, ext: Extrinsics, t_b: np.ndarray) -> DepthMap:
    """
    Minimum camera-frame z over the triangles covering each pixel centre.

    :param mesh: world-space mesh.
    :param intr: intrinsics; the image is intr.width x intr.height.
    :param ext: camera rotation.
    :param t_b: translation term in camera coordinates.
    :return: DepthMap with +inf background.
    """
    width, height = intr.width, intr.height
    zbuf = np.full((height, width), SENTINEL)
    tris, screen = screen_triangles(mesh, intr, ext, t_b)

    for cam_tri, tri in zip(tris, screen):
        cover = triangle_coverage(tri, width, height)
        if cover is None or not np.any(cover.inside):
            continue
        z0, z1, z2 = cam_tri[list(cover.order), 2]
        w0, w1, w2 = cover.weights
        inv_z = (w0 / z0 + w1 / z1 + w2 / z2) / cover.area
        depth = np.where(cover.inside, 1.0 / np.where(cover.inside, inv_z, 1.0), SENTINEL)
        window = zbuf[cover.rows, cover.cols]
        np.minimum(window, depth, out=window)

    return DepthMap(width, height, zbuf)


__all__ = ["NEAR_PLANE", "Coverage", "render_depth", "screen_triangles", "triangle_coverage"]
