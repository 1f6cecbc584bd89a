from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..errors import DegenerateInputError, InvariantViolation, SchemaError, SpecNotFoundError
from ..setup_logging import get_logger

logger = get_logger("DepthMap")

SENTINEL = np.inf
CROP_SIZE = 256

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class DepthMap:
    """
    Row-major H x W grid of camera-frame z (meters).

    Background pixels hold +inf; every finite entry is positive.
    """

    width: int
    height: int
    depth: np.ndarray

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise DegenerateInputError(f"depth map size is invalid: got {self.width}x{self.height}.")
        depth = np.array(self.depth, dtype=np.float64)
        if depth.shape != (int(self.height), int(self.width)):
            raise InvariantViolation(
                f"depth is invalid: expected {self.height} x {self.width}, got {depth.shape}."
            )
        finite = np.isfinite(depth)
        if np.any(depth[finite] <= 0.0) or np.any(np.isnan(depth)) or np.any(depth == -np.inf):
            raise InvariantViolation("depth is invalid: finite entries must be > 0, background must be +inf.")
        depth.setflags(write=False)
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "depth", depth)

    @classmethod
    def empty(cls, width: int, height: int) -> "DepthMap":
        return cls(width, height, np.full((int(height), int(width)), SENTINEL))

    @property
    def covered(self) -> np.ndarray:
        return np.isfinite(self.depth)

    @property
    def coverage(self) -> int:
        return int(np.count_nonzero(self.covered))

    def depth_range(self) -> Tuple[float, float]:
        values = self.depth[self.covered]
        if values.size == 0:
            return math.inf, math.inf
        return float(values.min()), float(values.max())


def write_pfm(path: PathLike, depth_map: DepthMap) -> Path:
    """Single-channel little-endian PFM; rows are stored bottom to top."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"Pf\n{depth_map.width} {depth_map.height}\n-1.0\n".encode("ascii")
    payload = np.flipud(depth_map.depth).astype("<f4").tobytes()
    path.write_bytes(header + payload)
    return path


def read_pfm(path: PathLike) -> DepthMap:
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"depth map not found: {path}")
    blob = path.read_bytes()
    parts = blob.split(b"\n", 3)
    if len(parts) != 4:
        raise SchemaError(f"depth map is invalid: {path} has a truncated PFM header.")
    kind, dims, scale, payload = parts
    if kind.strip() != b"Pf":
        raise SchemaError(f"depth map is invalid: {path} is not a single-channel PFM.")
    try:
        width, height = (int(v) for v in dims.split())
        scale_value = float(scale)
    except ValueError as e:
        raise SchemaError(f"depth map is invalid: {path} has a malformed PFM header ({e}).") from e
    dtype = "<f4" if scale_value < 0 else ">f4"
    expected = width * height * 4
    if len(payload) < expected:
        raise SchemaError(f"depth map is invalid: {path} holds {len(payload)} bytes, expected {expected}.")
    grid = np.frombuffer(payload[:expected], dtype=dtype).reshape(height, width)
    return DepthMap(width, height, np.flipud(grid).astype(np.float64))


def crop_resize_depth(depth_map: DepthMap, bbox: Tuple[float, float, float], out_size: int = CROP_SIZE) -> DepthMap:
    """
    Nearest-neighbour resample of a square crop.

    :param bbox: (c_x, c_y, b) with the centre relative to the image centre.
    :param out_size: output side length in pixels.
    :return: out_size x out_size map; crop pixels outside the image are background.
    """
    c_x, c_y, side = (float(v) for v in bbox)
    if not side > 0:
        raise DegenerateInputError(f"box size is invalid: must be > 0, got {side!r}.")
    if out_size < 1:
        raise DegenerateInputError(f"out_size is invalid: must be >= 1, got {out_size}.")
    x0 = depth_map.width / 2.0 + c_x - side / 2.0
    y0 = depth_map.height / 2.0 + c_y - side / 2.0
    if x0 >= depth_map.width or y0 >= depth_map.height or x0 + side <= 0 or y0 + side <= 0:
        raise DegenerateInputError("bbox is invalid: the crop does not overlap the image.")

    samples = (np.arange(out_size) + 0.5) * (side / out_size)
    cols = np.floor(x0 + samples).astype(np.int64)
    rows = np.floor(y0 + samples).astype(np.int64)
    col_ok = (cols >= 0) & (cols < depth_map.width)
    row_ok = (rows >= 0) & (rows < depth_map.height)

    out = np.full((out_size, out_size), SENTINEL)
    inside = np.ix_(row_ok, col_ok)
    out[inside] = depth_map.depth[np.ix_(rows[row_ok], cols[col_ok])]
    return DepthMap(out_size, out_size, out)


__all__ = ["SENTINEL", "CROP_SIZE", "DepthMap", "write_pfm", "read_pfm", "crop_resize_depth"]
