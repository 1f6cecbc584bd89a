from __future__ import annotations

from typing import Tuple

import numpy as np

from ..errors import DimensionMismatchError, InvariantViolation
from ..rasterizer import CROP_SIZE, SENTINEL

BLOCK_SIZE = 16
BLOCKS_PER_SIDE = CROP_SIZE // BLOCK_SIZE
BLOCK_COUNT = BLOCKS_PER_SIDE * BLOCKS_PER_SIDE


def masked_block_count(ratio: float) -> int:
    """round(ratio * 256), half to even."""
    return int(round(ratio * BLOCK_COUNT))


def apply_block_mask(grid: np.ndarray, ratio: float, seed: int, fill: float = SENTINEL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Blank a random subset of the 16x16 blocks of a 256x256 grid.

    Block b covers rows 16 * (b // 16) and columns 16 * (b % 16) onward.

    :param grid: 256 x 256 depth map or image channel.
    :param ratio: fraction of the 256 blocks to blank, 0 <= ratio <= 1.
    :param seed: selection seed.
    :param fill: value written into masked blocks (depth background by default).
    :return: (masked copy, sorted indices of the masked blocks)
    """
    grid = np.asarray(grid)
    if grid.shape[:2] != (CROP_SIZE, CROP_SIZE):
        raise DimensionMismatchError(f"grid is invalid: expected {CROP_SIZE} x {CROP_SIZE}, got {grid.shape[:2]}.")
    if not 0.0 <= ratio <= 1.0:
        raise InvariantViolation(f"ratio is invalid: must lie in [0, 1], got {ratio!r}.")

    masked = np.array(grid, dtype=np.result_type(grid.dtype, np.float64) if np.isinf(fill) else grid.dtype)
    count = masked_block_count(ratio)
    if count == 0:
        return masked, np.zeros(0, dtype=np.int64)
    blocks = np.sort(np.random.default_rng(seed).choice(BLOCK_COUNT, size=count, replace=False)).astype(np.int64)
    view = masked.reshape(BLOCKS_PER_SIDE, BLOCK_SIZE, BLOCKS_PER_SIDE, BLOCK_SIZE, *grid.shape[2:])
    view[blocks // BLOCKS_PER_SIDE, :, blocks % BLOCKS_PER_SIDE] = fill
    return masked, blocks


__all__ = ["BLOCK_SIZE", "BLOCK_COUNT", "masked_block_count", "apply_block_mask"]
