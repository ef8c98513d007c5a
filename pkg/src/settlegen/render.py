"""Top-down PPM renders for eyeballing maps."""

from __future__ import annotations

import numpy as np

from . import blocks
from .voxel import VoxelWorld

UNKNOWN = (128, 128, 128)
EMPTY = (0, 0, 0)

COLORS = {
    blocks.STONE: (125, 125, 125),
    blocks.GRASS: (95, 159, 53),
    blocks.DIRT: (134, 96, 67),
    blocks.COBBLESTONE: (110, 110, 110),
    blocks.PLANKS: (157, 128, 79),
    blocks.BEDROCK: (40, 40, 40),
    blocks.WATER_FLOWING: (64, 64, 255),
    blocks.WATER: (64, 64, 255),
    blocks.LAVA_FLOWING: (230, 90, 10),
    blocks.LAVA: (230, 90, 10),
    blocks.SAND: (219, 211, 160),
    blocks.GRAVEL: (136, 126, 126),
    blocks.LOG: (102, 81, 51),
    blocks.LEAVES: (60, 120, 40),
    blocks.GLASS: (200, 230, 240),
    blocks.SANDSTONE: (216, 203, 155),
    blocks.TALL_GRASS: (80, 140, 50),
    blocks.BRICK: (150, 74, 58),
    blocks.MOSSY_COBBLESTONE: (90, 120, 90),
    blocks.TORCH: (255, 220, 90),
    blocks.WOODEN_DOOR: (140, 105, 60),
    blocks.SNOW_LAYER: (240, 250, 250),
    blocks.FENCE: (120, 90, 55),
    blocks.STONE_BRICK: (122, 122, 122),
    blocks.LEAVES2: (70, 110, 40),
}

_TABLE = np.array([COLORS.get(i, UNKNOWN) for i in range(256)], dtype=np.float64)


def top_view(world: VoxelWorld) -> np.ndarray:
    """RGB uint8 image ``[z, x, 3]`` colored by the highest non-air block."""
    ids = world.ids
    solid = ids != blocks.AIR
    has = solid.any(axis=0)
    top = ids.shape[0] - 1 - solid[::-1].argmax(axis=0)
    top = np.where(has, top, 0)
    block = np.take_along_axis(ids, top[None], axis=0)[0]
    if has.any():
        lo, hi = top[has].min(), top[has].max()
    else:
        lo = hi = 0
    shade = 0.6 + 0.4 * (top - lo) / (hi - lo + 1)
    rgb = _TABLE[block] * shade[..., None]
    rgb[~has] = EMPTY
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)


def to_ppm(image: np.ndarray) -> bytes:
    h, w, _ = image.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def write_ppm(world: VoxelWorld, path) -> None:
    data = to_ppm(top_view(world))
    with open(path, "wb") as fh:
        fh.write(data)
