"""Legacy numeric block ids and the lookup tables built from them."""

import numpy as np

AIR = 0
STONE = 1
GRASS = 2
DIRT = 3
COBBLESTONE = 4
PLANKS = 5
SAPLING = 6
BEDROCK = 7
WATER_FLOWING = 8
WATER = 9
LAVA_FLOWING = 10
LAVA = 11
SAND = 12
GRAVEL = 13
LOG = 17
LEAVES = 18
GLASS = 20
SANDSTONE = 24
TALL_GRASS = 31
DEAD_BUSH = 32
DANDELION = 37
ROSE = 38
BROWN_MUSHROOM = 39
RED_MUSHROOM = 40
BRICK = 45
MOSSY_COBBLESTONE = 48
TORCH = 50
FIRE = 51
WHEAT = 59
WOODEN_DOOR = 64
SNOW_LAYER = 78
SUGAR_CANE = 83
FENCE = 85
STONE_BRICK = 98
VINE = 106
LILY_PAD = 111
LEAVES2 = 161
DOUBLE_PLANT = 175

WATER_IDS = frozenset({WATER_FLOWING, WATER})
LAVA_IDS = frozenset({LAVA_FLOWING, LAVA})

# never a terrain surface: air-likes, liquids, plants and foliage
NON_SURFACE = frozenset({
    AIR, SAPLING, WATER_FLOWING, WATER, LAVA_FLOWING, LAVA, LEAVES, TALL_GRASS,
    DEAD_BUSH, DANDELION, ROSE, BROWN_MUSHROOM, RED_MUSHROOM, TORCH, FIRE, WHEAT,
    SNOW_LAYER, SUGAR_CANE, VINE, LILY_PAD, LEAVES2, DOUBLE_PLANT,
})

# an avatar can occupy these cells
PASSABLE = frozenset({AIR, TORCH, WOODEN_DOOR})

# an avatar can stand on top of these (leaves included, doors and liquids not)
NON_SUPPORT = (NON_SURFACE - {LEAVES, LEAVES2}) | {WOODEN_DOOR}


def lut(ids) -> np.ndarray:
    table = np.zeros(256, dtype=bool)
    table[list(ids)] = True
    return table


SURFACE_LUT = ~lut(NON_SURFACE)
WATER_LUT = lut(WATER_IDS)
LAVA_LUT = lut(LAVA_IDS)
PASSABLE_LUT = lut(PASSABLE)
SUPPORT_LUT = ~lut(NON_SUPPORT)
