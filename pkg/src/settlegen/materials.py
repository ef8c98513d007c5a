"""Building material choice from the local material census."""

from __future__ import annotations

from typing import NamedTuple

from . import blocks as b

STONE_FAMILY = frozenset({b.STONE, b.COBBLESTONE, b.STONE_BRICK, b.MOSSY_COBBLESTONE})

# census id -> the building block it can be turned into
SUPPLIES = {
    b.STONE: b.STONE,
    b.COBBLESTONE: b.COBBLESTONE,
    b.STONE_BRICK: b.STONE_BRICK,
    b.MOSSY_COBBLESTONE: b.MOSSY_COBBLESTONE,
    b.SANDSTONE: b.SANDSTONE,
    b.SAND: b.SANDSTONE,
    b.BRICK: b.BRICK,
    b.PLANKS: b.PLANKS,
    b.LOG: b.PLANKS,
}

# census id -> every block considered locally obtainable from it
DERIVABLE = {
    b.STONE: {b.STONE, b.COBBLESTONE, b.STONE_BRICK},
    b.COBBLESTONE: {b.COBBLESTONE, b.STONE, b.STONE_BRICK},
    b.STONE_BRICK: {b.STONE_BRICK},
    b.MOSSY_COBBLESTONE: {b.MOSSY_COBBLESTONE, b.COBBLESTONE},
    b.SAND: {b.SANDSTONE, b.GLASS},
    b.SANDSTONE: {b.SANDSTONE},
    b.LOG: {b.LOG, b.PLANKS},
    b.PLANKS: {b.PLANKS},
    b.GRAVEL: {b.GRAVEL},
}


def _tie_rank(block: int) -> int:
    if block in STONE_FAMILY:
        return 0
    if block == b.SANDSTONE:
        return 1
    if block == b.BRICK:
        return 2
    return 3


class Materials(NamedTuple):
    wall: int
    roof: int
    foundation: int


WOOD = frozenset({b.LOG, b.PLANKS})


def choose_materials(census: dict[int, int], role: str = "house") -> Materials:
    """Wall from the most plentiful structural supply (stone family wins
    ties, then sandstone, brick, planks); cobblestone foundations wherever
    stone is present; planks fallback when nothing structural is around.
    Roofs are planks where wood grows, else the wall material."""
    totals: dict[int, int] = {}
    for block, count in census.items():
        supplied = SUPPLIES.get(block)
        if supplied is not None and count > 0:
            totals[supplied] = totals.get(supplied, 0) + count
    if not totals:
        return Materials(b.PLANKS, b.LOG, b.PLANKS)
    wall = min(totals, key=lambda m: (-totals[m], _tie_rank(m), m))
    stone_present = any(census.get(s, 0) > 0 for s in STONE_FAMILY)
    foundation = b.COBBLESTONE if stone_present else wall
    if role == "hall" and wall in STONE_FAMILY:
        wall = b.STONE_BRICK
    wood = any(census.get(w, 0) > 0 for w in WOOD)
    if wall == b.PLANKS:
        roof = b.LOG if census.get(b.LOG, 0) > 0 else (b.COBBLESTONE if stone_present else b.PLANKS)
    else:
        roof = b.PLANKS if wood else wall
    return Materials(wall, roof, foundation)


def local_materials(census: dict[int, int]) -> set[int]:
    """Block ids that count as locally available for a census."""
    out = {block for block, count in census.items() if count > 0}
    for block in list(out):
        out |= DERIVABLE.get(block, set())
    return out
