"""Cellular Automata Settlement Generator.

Binary space partitioning splits the selection into fenced yards. Each yard
gets one building: a random rectangle with stone columns of random height at
its corners, a plank ceiling at the floored mean of the column tops, and
walls whose glass/stone pattern is grown by a cellular automaton. A doorway
(not part of the original agent) is added so buildings can be entered.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import blocks
from .manifest import Building, EditWriter, GenerationError, Rect, SettlementManifest, Yard
from .rng import SplitMix64, derive_seed
from .terrain import HeightField, compute_heightmap
from .voxel import BoundingBox, EditSet, Vec3, VoxelWorld

STONE = False
GLASS = True


@dataclass(frozen=True)
class CasgConfig:
    min_yard: int = 9
    wall_height_range: tuple[int, int] = (4, 7)
    ca_generations: int = 3
    glass_init_p: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "wall_height_range", tuple(self.wall_height_range))
        lo, hi = self.wall_height_range
        if self.min_yard < 5:
            raise ValueError("min_yard must be >= 5")
        if not 1 <= lo <= hi:
            raise ValueError(f"wall_height_range {self.wall_height_range} is empty or non-positive")
        if self.ca_generations < 0:
            raise ValueError("ca_generations must be >= 0")
        if not 0.0 <= self.glass_init_p <= 1.0:
            raise ValueError("glass_init_p must lie in [0, 1]")

    @classmethod
    def from_json(cls, doc: dict) -> "CasgConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown CASG config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "CasgConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        d = asdict(self)
        d["wall_height_range"] = list(self.wall_height_range)
        return d


def bsp_partition(rect: Rect, min_size: int, seed: int) -> list[Yard]:
    """Recursively split ``rect`` across its longer side (ties split x).

    The first child's side length is drawn uniformly from the middle third
    of the side, restricted so both children keep at least ``min_size``.
    Leaves are returned depth first, lower coordinates first.
    """
    rect = Rect(*rect)
    rng = SplitMix64(seed)
    out: list[Yard] = []

    def split(r: Rect) -> None:
        along_x = r.width >= r.depth
        side = r.width if along_x else r.depth
        lo = max(min_size, -(-side // 3))
        hi = min(side - min_size, (2 * side) // 3)
        if side < 2 * min_size or lo > hi:
            out.append(Yard(r))
            return
        k = rng.randint(lo, hi)
        if along_x:
            split(Rect(r.x0, r.z0, r.x0 + k - 1, r.z1))
            split(Rect(r.x0 + k, r.z0, r.x1, r.z1))
        else:
            split(Rect(r.x0, r.z0, r.x1, r.z0 + k - 1))
            split(Rect(r.x0, r.z0 + k, r.x1, r.z1))

    split(rect)
    return out


def ca_step(grid: np.ndarray) -> np.ndarray:
    """One synchronous step: glass with >= 5 glass Moore neighbours, stone
    with <= 3, unchanged with exactly 4. Outside the grid counts as stone."""
    g = np.asarray(grid, dtype=bool)
    padded = np.pad(g, 1, constant_values=STONE).astype(np.int8)
    rows, cols = g.shape
    count = np.zeros(g.shape, dtype=np.int8)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr or dc:
                count += padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
    return np.where(count >= 5, GLASS, np.where(count <= 3, STONE, g))


def ca_walls(rng: SplitMix64, rows: int, cols: int, generations: int, glass_p: float) -> np.ndarray:
    """Random glass/stone grid (row-major draws) evolved by ``ca_step``."""
    grid = np.array([[rng.random() < glass_p for _ in range(cols)] for _ in range(rows)],
                    dtype=bool).reshape(rows, cols)
    for _ in range(generations):
        grid = ca_step(grid)
    return grid


def build_fence(yard: Yard, hf: HeightField, box: BoundingBox | None = None) -> EditSet:
    """Fence posts one block above the terrain on every perimeter cell."""
    out = EditWriter(box or hf.box)
    for x, z in yard.rect.perimeter():
        if not hf.inside(x, z):
            continue
        s = hf.at(x, z)
        if s == hf.sentinel:
            continue
        out.put(x, s + 1, z, blocks.FENCE)
    return out.edits


def ceiling_level(tops) -> int:
    """Floor of the arithmetic mean of the corner column tops."""
    return sum(tops) // len(tops)


# door data nibble is the face index
_FACES = ("north", "south", "west", "east")


def _face_cells(r: Rect, face: str) -> tuple[list[tuple[int, int]], tuple[int, int]]:
    """Non-corner cells of one wall face and its outward unit step."""
    if face == "north":
        return [(x, r.z0) for x in range(r.x0 + 1, r.x1)], (0, -1)
    if face == "south":
        return [(x, r.z1) for x in range(r.x0 + 1, r.x1)], (0, 1)
    if face == "west":
        return [(r.x0, z) for z in range(r.z0 + 1, r.z1)], (-1, 0)
    return [(r.x1, z) for z in range(r.z0 + 1, r.z1)], (1, 0)


def build_building(yard: Yard, hf: HeightField, cfg: CasgConfig, seed: int,
                   box: BoundingBox | None = None) -> tuple[EditSet, Building | None]:
    box = box or hf.box
    interior = yard.rect.shrink(2)
    if interior.width < 3 or interior.depth < 3:
        return EditSet(), None
    rng = SplitMix64(seed)
    bw = rng.randint(3, interior.width)
    bd = rng.randint(3, interior.depth)
    bx = rng.randint(interior.x0, interior.x1 - bw + 1)
    bz = rng.randint(interior.z0, interior.z1 - bd + 1)
    r = Rect(bx, bz, bx + bw - 1, bz + bd - 1)
    if any(not hf.inside(x, z) or hf.at(x, z) == hf.sentinel for x, z in r.cells()):
        return EditSet(), None
    lo, hi = cfg.wall_height_range
    corners = [(r.x0, r.z0), (r.x1, r.z0), (r.x0, r.z1), (r.x1, r.z1)]
    tops = [hf.at(x, z) + rng.randint(lo, hi) for x, z in corners]
    ceiling = ceiling_level(tops)

    out = EditWriter(box)
    faces = {}
    for face in _FACES:
        cells, step = _face_cells(r, face)
        faces[face] = (cells, step)
        if not cells:
            continue
        base = min(hf.at(x, z) for x, z in cells) + 1
        rows = ceiling - base
        if rows <= 0:
            continue
        grid = ca_walls(rng, rows, len(cells), cfg.ca_generations, cfg.glass_init_p)
        for col, (x, z) in enumerate(cells):
            for y in range(hf.at(x, z) + 1, ceiling):
                out.put(x, y, z, blocks.GLASS if grid[y - base, col] else blocks.STONE)
    for x, z in r.cells():
        out.put(x, ceiling, z, blocks.PLANKS)
    for (x, z), top in zip(corners, tops):
        for y in range(hf.at(x, z) + 1, top + 1):
            out.put(x, y, z, blocks.STONE)

    # doorway on the face whose outside ground is nearest the interior floor
    inner = sorted(hf.at(x, z) for x, z in r.shrink(1).cells())
    floor = inner[(len(inner) - 1) // 2]
    best = None
    for data, face in enumerate(_FACES):
        cells, (sx, sz) = faces[face]
        x, z = cells[(len(cells) - 1) // 2]
        ox, oz = x + sx, z + sz
        if not hf.inside(ox, oz) or hf.at(ox, oz) == hf.sentinel:
            continue
        gap = abs(hf.at(ox, oz) - floor)
        if best is None or gap < best[0]:
            best = (gap, x, z, hf.at(ox, oz), data)
    if best is None:
        return EditSet(), None
    _, dx, dz, outside, data = best
    door_y = outside + 1
    out.put(dx, door_y, dz, blocks.WOODEN_DOOR, data)
    out.put(dx, door_y + 1, dz, blocks.WOODEN_DOOR, 8)

    footprint_low = min(hf.at(x, z) for x, z in r.cells()) + 1
    bounds = BoundingBox(
        Vec3(r.x0, max(box.min.y, min(footprint_low, door_y)), r.z0),
        Vec3(r.x1, min(box.max.y, max(ceiling, max(tops), door_y + 1)), r.z1),
    )
    building = Building(bounds, Vec3(dx, door_y, dz), "casg-house",
                        [blocks.STONE, blocks.GLASS, blocks.PLANKS])
    return out.edits, building


def spawn_point(hf: HeightField) -> Vec3:
    cx, cz = hf.box.center_xz()
    s = hf.at(cx, cz)
    return Vec3(cx, max(s + 1, hf.box.min.y), cz)


def casg_generate(world: VoxelWorld, box: BoundingBox | None, cfg: CasgConfig,
                  workers: int = 1) -> tuple[EditSet, SettlementManifest]:
    box = box or world.bounds
    if not world.bounds.contains_box(box):
        raise GenerationError(f"box {box} lies outside the world {world.bounds}")
    if box.footprint < cfg.min_yard ** 2:
        raise GenerationError(
            f"box footprint {box.footprint} smaller than min_yard^2 = {cfg.min_yard ** 2}")
    hf = compute_heightmap(world, box)
    yards = bsp_partition(Rect(box.min.x, box.min.z, box.max.x, box.max.z), cfg.min_yard, cfg.seed)

    def one(item):
        index, yard = item
        fence = build_fence(yard, hf, box)
        edits, building = build_building(yard, hf, cfg, derive_seed(cfg.seed, index), box)
        return fence, edits, building

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, enumerate(yards)))
    else:
        results = [one(item) for item in enumerate(yards)]

    edits = EditSet()
    manifest = SettlementManifest(yards=yards, spawn=spawn_point(hf), box=box, generator="casg")
    for fence, building_edits, building in results:
        edits.extend(fence)
        edits.extend(building_edits)
        if building is not None:
            manifest.buildings.append(building)
    return edits, manifest
