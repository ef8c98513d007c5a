"""Terrain analysis: heightmaps, slope, material census, build sites, and a
seeded value-noise terrain synthesizer for fixtures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import blocks
from .rng import SplitMix64
from .voxel import BoundingBox, VoxelWorld

# slope marker for bottomless (sentinel) columns
UNBUILDABLE = np.iinfo(np.int32).max
CENSUS_DEPTH = 4


@dataclass
class HeightField:
    """Per-column terrain facts over a box footprint, indexed ``[x - x0, z - z0]``."""

    box: BoundingBox
    surface: np.ndarray  # int32, y of the highest solid non-foliage block
    water: np.ndarray    # bool, water above the surface
    lava: np.ndarray     # bool

    @property
    def x0(self) -> int:
        return self.box.min.x

    @property
    def z0(self) -> int:
        return self.box.min.z

    @property
    def shape(self) -> tuple[int, int]:
        return self.surface.shape

    @property
    def sentinel(self) -> int:
        return self.box.min.y - 1

    @property
    def bottomless(self) -> np.ndarray:
        return self.surface == self.sentinel

    def at(self, x: int, z: int) -> int:
        return int(self.surface[x - self.x0, z - self.z0])

    def inside(self, x: int, z: int) -> bool:
        return 0 <= x - self.x0 < self.surface.shape[0] and 0 <= z - self.z0 < self.surface.shape[1]


@dataclass(frozen=True)
class Site:
    cells: frozenset  # world (x, z) pairs, 4-connected
    area: int
    mean_slope: float
    bounds: tuple[int, int, int, int]  # x0, z0, x1, z1 inclusive
    mask: np.ndarray = field(compare=False, repr=False, hash=False, default=None)

    def to_json(self) -> dict:
        return {"area": self.area, "mean_slope": self.mean_slope, "bounds": list(self.bounds)}


def _slab(world: VoxelWorld, box: BoundingBox) -> np.ndarray:
    if not world.bounds.contains_box(box):
        raise ValueError(f"box {box} not inside world {world.bounds}")
    ox, oy, oz = world.origin
    return world.ids[box.min.y - oy:box.max.y - oy + 1,
                     box.min.z - oz:box.max.z - oz + 1,
                     box.min.x - ox:box.max.x - ox + 1]


def compute_heightmap(world: VoxelWorld, box: BoundingBox | None = None) -> HeightField:
    box = box or world.bounds
    ids = _slab(world, box)
    solid = blocks.SURFACE_LUT[ids]
    has_solid = solid.any(axis=0)
    top = ids.shape[0] - 1 - solid[::-1].argmax(axis=0)
    rel = np.where(has_solid, top, -1)
    above = np.arange(ids.shape[0])[:, None, None] > rel[None]
    water = (blocks.WATER_LUT[ids] & above).any(axis=0) & has_solid
    lava = (blocks.LAVA_LUT[ids] & above).any(axis=0) & has_solid
    surface = (rel + box.min.y).astype(np.int32)
    return HeightField(box, np.ascontiguousarray(surface.T), np.ascontiguousarray(water.T),
                       np.ascontiguousarray(lava.T))


def compute_slope(hf: HeightField) -> np.ndarray:
    """Max absolute height step to any existing 4-neighbor; sentinel
    columns get UNBUILDABLE and are ignored as neighbors."""
    h = hf.surface.astype(np.int64)
    valid = ~hf.bottomless
    slope = np.zeros(h.shape, dtype=np.int64)
    for axis in (0, 1):
        a = [slice(None), slice(None)]
        b = [slice(None), slice(None)]
        a[axis] = slice(None, -1)
        b[axis] = slice(1, None)
        a, b = tuple(a), tuple(b)
        step = np.abs(h[a] - h[b])
        step = np.where(valid[a] & valid[b], step, 0)
        slope[a] = np.maximum(slope[a], step)
        slope[b] = np.maximum(slope[b], step)
    slope[~valid] = UNBUILDABLE
    return slope.astype(np.int32)


def material_census(world: VoxelWorld, box: BoundingBox, hf: HeightField) -> dict[int, int]:
    """Non-air block counts over each surface block and the 3 beneath it."""
    ox, oy, oz = world.origin
    xs, zs = np.nonzero(~hf.bottomless)
    tops = hf.surface[xs, zs].astype(np.int64)
    lx = xs + hf.x0 - ox
    lz = zs + hf.z0 - oz
    counts = np.zeros(256, dtype=np.int64)
    for depth in range(CENSUS_DEPTH):
        ly = tops - depth - oy
        ok = (ly >= 0) & (ly < world.height)
        counts += np.bincount(world.ids[ly[ok], lz[ok], lx[ok]], minlength=256)
    counts[blocks.AIR] = 0
    return {int(i): int(counts[i]) for i in np.flatnonzero(counts)}


def find_build_sites(hf: HeightField, slope: np.ndarray, min_area: int = 25,
                     max_slope: int = 1) -> list[Site]:
    if min_area < 1 or max_slope < 0:
        raise ValueError("min_area must be >= 1 and max_slope >= 0")
    ok = (slope <= max_slope) & ~hf.water & ~hf.lava & ~hf.bottomless
    labels, n = ndimage.label(ok)
    if n == 0:
        return []
    sites = []
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    objects = ndimage.find_objects(labels)
    for label in range(1, n + 1):
        area = int(areas[label])
        if area < min_area:
            continue
        sx, sz = objects[label - 1]
        mask = labels == label
        xs, zs = np.nonzero(mask)
        cells = frozenset(zip((xs + hf.x0).tolist(), (zs + hf.z0).tolist()))
        sites.append(Site(
            cells=cells,
            area=area,
            mean_slope=float(slope[mask].mean()),
            bounds=(sx.start + hf.x0, sz.start + hf.z0, sx.stop - 1 + hf.x0, sz.stop - 1 + hf.z0),
            mask=mask,
        ))
    sites.sort(key=lambda s: (-s.area, s.bounds[0], s.bounds[1]))
    return sites


@dataclass(frozen=True)
class TerrainParams:
    height: int = 128
    base_height: int = 64
    roughness: float = 16.0  # peak deviation from base height, in blocks
    octaves: int = 4
    lattice: int = 32        # lattice spacing of the first octave
    persistence: float = 0.5
    water_level: int | None = None


def _octave_noise(rng: SplitMix64, spacing: int, width: int, length: int) -> np.ndarray:
    nx = width // spacing + 2
    nz = length // spacing + 2
    # lattice values consumed row by row: z outer, x inner
    lattice = np.array([[rng.random() for _ in range(nx)] for _ in range(nz)])
    gx = np.arange(width) / spacing
    gz = np.arange(length) / spacing
    ix = np.floor(gx).astype(int)
    iz = np.floor(gz).astype(int)
    tx = (gx - ix)[None, :]
    tz = (gz - iz)[:, None]
    v00 = lattice[iz][:, ix]
    v10 = lattice[iz][:, ix + 1]
    v01 = lattice[iz + 1][:, ix]
    v11 = lattice[iz + 1][:, ix + 1]
    top = v00 * (1 - tx) + v10 * tx
    bottom = v01 * (1 - tx) + v11 * tx
    return top * (1 - tz) + bottom * tz  # shape (length, width)


def synth_heights(seed: int, width: int, length: int, params: TerrainParams = TerrainParams()) -> np.ndarray:
    """Surface heights indexed ``[z, x]`` from multi-octave value noise."""
    rng = SplitMix64(seed)
    total = np.zeros((length, width))
    weight = 0.0
    for octave in range(params.octaves):
        spacing = max(1, params.lattice >> octave)
        amp = params.persistence ** octave
        total += amp * (2.0 * _octave_noise(rng, spacing, width, length) - 1.0)
        weight += amp
    if weight > 0:
        total /= weight
    heights = np.floor(params.base_height + params.roughness * total + 0.5).astype(np.int64)
    return np.clip(heights, 1, params.height - 2)


def synth_terrain(seed: int, width: int, length: int, params: TerrainParams = TerrainParams()) -> VoxelWorld:
    """Deterministic test terrain: stone body, grass on dry land, dirt under water."""
    if width < 16 or length < 16:
        raise ValueError("synthetic terrain needs width and length >= 16")
    if not 3 <= params.base_height + 2 <= params.height:
        raise ValueError("base_height must fit inside the world height")
    heights = synth_heights(seed, width, length, params)
    H = params.height
    world = VoxelWorld(width, H, length)
    y = np.arange(H)[:, None, None]
    h = heights[None]
    ids = np.where(y < h, blocks.STONE, blocks.AIR).astype(np.uint8)
    if params.water_level is None:
        wet = np.zeros_like(h, dtype=bool)
        level = -1
    else:
        level = min(params.water_level, H - 1)
        wet = h < level
    ids = np.where((y == h) & ~wet, blocks.GRASS, ids)
    ids = np.where((y == h) & wet, blocks.DIRT, ids)
    ids = np.where((y > h) & (y <= level) & wet, blocks.WATER, ids)
    world.ids[:] = ids
    return world


def analysis_summary(world: VoxelWorld, box: BoundingBox | None = None, min_area: int = 25,
                     max_slope: int = 1) -> dict:
    """The ``analyze`` JSON document for one box."""
    box = box or world.bounds
    hf = compute_heightmap(world, box)
    slope = compute_slope(hf)
    valid = ~hf.bottomless
    heights = hf.surface[valid]
    census = material_census(world, box, hf)
    sites = find_build_sites(hf, slope, min_area, max_slope)
    stats = ({"min": int(heights.min()), "max": int(heights.max()), "mean": float(heights.mean())}
             if heights.size else {"min": None, "max": None, "mean": None})
    return {
        "heightmap_stats": stats,
        "water_fraction": float(hf.water.mean()),
        "census": {str(k): v for k, v in sorted(census.items())},
        "sites": [s.to_json() for s in sites],
    }



def flat_world(width: int, height: int, length: int, ground: int) -> VoxelWorld:
    """Stone up to ``ground - 1`` with a grass layer at ``ground``."""
    if not 0 <= ground < height:
        raise ValueError("ground must lie inside the world height")
    world = VoxelWorld(width, height, length)
    world.ids[:ground] = blocks.STONE
    world.ids[ground] = blocks.GRASS
    return world
