"""Terrain-adaptive settlement generator.

Pipeline: analyze the box, rank flat dry build sites, pack buildings into
them with grade-matched foundations and entrances, connect every entrance
to the spawn point with terrain-following A* roads (bridging water), then
light the roads with torches.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import ndimage

from . import blocks
from .kernels import grid_reach
from .manifest import Building, EditWriter, GenerationError, Rect, RoadPlan, SettlementManifest
from .materials import Materials, choose_materials
from .pathfinding import astar
from .rng import SplitMix64, derive_seed
from .terrain import (UNBUILDABLE, HeightField, Site, compute_heightmap, compute_slope,
                      find_build_sites, material_census)
from .voxel import BoundingBox, EditSet, Vec3, VoxelWorld


@dataclass(frozen=True)
class AdaptiveConfig:
    building_count: int = 8
    max_slope: int = 1
    min_site_area: int = 49
    building_size: tuple[int, int] = (5, 9)
    wall_height_range: tuple[int, int] = (4, 6)
    spacing: int = 2
    base_cost: float = 1.0
    slope_penalty: float = 4.0
    water_penalty: float = 25.0
    w_area: float = 1.0
    w_slope: float = 1.0
    w_water: float = 0.5
    torch_spacing: int = 6
    candidates: int = 48
    earthwork_step: int = 3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "building_size", tuple(self.building_size))
        object.__setattr__(self, "wall_height_range", tuple(self.wall_height_range))
        if self.building_count < 1:
            raise ValueError("building_count must be >= 1")
        weights = (self.base_cost, self.slope_penalty, self.water_penalty,
                   self.w_area, self.w_slope, self.w_water)
        if min(weights) < 0:
            raise ValueError("cost and score weights must be >= 0")
        lo, hi = self.building_size
        if not 5 <= lo <= hi:
            raise ValueError("building_size must satisfy 5 <= min <= max")
        wlo, whi = self.wall_height_range
        if not 3 <= wlo <= whi:
            raise ValueError("wall_height_range must satisfy 3 <= min <= max")
        if self.max_slope < 0 or self.spacing < 0 or self.torch_spacing < 1 or self.candidates < 1:
            raise ValueError("max_slope, spacing >= 0; torch_spacing, candidates >= 1")
        if self.earthwork_step < 1:
            raise ValueError("earthwork_step must be >= 1")

    @classmethod
    def from_json(cls, doc: dict) -> "AdaptiveConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown adaptive config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "AdaptiveConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


# -- site ranking -----------------------------------------------------------

def near_water(site: Site, hf: HeightField) -> bool:
    return bool((ndimage.binary_dilation(site.mask) & hf.water).any())


def site_score(site: Site, hf: HeightField, cfg: AdaptiveConfig) -> float:
    bonus = cfg.w_water if near_water(site, hf) else 0.0
    return cfg.w_area * math.log(site.area) - cfg.w_slope * site.mean_slope + bonus


def score_sites(sites: list[Site], hf: HeightField, cfg: AdaptiveConfig) -> list[tuple[float, Site]]:
    """Sites with their scores, best first; ties broken by site bounds."""
    scored = [(site_score(s, hf, cfg), s) for s in sites]
    scored.sort(key=lambda p: (-p[0], p[1].bounds))
    return scored


# -- routing ----------------------------------------------------------------

@dataclass
class RoutingGrid:
    hf: HeightField
    cost: np.ndarray     # float64 [x, z]; inf = impassable
    heights: np.ndarray  # int64 walking surface: terrain, or water top on water
    water: np.ndarray

    def local(self, x: int, z: int) -> tuple[int, int]:
        return x - self.hf.x0, z - self.hf.z0

    def world(self, i: int, j: int) -> tuple[int, int]:
        return i + self.hf.x0, j + self.hf.z0


def water_top(world: VoxelWorld, hf: HeightField) -> np.ndarray:
    """Per column, the y of the highest water block (surface y where dry)."""
    box = hf.box
    ox, oy, oz = world.origin
    ids = world.ids[box.min.y - oy:box.max.y - oy + 1,
                    box.min.z - oz:box.max.z - oz + 1,
                    box.min.x - ox:box.max.x - ox + 1]
    wet = blocks.WATER_LUT[ids]
    top = ids.shape[0] - 1 - wet[::-1].argmax(axis=0) + box.min.y
    top = np.ascontiguousarray(top.T)
    return np.where(hf.water, top, hf.surface).astype(np.int64)


def routing_grid(hf: HeightField, slope: np.ndarray, cfg: AdaptiveConfig,
                 heights: np.ndarray | None = None) -> RoutingGrid:
    """Cell cost = base + slope_penalty*slope + water_penalty*water, with
    bottomless and lava columns impassable. ``heights`` is the walking
    surface (see ``water_top``); it defaults to the terrain surface."""
    s = np.where(slope == UNBUILDABLE, 0, slope).astype(np.float64)
    cost = cfg.base_cost + cfg.slope_penalty * s + cfg.water_penalty * hf.water
    cost[hf.bottomless | hf.lava] = np.inf
    if heights is None:
        heights = hf.surface
    return RoutingGrid(hf, cost, np.ascontiguousarray(heights, dtype=np.int64), hf.water.copy())


def _road_heights(path_cells, grid: RoutingGrid, heights: np.ndarray, fixed: dict) -> list[int]:
    """Road block y per path cell on a path found with unit steps.

    Land cells keep their height. Each water run gets one plank deck level
    with the higher bank, capped one above the lower bank; if that would
    break the one-block step rule, or the run crosses an existing road,
    the deck follows the water surface cell by cell instead.
    """
    n = len(path_cells)
    ys = [int(heights[c]) for c in path_cells]
    wet = [bool(grid.water[c]) for c in path_cells]
    k = 0
    while k < n:
        if not wet[k]:
            k += 1
            continue
        end = k
        while end < n and wet[end]:
            end += 1
        banks = [ys[m] for m in (k - 1, end) if 0 <= m < n]
        if banks and not any(path_cells[m] in fixed for m in range(k, end)):
            deck = min(max(banks), min(banks) + 1)
            if all(abs(deck - b) <= 1 for b in banks):
                ys[k:end] = [deck] * (end - k)
        k = end
    return ys


def regrade(targets, fixed: dict[int, int] | None = None) -> list[int] | None:
    """Heights ``y`` with ``|y[k] - y[k+1]| <= 1`` minimizing the total
    ``|y[k] - targets[k]|``, with ``y[k] = fixed[k]`` where given.

    Dynamic programming over the height range; ties go to the lower
    height. Returns None when the constraints cannot be met.
    """
    t = np.asarray(targets, dtype=np.int64)
    if t.size == 0:
        return []
    fixed = fixed or {}
    values = list(t) + list(fixed.values())
    ys = np.arange(min(values), max(values) + 1)
    R = ys.size

    def local_cost(k):
        c = np.abs(ys - t[k]).astype(np.float64)
        if k in fixed:
            c = np.where(ys == fixed[k], c, np.inf)
        return c

    total = local_cost(0)
    back = []
    for k in range(1, t.size):
        pad = np.full(R + 2, np.inf)
        pad[1:-1] = total
        options = np.vstack([pad[:-2], pad[1:-1], pad[2:]])  # from y-1, y, y+1
        arg = options.argmin(axis=0)
        back.append(arg)
        total = options[arg, np.arange(R)] + local_cost(k)
    if not np.isfinite(total).any():
        return None
    r = int(total.argmin())
    out = [r]
    for arg in reversed(back):
        r = r + int(arg[r]) - 1
        out.append(r)
    out.reverse()
    return [int(ys[r]) for r in out]


def plan_roads(buildings: list[Building], hf: HeightField, cfg: AdaptiveConfig,
               grid: RoutingGrid | None = None, hub: tuple[int, int] | None = None
               ) -> tuple[list[RoadPlan], list[int]]:
    """Greedy spanning roads between building entrances.

    In manifest order, each entrance joins the nearest already-connected
    node (Manhattan distance, earlier node on ties) by A*. The first node
    is ``hub`` (world x, z) when given, else the first entrance. Building
    footprints are impassable. Returns the plans and the indices of
    buildings whose entrance could not be reached.
    """
    if grid is None:
        grid = routing_grid(hf, compute_slope(hf), cfg)
    cost = grid.cost.copy()
    for b in buildings:
        r = b.rect
        cost[r.x0 - hf.x0:r.x1 - hf.x0 + 1, r.z0 - hf.z0:r.z1 - hf.z0 + 1] = np.inf
    exteriors = [grid.local(*exterior_of(b)) for b in buildings]
    heights = grid.heights.copy()
    # entrance fronts keep their ground height so doors stay at grade
    fixed = {e: int(heights[e]) for e in exteriors}
    order = list(range(len(buildings)))
    nodes = []
    if hub is not None:
        nodes.append(grid.local(*hub))
    elif exteriors:
        nodes.append(exteriors[0])
        order = order[1:]
    roads: list[RoadPlan] = []
    unreachable: list[int] = []
    for index in order:
        target = exteriors[index]
        nearest = min(range(len(nodes)),
                      key=lambda k: (abs(nodes[k][0] - target[0]) + abs(nodes[k][1] - target[1]), k))
        path = astar(cost, target, nodes[nearest], heights, 1)
        ys = None
        if path is not None:
            ys = _road_heights(path.cells, grid, heights, fixed)
        elif cfg.earthwork_step > 1:
            # no walkable route: take steeper steps and cut or fill the road to grade
            path = astar(cost, target, nodes[nearest], heights, cfg.earthwork_step)
            if path is not None:
                pins = {k: fixed[c] for k, c in enumerate(path.cells) if c in fixed}
                ys = regrade([heights[c] for c in path.cells], pins)
        if ys is None:
            unreachable.append(index)
            continue
        nodes.append(target)
        cells, bridge, ids = [], [], []
        for (i, j), y in zip(path.cells, ys):
            fixed[(i, j)] = y
            heights[i, j] = y
            x, z = grid.world(i, j)
            wet = bool(grid.water[i, j])
            cells.append(Vec3(x, y, z))
            bridge.append(wet)
            ids.append(blocks.PLANKS if wet else blocks.GRAVEL)
        roads.append(RoadPlan(cells, bridge, ids))
    return roads, unreachable


# -- buildings --------------------------------------------------------------

def floor_level(rect: Rect, hf: HeightField) -> int:
    heights = [hf.at(x, z) for x, z in rect.cells()]
    return int(math.floor(np.median(heights)))


def _outward(rect: Rect, x: int, z: int) -> tuple[int, int] | None:
    on_x = x in (rect.x0, rect.x1)
    on_z = z in (rect.z0, rect.z1)
    if on_x and on_z:
        return None
    if z == rect.z0:
        return (0, -1)
    if z == rect.z1:
        return (0, 1)
    if x == rect.x0:
        return (-1, 0)
    if x == rect.x1:
        return (1, 0)
    return None


def choose_entrance(rect: Rect, floor: int, hf: HeightField, allowed: np.ndarray | None = None):
    """Non-corner wall cell whose outside ground is closest to ``floor``.

    Returns ``(gap, door_xz, outside_xz)`` or None if no outside cell lies
    within one block of the floor.
    """
    best = None
    for x, z in rect.perimeter():
        step = _outward(rect, x, z)
        if step is None:
            continue
        ox, oz = x + step[0], z + step[1]
        if not hf.inside(ox, oz):
            continue
        i, j = ox - hf.x0, oz - hf.z0
        if hf.bottomless[i, j] or hf.water[i, j] or hf.lava[i, j]:
            continue
        if allowed is not None and not allowed[i, j]:
            continue
        gap = abs(hf.at(ox, oz) - floor)
        if best is None or gap < best[0]:
            best = (gap, (x, z), (ox, oz))
    if best is None or best[0] > 1:
        return None
    return best


def place_adaptive_building(rect: Rect, hf: HeightField, materials: Materials, seed: int,
                            role: str = "house", cfg: AdaptiveConfig = AdaptiveConfig(),
                            allowed: np.ndarray | None = None, box: BoundingBox | None = None
                            ) -> tuple[EditSet, Building | None]:
    """Grade-matched building on ``rect``.

    The floor sits at the median terrain height; lower columns get a
    foundation up to the floor, higher ones are dug out. The doorway bottom
    is exactly one block above the outside ground, which is itself within
    one block of the floor.
    """
    box = box or hf.box
    rect = Rect(*rect)
    if rect.width < 5 or rect.depth < 5:
        return EditSet(), None
    cells = list(rect.cells())
    if any(not hf.inside(x, z) or hf.at(x, z) == hf.sentinel for x, z in cells):
        return EditSet(), None
    floor = floor_level(rect, hf)
    entrance = choose_entrance(rect, floor, hf, allowed)
    if entrance is None:
        return EditSet(), None
    _, (dx, dz), (ox, oz) = entrance
    rng = SplitMix64(seed)
    # walls tall enough that the highest ground stays under the roof
    wall_h = max(rng.randint(*cfg.wall_height_range), max(hf.at(x, z) for x, z in cells) - floor)
    roof_y = floor + wall_h + 1
    wall, roof, foundation = materials
    out = EditWriter(box)
    for x, z in cells:
        s = hf.at(x, z)
        for y in range(s + 1, floor):
            out.put(x, y, z, foundation)
        out.put(x, floor, z, foundation)
        edge = x in (rect.x0, rect.x1) or z in (rect.z0, rect.z1)
        corner = x in (rect.x0, rect.x1) and z in (rect.z0, rect.z1)
        for y in range(floor + 1, floor + wall_h + 1):
            if not edge:
                out.put(x, y, z, blocks.AIR)
            elif corner:
                out.put(x, y, z, foundation)
            elif y == floor + 2 and (x + z) % 3 == 0 and abs(x - dx) + abs(z - dz) > 1:
                out.put(x, y, z, blocks.GLASS)
            else:
                out.put(x, y, z, wall)
        out.put(x, roof_y, z, roof)
    door_y = hf.at(ox, oz) + 1
    facing = {(0, -1): 0, (0, 1): 1, (-1, 0): 2, (1, 0): 3}[(ox - dx, oz - dz)]
    out.put(dx, door_y, dz, blocks.WOODEN_DOOR, facing)
    out.put(dx, door_y + 1, dz, blocks.WOODEN_DOOR, 8)
    cx, cz = (rect.x0 + rect.x1) // 2, (rect.z0 + rect.z1) // 2
    out.put(cx, floor + 1, cz, blocks.TORCH)
    low = min(floor, min(hf.at(x, z) for x, z in cells) + 1)
    bounds = BoundingBox(Vec3(rect.x0, max(low, box.min.y), rect.z0),
                         Vec3(rect.x1, min(roof_y, box.max.y), rect.z1))
    return out.edits, Building(bounds, Vec3(dx, door_y, dz), role, [wall, roof, foundation])


def exterior_of(building: Building) -> tuple[int, int]:
    """The outside (x, z) cell in front of a building's entrance."""
    rect = building.rect
    x, _, z = building.entrance
    step = _outward(rect, x, z)
    if step is None:
        raise ValueError(f"entrance {building.entrance} is not on a wall of {rect}")
    return x + step[0], z + step[1]


def _window_fits(mask: np.ndarray, w: int, d: int) -> np.ndarray:
    """``fits[i, j]`` is True when ``mask[i:i+w, j:j+d]`` is all True."""
    nx, nz = mask.shape
    if w > nx or d > nz:
        return np.zeros((0, 0), dtype=bool)
    sat = np.zeros((nx + 1, nz + 1), dtype=np.int64)
    sat[1:, 1:] = mask.astype(np.int64).cumsum(0).cumsum(1)
    total = sat[w:, d:] - sat[:-w, d:] - sat[w:, :-d] + sat[:-w, :-d]
    return total == w * d


# -- pipeline ---------------------------------------------------------------

@dataclass
class _Plan:
    rect: Rect
    role: str
    seed: int
    exterior: tuple[int, int]


def _role(rect: Rect, hf: HeightField, index: int) -> str:
    if index == 0:
        return "hall"
    i0, j0 = rect.x0 - hf.x0, rect.z0 - hf.z0
    window = hf.water[max(0, i0 - 3):i0 + rect.width + 3, max(0, j0 - 3):j0 + rect.depth + 3]
    return "farm-plot" if window.any() else "house"


def _pack(hf: HeightField, ranked, grid: RoutingGrid, hub_local, cfg: AdaptiveConfig) -> list[_Plan]:
    nx, nz = hf.shape
    passable = np.isfinite(grid.cost)
    footprints = np.zeros((nx, nz), dtype=bool)
    blocked = np.zeros((nx, nz), dtype=bool)
    hi, hj = hub_local
    blocked[max(0, hi - 2):hi + 3, max(0, hj - 2):hj + 3] = True
    reach = grid_reach(passable, grid.heights, cfg.earthwork_step, hub_local)
    plans: list[_Plan] = []
    exteriors: list[tuple[int, int]] = []
    lo, top = cfg.building_size
    for index in range(cfg.building_count):
        seed = derive_seed(cfg.seed, index)
        rng = SplitMix64(seed ^ 0x5EED)
        grow = 2 if index == 0 else 0
        sizes = [(rng.randint(lo, top) + grow, rng.randint(lo, top) + grow), (lo, lo)]
        placed = None
        for w, d in sizes:
            for _, site in ranked:
                placed = _try_site(site.mask, w, d, hf, grid, passable, footprints, blocked,
                                   reach, exteriors, hub_local, cfg)
                if placed is not None:
                    break
            if placed is not None:
                break
        if placed is None:
            break
        rect, ext, reach = placed
        i0, j0 = rect.x0 - hf.x0, rect.z0 - hf.z0
        footprints[i0:i0 + rect.width, j0:j0 + rect.depth] = True
        s = cfg.spacing
        blocked[max(0, i0 - s):i0 + rect.width + s, max(0, j0 - s):j0 + rect.depth + s] = True
        exteriors.append(ext)
        plans.append(_Plan(rect, _role(rect, hf, index), seed, ext))
    return plans


def _try_site(site_mask, w, d, hf, grid, passable, footprints, blocked, reach, exteriors,
              hub_local, cfg):
    ok = _window_fits(site_mask & ~blocked, w, d)
    fi, fj = np.nonzero(ok)
    if fi.size == 0:
        return None
    dist = np.abs(fi + w // 2 - hub_local[0]) + np.abs(fj + d // 2 - hub_local[1])
    order = np.lexsort((fj, fi, dist))[:cfg.candidates]
    for k in order.tolist():
        i0, j0 = int(fi[k]), int(fj[k])
        rect = Rect(i0 + hf.x0, j0 + hf.z0, i0 + hf.x0 + w - 1, j0 + hf.z0 + d - 1)
        patch = hf.surface[i0:i0 + w, j0:j0 + d]
        if int(patch.max()) - int(patch.min()) > cfg.wall_height_range[1]:
            continue
        floor = floor_level(rect, hf)
        found = choose_entrance(rect, floor, hf, reach)
        if found is None:
            continue
        ext = found[2]
        trial = footprints.copy()
        trial[i0:i0 + w, j0:j0 + d] = True
        new_reach = grid_reach(passable & ~trial, grid.heights, cfg.earthwork_step, hub_local)
        if all(new_reach[x - hf.x0, z - hf.z0] for x, z in exteriors + [ext]):
            return rect, ext, new_reach
    return None


def adaptive_generate(world: VoxelWorld, box: BoundingBox | None, cfg: AdaptiveConfig,
                      workers: int = 1) -> tuple[EditSet, SettlementManifest]:
    box = box or world.bounds
    if not world.bounds.contains_box(box):
        raise GenerationError(f"box {box} lies outside the world {world.bounds}")
    hf = compute_heightmap(world, box)
    slope = compute_slope(hf)
    census = material_census(world, box, hf)
    sites = find_build_sites(hf, slope, cfg.min_site_area, cfg.max_slope)
    if not sites:
        valid = ~hf.bottomless
        raise GenerationError(
            "no buildable site: "
            f"{int(valid.sum())} columns with ground, water fraction {float(hf.water.mean()):.3f}, "
            f"{int(((slope <= cfg.max_slope) & valid).sum())} columns with slope <= {cfg.max_slope}, "
            f"min_site_area {cfg.min_site_area}")
    ranked = score_sites(sites, hf, cfg)
    grid = routing_grid(hf, slope, cfg, water_top(world, hf))
    cx, cz = box.center_xz()
    hub_local = grid.local(cx, cz)
    plans = _pack(hf, ranked, grid, hub_local, cfg)

    def build(plan: _Plan):
        mats = choose_materials(census, plan.role)
        ext_mask = np.zeros(hf.shape, dtype=bool)
        ext_mask[plan.exterior[0] - hf.x0, plan.exterior[1] - hf.z0] = True
        return place_adaptive_building(plan.rect, hf, mats, plan.seed, plan.role, cfg, ext_mask, box)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            built = list(pool.map(build, plans))
    else:
        built = [build(p) for p in plans]

    built = [(e, b) for e, b in built if b is not None]
    buildings = [b for _, b in built]
    roads, unreachable = plan_roads(buildings, hf, cfg, grid, (cx, cz))

    out = EditWriter(box)
    manifest = SettlementManifest(box=box, generator="adaptive", unconnected=unreachable)
    for edits, building in built:
        out.edits.extend(edits)
    manifest.buildings = buildings

    ox, oy, oz = world.origin

    def clear(x, y0, y1, z):
        for y in range(max(y0, box.min.y), min(y1, box.max.y) + 1):
            if world.ids[y - oy, z - oz, x - ox] != blocks.AIR:
                out.put(x, y, z, blocks.AIR)

    for road in roads:
        for cell, block in zip(road.cells, road.blocks):
            i, j = grid.local(cell.x, cell.z)
            ground = int(grid.heights[i, j])
            if not grid.water[i, j]:
                for y in range(ground + 1, cell.y):
                    out.put(cell.x, y, cell.z, blocks.DIRT)
            out.put(cell.x, cell.y, cell.z, block)
            clear(cell.x, cell.y + 1, max(cell.y + 2, ground), cell.z)
    manifest.roads = roads

    hub_y = None
    for road in roads:
        end = road.cells[-1]
        if (end.x, end.z) == (cx, cz):
            hub_y = end.y
    if hub_y is None:
        i, j = hub_local
        hub_y = int(grid.heights[i, j]) if not hf.bottomless[i, j] else box.min.y - 1
    clear(cx, hub_y + 1, box.max.y, cz)
    manifest.spawn = Vec3(cx, hub_y + 1, cz)

    for road in roads:
        for k, cell in enumerate(road.cells):
            if k % cfg.torch_spacing == 0:
                out.put(cell.x, cell.y + 1, cell.z, blocks.TORCH)
    for index in unreachable:
        x, z = exterior_of(buildings[index])
        out.put(x, hf.at(x, z) + 1, z, blocks.TORCH)
    return out.edits, manifest
