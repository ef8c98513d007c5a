"""Automated settlement evaluation.

Direct metrics read the before/after worlds and the manifest; simulation
metrics walk an avatar graph and propagate block light. The metrics are
folded into a four-category 0-10 scorecard.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import blocks
from .kernels import light_bfs, walk_bfs
from .manifest import SettlementManifest
from .materials import local_materials
from .terrain import compute_heightmap, material_census
from .voxel import BoundingBox, ShapeError, VoxelWorld

TORCH_EMISSION = 14
SPAWN_LIGHT = 8      # mobs spawn on standing cells darker than this
MAX_ROLES = 3

CATEGORIES = ("adaptability", "functionality", "narrative", "aesthetics")

DEFAULT_WEIGHTS = {
    "adaptability": {"terrain_impact": 0.5, "entrance_at_grade": 0.3, "material_localness": 0.2},
    "functionality": {"accessibility": 0.5, "spawn_safety": 0.3, "road_grade": 0.2},
    "narrative": {"role_variety": 1.0},
    "aesthetics": {"diversity_in_band": 0.6, "completeness": 0.4},
}

UNIMPLEMENTED = [
    "easy way to get food: hunger and food mechanics are outside the simplified model",
    "narrative and aesthetics are computable proxies only, not judge-equivalent",
]


class MetricError(ValueError):
    pass


# -- walking ----------------------------------------------------------------

def standing_mask(world: VoxelWorld) -> np.ndarray:
    """``[y, z, x]``: an avatar fits here (two passable cells) on support."""
    passable = blocks.PASSABLE_LUT[world.ids]
    support = blocks.SUPPORT_LUT[world.ids]
    ok = passable.copy()
    ok[:-1] &= passable[1:]       # the top layer has open sky above it
    ok[0] = False                 # nothing to stand on below the world
    ok[1:] &= support[:-1]
    return ok


def spawn_state(world: VoxelWorld, standing: np.ndarray, spawn) -> tuple[int, int, int] | None:
    """Local standing state in the spawn column: the highest one."""
    lx = spawn[0] - world.origin.x
    lz = spawn[2] - world.origin.z
    if not (0 <= lx < world.width and 0 <= lz < world.length):
        return None
    ys = np.flatnonzero(standing[:, lz, lx])
    if ys.size == 0:
        return None
    return int(lx), int(ys[-1]), int(lz)


@dataclass
class Accessibility:
    score: float
    reachable: list[bool] = field(default_factory=list)
    mean_path_length: float | None = None


def accessibility_score(after: VoxelWorld, manifest: SettlementManifest) -> Accessibility:
    """Fraction of building entrances reachable on foot from spawn."""
    if not manifest.buildings:
        return Accessibility(0.0)
    standing = standing_mask(after)
    start = spawn_state(after, standing, manifest.spawn) if manifest.spawn is not None else None
    if start is None:
        return Accessibility(0.0, [False] * len(manifest.buildings))
    dist = walk_bfs(standing, start)
    reachable, lengths = [], []
    for b in manifest.buildings:
        x, y, z = (b.entrance[i] - after.origin[i] for i in range(3))
        ok = 0 <= x < after.width and 0 <= y < after.height and 0 <= z < after.length
        d = int(dist[y, z, x]) if ok else -1
        reachable.append(d >= 0)
        if d >= 0:
            lengths.append(d)
    mean = float(np.mean(lengths)) if lengths else None
    return Accessibility(len(lengths) / len(reachable), reachable, mean)


# -- light ------------------------------------------------------------------

@dataclass
class LightField:
    box: BoundingBox
    level: np.ndarray  # uint8 [y, z, x] over the box

    def at(self, x: int, y: int, z: int) -> int:
        m = self.box.min
        return int(self.level[y - m.y, z - m.z, x - m.x])


def _box_slice(world: VoxelWorld, box: BoundingBox):
    ox, oy, oz = world.origin
    return (slice(box.min.y - oy, box.max.y - oy + 1),
            slice(box.min.z - oz, box.max.z - oz + 1),
            slice(box.min.x - ox, box.max.x - ox + 1))


def light_field(after: VoxelWorld, box: BoundingBox | None = None) -> LightField:
    """Torch light spread 6-connected through passable cells inside ``box``."""
    box = box or after.bounds
    if not after.bounds.contains_box(box):
        raise ValueError(f"box {box} not inside world {after.bounds}")
    ids = after.ids[_box_slice(after, box)]
    level = light_bfs(blocks.PASSABLE_LUT[ids], ids == blocks.TORCH, TORCH_EMISSION)
    return LightField(box, level)


def settlement_rect(manifest: SettlementManifest):
    """(x0, z0, x1, z1) hull of building bounds and road cells, or None."""
    xs, zs = [], []
    for b in manifest.buildings:
        xs += [b.bounds.min.x, b.bounds.max.x]
        zs += [b.bounds.min.z, b.bounds.max.z]
    for r in manifest.roads:
        xs += [c.x for c in r.cells]
        zs += [c.z for c in r.cells]
    if not xs:
        return None
    return min(xs), min(zs), max(xs), max(zs)


def spawn_safety_score(after: VoxelWorld, manifest: SettlementManifest, lf: LightField) -> float:
    """1 - dark/walkable over standing cells in the settlement's xz hull."""
    rect = settlement_rect(manifest)
    if rect is None:
        return 0.0
    box = lf.box
    x0, z0 = max(rect[0], box.min.x), max(rect[1], box.min.z)
    x1, z1 = min(rect[2], box.max.x), min(rect[3], box.max.z)
    if x0 > x1 or z0 > z1:
        return 0.0
    standing = standing_mask(after)[_box_slice(after, box)]
    m = box.min
    sub = (slice(None), slice(z0 - m.z, z1 - m.z + 1), slice(x0 - m.x, x1 - m.x + 1))
    walk = standing[sub]
    total = int(walk.sum())
    if total == 0:
        return 0.0
    dark = int((walk & (lf.level[sub] < SPAWN_LIGHT)).sum())
    return 1.0 - dark / total


# -- direct metrics ---------------------------------------------------------

def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def building_features(world: VoxelWorld, manifest: SettlementManifest) -> list[np.ndarray]:
    """Per building: normalized (width, depth, height) followed by the
    normalized histogram of non-air ids inside its bounds."""
    out = []
    for b in manifest.buildings:
        w, h, d = b.bounds.size
        dims = np.array([w, d, h], dtype=np.float64)
        dims /= np.linalg.norm(dims)
        box = b.bounds
        if world.bounds.contains_box(box):
            ids = world.ids[_box_slice(world, box)]
            hist = np.bincount(ids.ravel(), minlength=256).astype(np.float64)
        else:
            hist = np.zeros(256)
        hist[blocks.AIR] = 0
        norm = np.linalg.norm(hist)
        if norm > 0:
            hist /= norm
        out.append(np.concatenate([dims, hist]))
    return out


def diversity_score(manifest: SettlementManifest, world: VoxelWorld) -> float:
    """1 - mean pairwise cosine similarity of building features."""
    feats = building_features(world, manifest)
    if len(feats) < 2:
        return 0.0
    sims = [_cosine(feats[i], feats[j]) for i in range(len(feats)) for j in range(i + 1, len(feats))]
    return float(min(1.0, max(0.0, 1.0 - float(np.mean(sims)))))


def diversity_in_band(d: float) -> float:
    """Triangular map peaking at 0.5: clone towns and chaos both score low."""
    return max(0.0, 1.0 - abs(d - 0.5) / 0.5)


def terrain_impact_score(before: VoxelWorld, after: VoxelWorld, manifest: SettlementManifest) -> float:
    """max(0, 1 - 4 * changed/footprint), ignoring changes inside building
    bounds and in road columns."""
    if before.shape != after.shape or before.origin != after.origin:
        raise ShapeError(f"world shapes differ: {before.shape} at {before.origin} "
                         f"vs {after.shape} at {after.origin}")
    changed = (before.ids != after.ids) | (before.data != after.data)
    ox, oy, oz = before.origin
    for b in manifest.buildings:
        box = b.bounds
        x0, y0, z0 = max(box.min.x - ox, 0), max(box.min.y - oy, 0), max(box.min.z - oz, 0)
        changed[y0:box.max.y - oy + 1, z0:box.max.z - oz + 1, x0:box.max.x - ox + 1] = False
    for r in manifest.roads:
        for c in r.cells:
            lx, lz = c.x - ox, c.z - oz
            if 0 <= lx < before.width and 0 <= lz < before.length:
                changed[:, lz, lx] = False
    box = manifest.box or before.bounds
    ratio = int(changed.sum()) / box.footprint
    return max(0.0, 1.0 - 4.0 * ratio)


def road_grade_score(manifest: SettlementManifest) -> float:
    pairs = ok = 0
    for r in manifest.roads:
        for a, b in zip(r.cells, r.cells[1:]):
            pairs += 1
            ok += abs(a.y - b.y) <= 1
    return 1.0 if pairs == 0 else ok / pairs


def entrance_at_grade(after: VoxelWorld, manifest: SettlementManifest) -> float:
    """Fraction of entrances whose doorway bottom is within one block of
    standing height (surface + 1) on some outside neighbor cell."""
    if not manifest.buildings:
        return 0.0
    hf = compute_heightmap(after)
    ok = 0
    for b in manifest.buildings:
        x, y, z = b.entrance
        rect = b.rect
        gaps = []
        for dx, dz in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            nx, nz = x + dx, z + dz
            if rect.contains(nx, nz) or not hf.inside(nx, nz):
                continue
            s = hf.at(nx, nz)
            if s == hf.sentinel:
                continue
            gaps.append(abs(y - (s + 1)))
        ok += bool(gaps) and min(gaps) <= 1
    return ok / len(manifest.buildings)


def material_localness(before: VoxelWorld, manifest: SettlementManifest) -> float:
    """Fraction of distinct manifest materials obtainable from the local census."""
    used = sorted({m for b in manifest.buildings for m in b.materials})
    if not used:
        return 0.0
    box = manifest.box or before.bounds
    local = local_materials(material_census(before, box, compute_heightmap(before, box)))
    return sum(m in local for m in used) / len(used)


def completeness(after: VoxelWorld, manifest: SettlementManifest) -> float:
    """Roof coverage of building footprints, averaged with fence coverage of
    yard perimeters when the settlement has yards."""
    if not manifest.buildings and not manifest.yards:
        return 0.0
    ox, oy, oz = after.origin
    parts = []
    if manifest.buildings:
        covered = total = 0
        for b in manifest.buildings:
            top = b.entrance.y + 2 - oy
            y1 = b.bounds.max.y - oy + 1
            for x, z in b.rect.cells():
                lx, lz = x - ox, z - oz
                total += 1
                if 0 <= lx < after.width and 0 <= lz < after.length and top < y1:
                    covered += bool((after.ids[max(top, 0):y1, lz, lx] != blocks.AIR).any())
        parts.append(covered / total)
    if manifest.yards:
        fenced = total = 0
        for yard in manifest.yards:
            for x, z in yard.rect.perimeter():
                lx, lz = x - ox, z - oz
                if not (0 <= lx < after.width and 0 <= lz < after.length):
                    continue
                column = after.ids[:, lz, lx]
                if not blocks.SURFACE_LUT[column].any():
                    continue
                total += 1
                fenced += bool((column == blocks.FENCE).any())
        if total:
            parts.append(fenced / total)
    return float(np.mean(parts))


def role_variety(manifest: SettlementManifest) -> float:
    return min(1.0, len({b.role for b in manifest.buildings}) / MAX_ROLES)


# -- scorecard --------------------------------------------------------------

@dataclass
class Scorecard:
    adaptability: float
    functionality: float
    narrative: float
    aesthetics: float
    metrics: dict = field(default_factory=dict)

    @property
    def categories(self) -> dict:
        return {c: getattr(self, c) for c in CATEGORIES}

    @property
    def total(self) -> float:
        return sum(self.categories.values())


def load_weights(path) -> dict:
    with open(path) as fh:
        return merge_weights(json.load(fh))


def merge_weights(overrides: dict | None) -> dict:
    """Default weights with per-category overrides applied and validated."""
    weights = copy.deepcopy(DEFAULT_WEIGHTS)
    for cat, table in (overrides or {}).items():
        if cat not in weights:
            raise MetricError(f"unknown category {cat!r}")
        if not isinstance(table, dict):
            raise MetricError(f"weights for {cat!r} must be an object")
        for name, w in table.items():
            weights[cat][name] = w
    for cat, table in weights.items():
        for name, w in table.items():
            if not isinstance(w, (int, float)) or isinstance(w, bool) or not math.isfinite(w) or w < 0:
                raise MetricError(f"weight {cat}.{name} must be a finite number >= 0, got {w!r}")
    return weights


def scorecard(metrics: dict, weights: dict | None = None) -> Scorecard:
    """Fold [0,1] metrics into four categories of 0-10 points each."""
    weights = merge_weights(weights)
    for name, v in metrics.items():
        if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
            raise MetricError(f"metric {name} = {v!r} outside [0, 1]")
    cats = {}
    for cat, table in weights.items():
        value = 0.0
        for name, w in table.items():
            if name not in metrics:
                raise MetricError(f"missing metric {name!r} for {cat}")
            value += w * metrics[name]
        cats[cat] = min(10.0, max(0.0, 10.0 * value))
    return Scorecard(metrics=dict(metrics), **cats)


@dataclass
class Evaluation:
    metrics: dict
    card: Scorecard
    details: dict


def evaluate(before: VoxelWorld, after: VoxelWorld, manifest: SettlementManifest,
             weights: dict | None = None) -> Evaluation:
    """All metrics and the scorecard for one map. Neither world is modified."""
    if before.shape != after.shape or before.origin != after.origin:
        raise ShapeError(f"before {before.shape} and after {after.shape} worlds differ in shape")
    box = manifest.box or after.bounds
    access = accessibility_score(after, manifest)
    lf = light_field(after, box)
    div = diversity_score(manifest, after)
    metrics = {
        "terrain_impact": terrain_impact_score(before, after, manifest),
        "entrance_at_grade": entrance_at_grade(after, manifest),
        "material_localness": material_localness(before, manifest),
        "accessibility": access.score,
        "spawn_safety": spawn_safety_score(after, manifest, lf),
        "road_grade": road_grade_score(manifest),
        "role_variety": role_variety(manifest),
        "diversity": div,
        "diversity_in_band": diversity_in_band(div),
        "completeness": completeness(after, manifest),
    }
    details = {
        "buildings": len(manifest.buildings),
        "reachable": access.reachable,
        "mean_path_length": access.mean_path_length,
        "unconnected": list(manifest.unconnected),
    }
    return Evaluation(metrics, scorecard(metrics, weights), details)


def map_entry(name: str, ev: Evaluation) -> dict:
    return {
        "name": name,
        "metrics": ev.metrics,
        "categories": ev.card.categories,
        "total": ev.card.total,
        "details": ev.details,
    }


def build_report(entries: list[dict], runtime_seconds: float) -> dict:
    return {
        "maps": entries,
        "grand_total": float(sum(e["total"] for e in entries)),
        "runtime_seconds": float(runtime_seconds),
        "notes": list(UNIMPLEMENTED),
    }
