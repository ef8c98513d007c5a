"""Deliberately naive comparison generator: flatten the middle of the box,
then stamp a grid of identical stone huts on the plateau."""

from __future__ import annotations

import numpy as np

from . import blocks
from .manifest import Building, EditWriter, GenerationError, SettlementManifest
from .terrain import compute_heightmap
from .voxel import BoundingBox, EditSet, Vec3, VoxelWorld

HUT = 5
GAP = 3


def flatten_generate(world: VoxelWorld, box: BoundingBox | None = None, seed: int = 0
                     ) -> tuple[EditSet, SettlementManifest]:
    box = box or world.bounds
    if not world.bounds.contains_box(box):
        raise GenerationError(f"box {box} lies outside the world {world.bounds}")
    hf = compute_heightmap(world, box)
    nx, nz = hf.shape
    i0, i1 = nx // 4, nx // 4 + max(1, nx // 2)
    j0, j1 = nz // 4, nz // 4 + max(1, nz // 2)
    plateau = hf.surface[i0:i1, j0:j1]
    valid = plateau[plateau != hf.sentinel]
    if valid.size == 0:
        raise GenerationError("no buildable site: the centre of the box has no ground")
    level = int(np.median(valid))
    ox, oy, oz = world.origin
    out = EditWriter(box)
    for i in range(i0, i1):
        for j in range(j0, j1):
            x, z = i + hf.x0, j + hf.z0
            column = world.ids[:, z - oz, x - ox]
            for y in range(box.min.y, box.max.y + 1):
                want = blocks.STONE if y < level else blocks.GRASS if y == level else blocks.AIR
                if column[y - oy] != want:
                    out.put(x, y, z, want)

    manifest = SettlementManifest(box=box, generator="flatten")
    roof = level + 5
    for bx in range(i0 + 1, i1 - HUT, HUT + GAP):
        for bz in range(j0 + 1, j1 - HUT, HUT + GAP):
            x0, z0 = bx + hf.x0, bz + hf.z0
            x1, z1 = x0 + HUT - 1, z0 + HUT - 1
            for x in range(x0, x1 + 1):
                for z in range(z0, z1 + 1):
                    edge = x in (x0, x1) or z in (z0, z1)
                    for y in range(level + 1, roof):
                        out.put(x, y, z, blocks.COBBLESTONE if edge else blocks.AIR)
                    out.put(x, roof, z, blocks.COBBLESTONE)
            dx, dz = x0 + HUT // 2, z0
            out.put(dx, level + 1, dz, blocks.WOODEN_DOOR, 0)
            out.put(dx, level + 2, dz, blocks.WOODEN_DOOR, 8)
            manifest.buildings.append(Building(
                BoundingBox(Vec3(x0, level, z0), Vec3(x1, min(roof, box.max.y), z1)),
                Vec3(dx, level + 1, dz), "house", [blocks.COBBLESTONE]))
    cx, cz = box.center_xz()
    manifest.spawn = Vec3(cx, level + 1, cz)
    return out.edits, manifest
