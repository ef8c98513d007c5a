"""Settlement manifest: the record generators hand to the evaluator."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

from .voxel import BlockState, BoundingBox, EditSet, Vec3


class GenerationError(RuntimeError):
    pass


class Rect(NamedTuple):
    """Inclusive (x, z) rectangle."""

    x0: int
    z0: int
    x1: int
    z1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def depth(self) -> int:
        return self.z1 - self.z0 + 1

    @property
    def area(self) -> int:
        return self.width * self.depth

    def shrink(self, n: int) -> "Rect":
        return Rect(self.x0 + n, self.z0 + n, self.x1 - n, self.z1 - n)

    def cells(self):
        for x in range(self.x0, self.x1 + 1):
            for z in range(self.z0, self.z1 + 1):
                yield x, z

    def contains(self, x: int, z: int) -> bool:
        return self.x0 <= x <= self.x1 and self.z0 <= z <= self.z1

    def perimeter(self) -> list[tuple[int, int]]:
        """Perimeter cells clockwise from (x0, z0), without repeats."""
        x0, z0, x1, z1 = self
        ring = [(x, z0) for x in range(x0, x1 + 1)]
        ring += [(x1, z) for z in range(z0 + 1, z1 + 1)]
        ring += [(x, z1) for x in range(x1 - 1, x0 - 1, -1)]
        ring += [(x0, z) for z in range(z1 - 1, z0, -1)]
        seen = set()
        return [c for c in ring if not (c in seen or seen.add(c))]


@dataclass(frozen=True)
class Yard:
    rect: Rect
    site: int = 0


@dataclass
class Building:
    bounds: BoundingBox
    entrance: Vec3
    role: str
    materials: list[int] = field(default_factory=list)

    @property
    def rect(self) -> Rect:
        return Rect(self.bounds.min.x, self.bounds.min.z, self.bounds.max.x, self.bounds.max.z)

    def to_json(self) -> dict:
        return {
            "bounds": {"min": list(self.bounds.min), "max": list(self.bounds.max)},
            "entrance": list(self.entrance),
            "role": self.role,
            "materials": list(self.materials),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Building":
        return cls(BoundingBox(Vec3(*d["bounds"]["min"]), Vec3(*d["bounds"]["max"])),
                   Vec3(*d["entrance"]), d["role"], list(d.get("materials", [])))


@dataclass
class RoadPlan:
    cells: list[Vec3]          # road block positions, consecutive cells 4-adjacent
    bridge: list[bool]
    blocks: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"cells": [list(c) for c in self.cells], "bridge": list(self.bridge),
                "blocks": list(self.blocks)}

    @classmethod
    def from_json(cls, d: dict) -> "RoadPlan":
        return cls([Vec3(*c) for c in d["cells"]], [bool(b) for b in d["bridge"]],
                   list(d.get("blocks", [])))


@dataclass
class SettlementManifest:
    buildings: list[Building] = field(default_factory=list)
    roads: list[RoadPlan] = field(default_factory=list)
    yards: list[Yard] = field(default_factory=list)
    spawn: Vec3 | None = None
    box: BoundingBox | None = None
    unconnected: list[int] = field(default_factory=list)  # buildings whose road was omitted
    generator: str = ""

    def to_json(self) -> dict:
        out = {
            "buildings": [b.to_json() for b in self.buildings],
            "roads": [r.to_json() for r in self.roads],
            "spawn": list(self.spawn) if self.spawn is not None else None,
            "yards": [list(y.rect) for y in self.yards],
            "unconnected": list(self.unconnected),
            "generator": self.generator,
        }
        if self.box is not None:
            out["box"] = {"min": list(self.box.min), "max": list(self.box.max)}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "SettlementManifest":
        box = d.get("box")
        return cls(
            buildings=[Building.from_json(b) for b in d.get("buildings", [])],
            roads=[RoadPlan.from_json(r) for r in d.get("roads", [])],
            yards=[Yard(Rect(*y)) for y in d.get("yards", [])],
            spawn=Vec3(*d["spawn"]) if d.get("spawn") is not None else None,
            box=BoundingBox(Vec3(*box["min"]), Vec3(*box["max"])) if box else None,
            unconnected=list(d.get("unconnected", [])),
            generator=d.get("generator", ""),
        )

    @classmethod
    def loads(cls, text: str) -> "SettlementManifest":
        return cls.from_json(json.loads(text))


class EditWriter:
    """Collects edits, silently dropping any outside ``box``."""

    def __init__(self, box: BoundingBox):
        self.box = box
        self.edits = EditSet()
        self.dropped = 0

    def put(self, x: int, y: int, z: int, block: int, data: int = 0) -> None:
        if self.box.contains((x, y, z)):
            self.edits.edits.append((Vec3(x, y, z), BlockState(block, data)))
        else:
            self.dropped += 1
