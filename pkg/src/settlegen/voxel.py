"""Dense voxel world, block access, edit sets and world diffing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

AIR = 0


class Vec3(NamedTuple):
    x: int
    y: int
    z: int

    def __add__(self, other):  # type: ignore[override]
        return Vec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])


class BoundsError(IndexError):
    """Position outside the world; ``axis`` names the first offending axis."""

    def __init__(self, pos, axis: str, lo: int, hi: int):
        self.pos = pos
        self.axis = axis
        value = pos["xyz".index(axis)]
        super().__init__(f"{axis}={value} outside [{lo}, {hi}] at {tuple(pos)}")


class BlockStateError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class BlockState(NamedTuple):
    id: int
    data: int = 0

    @classmethod
    def checked(cls, id: int, data: int = 0) -> "BlockState":
        if not 0 <= id <= 255:
            raise BlockStateError(f"block id {id} outside [0, 255]")
        if not 0 <= data <= 15:
            raise BlockStateError(f"block data {data} outside [0, 15]")
        return cls(int(id), int(data))


def _check_state(state: BlockState) -> None:
    if not 0 <= state[0] <= 255:
        raise BlockStateError(f"block id {state[0]} outside [0, 255]")
    if not 0 <= state[1] <= 15:
        raise BlockStateError(f"block data {state[1]} outside [0, 15]")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, inclusive on every axis."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        object.__setattr__(self, "min", Vec3(*self.min))
        object.__setattr__(self, "max", Vec3(*self.max))
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise ValueError(f"inverted bounding box {self.min} .. {self.max}")

    @classmethod
    def from_extent(cls, origin, size) -> "BoundingBox":
        ox, oy, oz = origin
        w, h, l = size
        return cls(Vec3(ox, oy, oz), Vec3(ox + w - 1, oy + h - 1, oz + l - 1))

    @property
    def size(self) -> tuple[int, int, int]:
        return (self.max.x - self.min.x + 1, self.max.y - self.min.y + 1, self.max.z - self.min.z + 1)

    @property
    def footprint(self) -> int:
        w, _, l = self.size
        return w * l

    def contains(self, pos) -> bool:
        x, y, z = pos
        return (
            self.min.x <= x <= self.max.x
            and self.min.y <= y <= self.max.y
            and self.min.z <= z <= self.max.z
        )

    def contains_box(self, other: "BoundingBox") -> bool:
        return self.contains(other.min) and self.contains(other.max)

    def center_xz(self) -> tuple[int, int]:
        return ((self.min.x + self.max.x) // 2, (self.min.z + self.max.z) // 2)


class EditSet:
    """Ordered block writes. Later writes to the same position win."""

    __slots__ = ("edits",)

    def __init__(self, edits: Iterable[tuple[Vec3, BlockState]] = ()):
        self.edits: list[tuple[Vec3, BlockState]] = [
            (Vec3(*p), BlockState(*s)) for p, s in edits
        ]

    def add(self, pos, state) -> None:
        self.edits.append((Vec3(*pos), BlockState(*state)))

    def extend(self, other: "EditSet") -> None:
        self.edits.extend(other.edits)

    def __len__(self) -> int:
        return len(self.edits)

    def __iter__(self) -> Iterator[tuple[Vec3, BlockState]]:
        return iter(self.edits)

    def __eq__(self, other) -> bool:
        return isinstance(other, EditSet) and self.edits == other.edits

    def __repr__(self) -> str:
        return f"EditSet({len(self.edits)} edits)"

    def positions(self) -> list[Vec3]:
        return [p for p, _ in self.edits]

    def to_bytes(self) -> bytes:
        """Canonical little-endian encoding, used for hashing."""
        if not self.edits:
            return b""
        arr = np.array([(p[0], p[1], p[2], s[0], s[1]) for p, s in self.edits], dtype="<i4")
        return arr.tobytes()


class VoxelWorld:
    """Dense block grid of ``width`` x ``height`` x ``length`` cells.

    ``ids`` and ``data`` are uint8 arrays shaped ``(height, length, width)`` so
    that the C-order flat index of local ``(x, y, z)`` is ``(y*L + z)*W + x``.
    Public positions are world coordinates; ``origin`` is the world position of
    local ``(0, 0, 0)``.
    """

    def __init__(self, width: int, height: int, length: int, origin=(0, 0, 0),
                 ids: np.ndarray | None = None, data: np.ndarray | None = None):
        if width < 1 or height < 1 or length < 1:
            raise ShapeError(f"world dimensions must be >= 1, got {width}x{height}x{length}")
        self.width = int(width)
        self.height = int(height)
        self.length = int(length)
        self.origin = Vec3(*origin)
        shape = (self.height, self.length, self.width)
        if ids is None:
            ids = np.zeros(shape, dtype=np.uint8)
        if data is None:
            data = np.zeros(shape, dtype=np.uint8)
        ids = np.ascontiguousarray(ids, dtype=np.uint8).reshape(shape)
        data = np.ascontiguousarray(data, dtype=np.uint8).reshape(shape)
        if data.max(initial=0) > 15:
            raise BlockStateError("block data outside [0, 15]")
        self.ids = ids
        self.data = data

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.width, self.height, self.length)

    @property
    def bounds(self) -> BoundingBox:
        return BoundingBox.from_extent(self.origin, self.shape)

    def copy(self) -> "VoxelWorld":
        return VoxelWorld(self.width, self.height, self.length, self.origin,
                          self.ids.copy(), self.data.copy())

    def local(self, pos) -> tuple[int, int, int]:
        """Local (x, y, z) for world ``pos``; raises BoundsError."""
        lx = pos[0] - self.origin.x
        ly = pos[1] - self.origin.y
        lz = pos[2] - self.origin.z
        for axis, v, n, o in (("x", lx, self.width, self.origin.x),
                              ("y", ly, self.height, self.origin.y),
                              ("z", lz, self.length, self.origin.z)):
            if not 0 <= v < n:
                raise BoundsError(pos, axis, o, o + n - 1)
        return lx, ly, lz

    def flat_index(self, pos) -> int:
        x, y, z = self.local(pos)
        return (y * self.length + z) * self.width + x

    def unflatten(self, index: int) -> Vec3:
        if not 0 <= index < self.width * self.height * self.length:
            raise IndexError(f"flat index {index} out of range")
        yz, x = divmod(index, self.width)
        y, z = divmod(yz, self.length)
        return Vec3(x + self.origin.x, y + self.origin.y, z + self.origin.z)

    def same_cells(self, other: "VoxelWorld") -> bool:
        return (self.shape == other.shape and self.origin == other.origin
                and np.array_equal(self.ids, other.ids)
                and np.array_equal(self.data, other.data))

    def __eq__(self, other) -> bool:
        return isinstance(other, VoxelWorld) and self.same_cells(other)

    def __repr__(self) -> str:
        return f"VoxelWorld({self.width}x{self.height}x{self.length} at {tuple(self.origin)})"


def block_at(world: VoxelWorld, pos) -> BlockState:
    x, y, z = world.local(pos)
    return BlockState(int(world.ids[y, z, x]), int(world.data[y, z, x]))


def set_block(world: VoxelWorld, pos, state) -> None:
    _check_state(state)
    x, y, z = world.local(pos)
    world.ids[y, z, x] = state[0]
    world.data[y, z, x] = state[1]


def _edit_arrays(world: VoxelWorld, edits: EditSet):
    n = len(edits)
    pos = np.empty((n, 3), dtype=np.int64)
    st = np.empty((n, 2), dtype=np.int64)
    for i, (p, s) in enumerate(edits.edits):
        pos[i] = p
        st[i] = s
    pos -= np.asarray(world.origin, dtype=np.int64)
    return pos, st


def apply_edit_set(world: VoxelWorld, edits: EditSet) -> None:
    """Apply all edits in order, or none of them if any is invalid."""
    if not len(edits):
        return
    pos, st = _edit_arrays(world, edits)
    dims = (world.width, world.height, world.length)
    for axis in range(3):
        bad = np.flatnonzero((pos[:, axis] < 0) | (pos[:, axis] >= dims[axis]))
        if bad.size:
            p = edits.edits[int(bad[0])][0]
            world.local(p)  # raises BoundsError naming the axis
    bad = np.flatnonzero((st[:, 0] < 0) | (st[:, 0] > 255) | (st[:, 1] < 0) | (st[:, 1] > 15))
    if bad.size:
        _check_state(edits.edits[int(bad[0])][1])
    flat = (pos[:, 1] * world.length + pos[:, 2]) * world.width + pos[:, 0]
    # keep only the last write per cell
    rev_unique, rev_first = np.unique(flat[::-1], return_index=True)
    last = len(flat) - 1 - rev_first
    world.ids.reshape(-1)[rev_unique] = st[last, 0]
    world.data.reshape(-1)[rev_unique] = st[last, 1]


def diff_worlds(before: VoxelWorld, after: VoxelWorld) -> EditSet:
    """Minimal edits turning ``before`` into ``after``, ascending flat index."""
    if before.shape != after.shape or before.origin != after.origin:
        raise ShapeError(
            f"cannot diff {before.shape}@{tuple(before.origin)} against "
            f"{after.shape}@{tuple(after.origin)}"
        )
    changed = np.flatnonzero((before.ids != after.ids).reshape(-1)
                             | (before.data != after.data).reshape(-1))
    if changed.size == 0:
        return EditSet()
    W, L = before.width, before.length
    x = changed % W
    z = (changed // W) % L
    y = changed // (W * L)
    ox, oy, oz = before.origin
    ids = after.ids.reshape(-1)[changed]
    data = after.data.reshape(-1)[changed]
    out = EditSet()
    out.edits = [
        (Vec3(int(a) + ox, int(b) + oy, int(c) + oz), BlockState(int(i), int(d)))
        for a, b, c, i, d in zip(x.tolist(), y.tolist(), z.tolist(), ids.tolist(), data.tolist())
    ]
    return out


def dump_text(world: VoxelWorld) -> str:
    """One ``x y z id data`` line per non-air block, ascending flat index."""
    lines = []
    ox, oy, oz = world.origin
    for index in np.flatnonzero(world.ids.reshape(-1) != AIR).tolist():
        yz, x = divmod(index, world.width)
        y, z = divmod(yz, world.length)
        lines.append(f"{x + ox} {y + oy} {z + oz} {world.ids[y, z, x]} {world.data[y, z, x]}")
    return "\n".join(lines) + ("\n" if lines else "")
