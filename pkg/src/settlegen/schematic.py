"""Classic MCEdit ``.schematic`` container (Width/Height/Length + Blocks/Data)."""

from __future__ import annotations

import numpy as np

from .nbt import ByteArray, Compound, NamedRoot, NBTError, Short, String, parse_nbt, write_nbt
from .voxel import VoxelWorld

MAX_DIM = 32767


class SchematicError(NBTError):
    pass


class SchemaError(SchematicError):
    def __init__(self, key: str, problem: str = "missing"):
        self.key = key
        super().__init__(f"schematic key {key!r} {problem}")


class SizeError(SchematicError):
    pass


def _require(root: Compound, key: str, cls):
    tag = root.get(key)
    if tag is None:
        raise SchemaError(key)
    if not isinstance(tag, cls):
        raise SchemaError(key, f"has type {type(tag).__name__}, expected {cls.__name__}")
    return tag.value


def world_from_root(root: NamedRoot) -> VoxelWorld:
    tag = root.tag
    w = _require(tag, "Width", Short)
    h = _require(tag, "Height", Short)
    l = _require(tag, "Length", Short)
    blocks = _require(tag, "Blocks", ByteArray)
    data = _require(tag, "Data", ByteArray)
    if w < 1 or h < 1 or l < 1:
        raise SizeError(f"non-positive schematic dimensions {w}x{h}x{l}")
    n = w * h * l
    for key, arr in (("Blocks", blocks), ("Data", data)):
        if len(arr) != n:
            raise SizeError(f"{key} holds {len(arr)} entries, expected W*H*L = {n}")
    ids = np.frombuffer(blocks, dtype=np.uint8).reshape(h, l, w).copy()
    meta = (np.frombuffer(data, dtype=np.uint8) & 0x0F).reshape(h, l, w)
    return VoxelWorld(w, h, l, ids=ids, data=meta)


def load_schematic(data: bytes) -> VoxelWorld:
    return world_from_root(parse_nbt(data))


def save_schematic(world: VoxelWorld) -> bytes:
    """Gzip-wrapped schematic bytes; deterministic for a given world."""
    for axis, n in zip("WHL", world.shape):
        if n > MAX_DIM:
            raise SizeError(f"dimension {axis}={n} exceeds {MAX_DIM}")
    root = NamedRoot("Schematic", Compound({
        "Width": Short(world.width),
        "Height": Short(world.height),
        "Length": Short(world.length),
        "Materials": String("Alpha"),
        "Blocks": ByteArray(world.ids.tobytes()),
        "Data": ByteArray(world.data.tobytes()),
    }))
    return write_nbt(root, compress=True)


def read_schematic(path) -> VoxelWorld:
    with open(path, "rb") as fh:
        return load_schematic(fh.read())


def write_schematic(world: VoxelWorld, path) -> None:
    payload = save_schematic(world)
    with open(path, "wb") as fh:
        fh.write(payload)
