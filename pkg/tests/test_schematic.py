import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from settlegen.nbt import ByteArray, Compound, NamedRoot, Short, write_nbt
from settlegen.schematic import (SchemaError, SizeError, load_schematic, read_schematic,
                                 save_schematic, write_schematic)
from settlegen.voxel import BlockState, VoxelWorld, block_at


def _blob(w, h, l, blocks, data, drop=None):
    tags = {"Width": Short(w), "Height": Short(h), "Length": Short(l),
            "Blocks": ByteArray(bytes(blocks)), "Data": ByteArray(bytes(data))}
    if drop:
        del tags[drop]
    return write_nbt(NamedRoot("Schematic", Compound(tags)), compress=True)


def test_one_stone_block():
    w = load_schematic(_blob(1, 1, 1, [1], [0]))
    assert w.shape == (1, 1, 1)
    assert block_at(w, (0, 0, 0)) == BlockState(1, 0)


def test_index_convention():
    # W=2, H=3, L=4: cell (x=1, y=2, z=3) sits at (2*4 + 3)*2 + 1 = 23
    blocks = [0] * 24
    blocks[23] = 7
    w = load_schematic(_blob(2, 3, 4, blocks, [0] * 24))
    assert block_at(w, (1, 2, 3)).id == 7


def test_data_nibble_masked():
    w = load_schematic(_blob(1, 1, 2, [5, 5], [0xF3, 0x0A]))
    assert block_at(w, (0, 0, 0)) == BlockState(5, 3)
    assert block_at(w, (0, 0, 1)) == BlockState(5, 10)


def test_size_mismatch():
    with pytest.raises(SizeError):
        load_schematic(_blob(2, 2, 2, [0] * 7, [0] * 8))


@pytest.mark.parametrize("key", ["Width", "Height", "Length", "Blocks", "Data"])
def test_missing_key_named(key):
    with pytest.raises(SchemaError) as info:
        load_schematic(_blob(1, 1, 1, [0], [0], drop=key))
    assert info.value.key == key


def test_save_is_gzip_and_deterministic():
    w = VoxelWorld(3, 2, 4)
    w.ids[1, 2, 0] = 20
    a, b = save_schematic(w), save_schematic(w.copy())
    assert a[:2] == b"\x1f\x8b"
    assert a == b
    assert gzip.decompress(a)[:1] == b"\x0a"


def test_dimension_overflow():
    w = VoxelWorld.__new__(VoxelWorld)
    w.width, w.height, w.length = 40000, 1, 1
    with pytest.raises(SizeError):
        save_schematic(w)


def test_file_round_trip(tmp_path):
    w = VoxelWorld(5, 4, 3)
    w.ids[:] = np.arange(60, dtype=np.uint8).reshape(4, 3, 5)
    w.data[:] = 7
    write_schematic(w, tmp_path / "a.schematic")
    assert read_schematic(tmp_path / "a.schematic").same_cells(w)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.data())
def test_round_trip_property(W, H, L, data):
    n = W * H * L
    ids = np.array(data.draw(st.lists(st.integers(0, 255), min_size=n, max_size=n)), dtype=np.uint8)
    meta = np.array(data.draw(st.lists(st.integers(0, 15), min_size=n, max_size=n)), dtype=np.uint8)
    w = VoxelWorld(W, H, L, ids=ids, data=meta)
    assert load_schematic(save_schematic(w)).same_cells(w)
