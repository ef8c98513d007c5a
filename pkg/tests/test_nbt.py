import gzip
import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from settlegen.nbt import (Byte, ByteArray, Compound, Double, EncodingError, Float, Int, IntArray,
                           InvalidTagError, LengthError, List, Long, LongArray, NamedRoot, NBTError,
                           Short, String, TagKind, TrailingDataError, UnexpectedEndError,
                           ValidationError, parse_nbt, write_nbt)

from nbt_gen import corrupt, random_root

EMPTY = bytes([0x0A, 0x00, 0x00, 0x00])


def test_minimal_compound():
    root = parse_nbt(EMPTY)
    assert root == NamedRoot("", Compound({}))
    assert write_nbt(root) == EMPTY


def test_big_endian_short():
    data = bytes([0x0A, 0x00, 0x01, ord("a"), 0x02, 0x00, 0x01, ord("b"), 0x01, 0x02, 0x00])
    root = parse_nbt(data)
    assert root.name == "a"
    assert root.tag["b"] == Short(258)
    assert write_nbt(root) == data


def test_invalid_tag_id():
    with pytest.raises(InvalidTagError, match="invalid tag id 13 at offset 3"):
        parse_nbt(bytes([0x0A, 0x00, 0x00, 0x0D, 0x00, 0x00]))


def test_root_must_be_compound():
    with pytest.raises(NBTError):
        parse_nbt(bytes([0x0D, 0x00, 0x00]))
    with pytest.raises(ValidationError):
        parse_nbt(bytes([0x01, 0x00, 0x00, 0x05]))


def test_truncated_reports_offset():
    with pytest.raises(UnexpectedEndError, match="unexpected end at offset"):
        parse_nbt(bytes([0x0A, 0x00, 0x05, ord("a")]))
    with pytest.raises(UnexpectedEndError):
        parse_nbt(b"")


def test_negative_length():
    data = bytes([0x0A, 0x00, 0x00, 0x07, 0x00, 0x01, ord("x")]) + struct.pack(">i", -1) + b"\x00"
    with pytest.raises(LengthError):
        parse_nbt(data)


def test_trailing_data():
    with pytest.raises(TrailingDataError):
        parse_nbt(EMPTY + b"\x00")


def test_invalid_utf8():
    data = bytes([0x0A, 0x00, 0x02, 0xC3, 0x28, 0x00])
    with pytest.raises(EncodingError):
        parse_nbt(data)


def test_duplicate_names_rejected():
    child = bytes([0x01, 0x00, 0x01, ord("k"), 0x05])
    data = bytes([0x0A, 0x00, 0x00]) + child + child + b"\x00"
    with pytest.raises(NBTError):
        parse_nbt(data)


def test_mixed_list_rejected_on_write():
    with pytest.raises(ValidationError):
        write_nbt(NamedRoot("", Compound({"l": List(TagKind.BYTE, [Byte(1), Short(2)])})))


def test_out_of_range_value_rejected_on_write():
    with pytest.raises(ValidationError):
        write_nbt(NamedRoot("", Compound({"b": Byte(300)})))


def test_gzip_round_trip():
    root = NamedRoot("s", Compound({"x": Int(-5), "y": String("héllo")}))
    blob = write_nbt(root, compress=True)
    assert blob[:2] == b"\x1f\x8b"
    assert parse_nbt(blob) == root
    assert gzip.decompress(blob) == write_nbt(root)


def test_compound_order_is_sorted():
    a = write_nbt(NamedRoot("", Compound({"b": Byte(1), "a": Byte(2)})))
    b = write_nbt(NamedRoot("", Compound({"a": Byte(2), "b": Byte(1)})))
    assert a == b
    assert a.index(b"a") < a.index(b"b")


def test_all_kinds_round_trip():
    root = NamedRoot("all", Compound({
        "byte": Byte(-128), "short": Short(32767), "int": Int(-2 ** 31), "long": Long(2 ** 63 - 1),
        "float": Float(0.5), "double": Double(-1.25e-300), "bytes": ByteArray(b"\x00\xff"),
        "str": String(""), "list": List(TagKind.STRING, [String("a"), String("b")]),
        "empty": List(TagKind.END, []), "nested": Compound({"c": Compound({})}),
        "ints": IntArray([1, -1]), "longs": LongArray([2 ** 40]),
    }))
    assert parse_nbt(write_nbt(root)) == root


def test_deep_nesting_is_an_error_not_a_crash():
    depth = 5000
    data = bytes([0x0A, 0x00, 0x00]) + bytes([0x0A, 0x00, 0x01, ord("n")]) * depth + b"\x00" * (depth + 1)
    with pytest.raises(NBTError):
        parse_nbt(data)


def test_huge_declared_length_fails_fast():
    data = bytes([0x0A, 0x00, 0x00, 0x0B, 0x00, 0x01, ord("i")]) + struct.pack(">i", 2 ** 31 - 1)
    with pytest.raises(UnexpectedEndError):
        parse_nbt(data)


scalars = st.one_of(
    st.integers(-128, 127).map(Byte),
    st.integers(-2 ** 15, 2 ** 15 - 1).map(Short),
    st.integers(-2 ** 31, 2 ** 31 - 1).map(Int),
    st.integers(-2 ** 63, 2 ** 63 - 1).map(Long),
    st.floats(width=32, allow_nan=False).map(Float),
    st.floats(allow_nan=False).map(Double),
    st.binary(max_size=16).map(ByteArray),
    st.text(max_size=10).map(String),
    st.lists(st.integers(-2 ** 31, 2 ** 31 - 1), max_size=5).map(IntArray),
    st.lists(st.integers(-2 ** 63, 2 ** 63 - 1), max_size=5).map(LongArray),
)


def _homogeneous(children):
    return st.sampled_from([Byte(1), String("x")]).flatmap(
        lambda proto: st.lists(children.filter(lambda t: type(t) is type(proto)), max_size=3)
        .map(lambda items: List(proto.kind, items)))


tags = st.recursive(
    scalars,
    lambda children: st.one_of(
        st.dictionaries(st.text(max_size=6), children, max_size=4).map(Compound),
        st.lists(scalars.filter(lambda t: isinstance(t, Int)), max_size=4).map(lambda xs: List(TagKind.INT, xs)),
        _homogeneous(children),
    ),
    max_leaves=20,
)


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=8), st.dictionaries(st.text(max_size=6), tags, max_size=5), st.booleans())
def test_round_trip_property(name, children, compress):
    root = NamedRoot(name, Compound(children))
    blob = write_nbt(root, compress)
    assert parse_nbt(blob) == root
    assert write_nbt(parse_nbt(blob), compress) == blob


def test_fuzz_small_sample():
    rng = random.Random(7)
    for _ in range(500):
        blob = write_nbt(random_root(rng), compress=rng.random() < 0.2)
        try:
            parse_nbt(corrupt(rng, blob))
        except NBTError:
            pass
