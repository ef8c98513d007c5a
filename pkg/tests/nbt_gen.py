"""Seeded random NBT trees and corruptions for the round-trip and fuzz suites."""

import random
import struct

from settlegen.nbt import (Byte, ByteArray, Compound, Double, Float, Int, IntArray, List, Long,
                           LongArray, NamedRoot, Short, String, TagKind)

_ALPHABET = "abcxyzÄé中😀 _-0123456789"


def _text(rng, n=8):
    return "".join(rng.choice(_ALPHABET) for _ in range(rng.randint(0, n)))


def _f32(x):
    return struct.unpack(">f", struct.pack(">f", x))[0]


def random_tag(rng: random.Random, kind: int, depth: int):
    if kind == TagKind.BYTE:
        return Byte(rng.randint(-128, 127))
    if kind == TagKind.SHORT:
        return Short(rng.randint(-2 ** 15, 2 ** 15 - 1))
    if kind == TagKind.INT:
        return Int(rng.randint(-2 ** 31, 2 ** 31 - 1))
    if kind == TagKind.LONG:
        return Long(rng.randint(-2 ** 63, 2 ** 63 - 1))
    if kind == TagKind.FLOAT:
        return Float(_f32(rng.uniform(-1e6, 1e6)))
    if kind == TagKind.DOUBLE:
        return Double(rng.uniform(-1e300, 1e300))
    if kind == TagKind.BYTE_ARRAY:
        return ByteArray(bytes(rng.randrange(256) for _ in range(rng.randint(0, 12))))
    if kind == TagKind.STRING:
        return String(_text(rng))
    if kind == TagKind.INT_ARRAY:
        return IntArray([rng.randint(-2 ** 31, 2 ** 31 - 1) for _ in range(rng.randint(0, 6))])
    if kind == TagKind.LONG_ARRAY:
        return LongArray([rng.randint(-2 ** 63, 2 ** 63 - 1) for _ in range(rng.randint(0, 6))])
    if kind == TagKind.LIST:
        inner = _pick_kind(rng, depth + 1)
        n = rng.randint(0, 4)
        if n == 0 and rng.random() < 0.3:
            return List(TagKind.END, ())
        return List(inner, [random_tag(rng, inner, depth + 1) for _ in range(n)])
    if kind == TagKind.COMPOUND:
        return random_compound(rng, depth + 1)
    raise AssertionError(kind)


def _pick_kind(rng, depth):
    kinds = list(range(1, 13))
    if depth >= 4:
        kinds = [k for k in kinds if k not in (TagKind.LIST, TagKind.COMPOUND)]
    return TagKind(rng.choice(kinds))


def random_compound(rng: random.Random, depth: int = 0) -> Compound:
    children = {}
    for _ in range(rng.randint(0, 5 if depth < 4 else 2)):
        children[_text(rng, 6)] = random_tag(rng, _pick_kind(rng, depth), depth)
    return Compound(children)


def random_root(rng: random.Random) -> NamedRoot:
    return NamedRoot(_text(rng, 5), random_compound(rng))


def corrupt(rng: random.Random, data: bytes) -> bytes:
    """One of several damage patterns applied to an encoded payload."""
    b = bytearray(data)
    mode = rng.randrange(7)
    if mode == 0 and b:                      # truncate
        return bytes(b[:rng.randrange(len(b))])
    if mode == 1 and b:                      # flip bits
        for _ in range(rng.randint(1, 4)):
            i = rng.randrange(len(b))
            b[i] ^= 1 << rng.randrange(8)
        return bytes(b)
    if mode == 2:                            # append junk
        return bytes(b) + bytes(rng.randrange(256) for _ in range(rng.randint(1, 8)))
    if mode == 3 and b:                      # overwrite with extreme bytes
        for _ in range(rng.randint(1, 3)):
            b[rng.randrange(len(b))] = rng.choice([0x00, 0x7F, 0x80, 0xFF, 0x0D, 0x09])
        return bytes(b)
    if mode == 4:                            # pure noise
        return bytes(rng.randrange(256) for _ in range(rng.randint(0, 64)))
    if mode == 5 and len(b) > 2:             # delete a span
        i = rng.randrange(len(b) - 1)
        return bytes(b[:i] + b[i + rng.randint(1, 4):])
    return bytes([0x1F, 0x8B]) + bytes(b)    # bogus gzip magic
