"""Named Binary Tag (NBT) reader and writer.

All multi-byte numbers are big-endian. A payload is a single named root
Compound, optionally wrapped in a gzip container (detected by the 0x1F 0x8B
magic). Compound children are written in ascending name order so that the
uncompressed encoding of a tree is deterministic.
"""

from __future__ import annotations

import gzip
import struct
import zlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import ClassVar, Union

MAX_DEPTH = 512


class TagKind(IntEnum):
    END = 0
    BYTE = 1
    SHORT = 2
    INT = 3
    LONG = 4
    FLOAT = 5
    DOUBLE = 6
    BYTE_ARRAY = 7
    STRING = 8
    LIST = 9
    COMPOUND = 10
    INT_ARRAY = 11
    LONG_ARRAY = 12


class NBTError(ValueError):
    """Base class for malformed NBT input or invalid trees."""


class UnexpectedEndError(NBTError):
    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"unexpected end at offset {offset}")


class InvalidTagError(NBTError):
    def __init__(self, tag_id: int, offset: int):
        self.tag_id = tag_id
        self.offset = offset
        super().__init__(f"invalid tag id {tag_id} at offset {offset}")


class LengthError(NBTError):
    pass


class TrailingDataError(NBTError):
    pass


class EncodingError(NBTError):
    pass


class ValidationError(NBTError):
    pass


class Tag:
    kind: ClassVar[TagKind]


@dataclass(frozen=True)
class Byte(Tag):
    value: int
    kind: ClassVar[TagKind] = TagKind.BYTE


@dataclass(frozen=True)
class Short(Tag):
    value: int
    kind: ClassVar[TagKind] = TagKind.SHORT


@dataclass(frozen=True)
class Int(Tag):
    value: int
    kind: ClassVar[TagKind] = TagKind.INT


@dataclass(frozen=True)
class Long(Tag):
    value: int
    kind: ClassVar[TagKind] = TagKind.LONG


@dataclass(frozen=True)
class Float(Tag):
    value: float
    kind: ClassVar[TagKind] = TagKind.FLOAT


@dataclass(frozen=True)
class Double(Tag):
    value: float
    kind: ClassVar[TagKind] = TagKind.DOUBLE


@dataclass(frozen=True)
class ByteArray(Tag):
    value: bytes
    kind: ClassVar[TagKind] = TagKind.BYTE_ARRAY


@dataclass(frozen=True)
class String(Tag):
    value: str
    kind: ClassVar[TagKind] = TagKind.STRING


@dataclass(frozen=True)
class List(Tag):
    element_kind: TagKind
    items: tuple = ()
    kind: ClassVar[TagKind] = TagKind.LIST

    def __post_init__(self):
        object.__setattr__(self, "element_kind", TagKind(self.element_kind))
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class Compound(Tag):
    value: dict = field(default_factory=dict)
    kind: ClassVar[TagKind] = TagKind.COMPOUND

    def __getitem__(self, name: str) -> Tag:
        return self.value[name]

    def __contains__(self, name: str) -> bool:
        return name in self.value

    def get(self, name: str, default=None):
        return self.value.get(name, default)

    def __hash__(self):
        return hash(tuple(sorted(self.value.items())))


@dataclass(frozen=True)
class IntArray(Tag):
    value: tuple = ()
    kind: ClassVar[TagKind] = TagKind.INT_ARRAY

    def __post_init__(self):
        object.__setattr__(self, "value", tuple(self.value))


@dataclass(frozen=True)
class LongArray(Tag):
    value: tuple = ()
    kind: ClassVar[TagKind] = TagKind.LONG_ARRAY

    def __post_init__(self):
        object.__setattr__(self, "value", tuple(self.value))


AnyTag = Union[Byte, Short, Int, Long, Float, Double, ByteArray, String, List,
               Compound, IntArray, LongArray]


@dataclass(frozen=True)
class NamedRoot:
    name: str
    tag: Compound

    def __post_init__(self):
        if not isinstance(self.tag, Compound):
            raise ValidationError(f"root tag must be a Compound, got {type(self.tag).__name__}")


_SCALAR = {
    TagKind.BYTE: (struct.Struct(">b"), Byte),
    TagKind.SHORT: (struct.Struct(">h"), Short),
    TagKind.INT: (struct.Struct(">i"), Int),
    TagKind.LONG: (struct.Struct(">q"), Long),
    TagKind.FLOAT: (struct.Struct(">f"), Float),
    TagKind.DOUBLE: (struct.Struct(">d"), Double),
}
_U16 = struct.Struct(">H")
_I32 = struct.Struct(">i")
_FIXED_SIZE = {k: s.size for k, (s, _) in _SCALAR.items()}


def is_gzip(data: bytes) -> bool:
    return data[:2] == b"\x1f\x8b"


class _Reader:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> int:
        start = self.pos
        if start + n > len(self.buf):
            raise UnexpectedEndError(len(self.buf))
        self.pos = start + n
        return start

    def tag_id(self) -> int:
        at = self.take(1)
        tid = self.buf[at]
        if tid > 12:
            raise InvalidTagError(tid, at)
        return tid

    def length(self) -> int:
        at = self.take(4)
        n = _I32.unpack_from(self.buf, at)[0]
        if n < 0:
            raise LengthError(f"negative length {n} at offset {at}")
        return n

    def string(self) -> str:
        n = _U16.unpack_from(self.buf, self.take(2))[0]
        at = self.take(n)
        try:
            return self.buf[at:at + n].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"invalid UTF-8 string at offset {at}: {exc.reason}") from None

    def payload(self, kind: int, depth: int) -> Tag:
        if depth > MAX_DEPTH:
            raise NBTError(f"nesting deeper than {MAX_DEPTH} at offset {self.pos}")
        scalar = _SCALAR.get(kind)
        if scalar is not None:
            st, cls = scalar
            return cls(st.unpack_from(self.buf, self.take(st.size))[0])
        if kind == TagKind.BYTE_ARRAY:
            n = self.length()
            at = self.take(n)
            return ByteArray(bytes(self.buf[at:at + n]))
        if kind == TagKind.STRING:
            return String(self.string())
        if kind == TagKind.LIST:
            elem = self.tag_id()
            n = self.length()
            if elem == TagKind.END:
                if n:
                    raise LengthError(f"list of End tags with count {n} at offset {self.pos - 4}")
                return List(TagKind.END, ())
            # every element occupies at least one byte
            size = _FIXED_SIZE.get(elem, 1)
            if self.pos + n * size > len(self.buf):
                raise UnexpectedEndError(len(self.buf))
            return List(TagKind(elem), tuple(self.payload(elem, depth + 1) for _ in range(n)))
        if kind == TagKind.COMPOUND:
            children: dict[str, Tag] = {}
            while True:
                at = self.pos
                tid = self.tag_id()
                if tid == TagKind.END:
                    return Compound(children)
                name = self.string()
                if name in children:
                    raise ValidationError(f"duplicate compound key {name!r} at offset {at}")
                children[name] = self.payload(tid, depth + 1)
        if kind == TagKind.INT_ARRAY:
            n = self.length()
            at = self.take(4 * n)
            return IntArray(struct.unpack_from(f">{n}i", self.buf, at))
        if kind == TagKind.LONG_ARRAY:
            n = self.length()
            at = self.take(8 * n)
            return LongArray(struct.unpack_from(f">{n}q", self.buf, at))
        raise InvalidTagError(kind, self.pos)


def parse_nbt(data: bytes) -> NamedRoot:
    """Decode a raw or gzip-wrapped NBT payload holding one named Compound."""
    data = bytes(data)
    if is_gzip(data):
        try:
            data = gzip.decompress(data)
        except (OSError, EOFError, zlib.error) as exc:
            raise NBTError(f"corrupt gzip container: {exc}") from None
    r = _Reader(data)
    tid = r.tag_id()
    if tid != TagKind.COMPOUND:
        raise ValidationError(f"root tag must be a Compound (10), got {tid} at offset 0")
    name = r.string()
    tag = r.payload(tid, 0)
    if r.pos != len(data):
        raise TrailingDataError(f"{len(data) - r.pos} trailing bytes at offset {r.pos}")
    return NamedRoot(name, tag)


def _encode_string(s: str, out: list) -> None:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValidationError(f"string of {len(raw)} bytes exceeds u16 length prefix")
    out.append(_U16.pack(len(raw)))
    out.append(raw)


def _encode_payload(tag: Tag, out: list, depth: int) -> None:
    if depth > MAX_DEPTH:
        raise ValidationError(f"tree deeper than {MAX_DEPTH}")
    kind = tag.kind
    scalar = _SCALAR.get(kind)
    try:
        if scalar is not None:
            out.append(scalar[0].pack(tag.value))
        elif kind == TagKind.BYTE_ARRAY:
            out.append(_I32.pack(len(tag.value)))
            out.append(bytes(tag.value))
        elif kind == TagKind.STRING:
            _encode_string(tag.value, out)
        elif kind == TagKind.LIST:
            for item in tag.items:
                if not isinstance(item, Tag) or item.kind != tag.element_kind:
                    got = getattr(item, "kind", type(item).__name__)
                    raise ValidationError(
                        f"list declared {tag.element_kind.name} but holds {got!s}")
            if tag.element_kind == TagKind.END and tag.items:
                raise ValidationError("list of End tags must be empty")
            out.append(bytes([tag.element_kind]))
            out.append(_I32.pack(len(tag.items)))
            for item in tag.items:
                _encode_payload(item, out, depth + 1)
        elif kind == TagKind.COMPOUND:
            for name in sorted(tag.value):
                child = tag.value[name]
                if not isinstance(child, Tag):
                    raise ValidationError(f"compound child {name!r} is not a Tag")
                out.append(bytes([child.kind]))
                _encode_string(name, out)
                _encode_payload(child, out, depth + 1)
            out.append(b"\x00")
        elif kind == TagKind.INT_ARRAY:
            out.append(_I32.pack(len(tag.value)))
            out.append(struct.pack(f">{len(tag.value)}i", *tag.value))
        elif kind == TagKind.LONG_ARRAY:
            out.append(_I32.pack(len(tag.value)))
            out.append(struct.pack(f">{len(tag.value)}q", *tag.value))
        else:
            raise ValidationError(f"cannot encode tag kind {kind}")
    except struct.error as exc:
        raise ValidationError(f"{kind.name} value out of range: {exc}") from None


def write_nbt(root: NamedRoot, compress: bool = False) -> bytes:
    """Encode ``root``; with ``compress`` the output is gzip-wrapped (mtime 0)."""
    if not isinstance(root.tag, Compound):
        raise ValidationError("root tag must be a Compound")
    out: list[bytes] = [bytes([TagKind.COMPOUND])]
    _encode_string(root.name, out)
    _encode_payload(root.tag, out, 0)
    raw = b"".join(out)
    if compress:
        return gzip.compress(raw, compresslevel=6, mtime=0)
    return raw
