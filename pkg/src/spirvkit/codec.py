"""Bit-exact SPIR-V binary encoding and decoding.

A module is a stream of 32-bit words: a five word header followed by
instructions. Every instruction packs its word count and opcode into the
first word. Emission is always little-endian; decoding detects either byte
order from the magic word.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import CodecError, CorruptStreamError, NotSpirvError, TruncatedStreamError

MAGIC = 0x07230203
WORD_MASK = 0xFFFFFFFF
HEADER_WORDS = 5

_FLOAT_FMT = {16: "<e", 32: "<f", 64: "<d"}


@dataclass(frozen=True)
class ModuleHeader:
    major_version: int
    minor_version: int
    generator_magic: int
    bound: int
    schema: int = 0


@dataclass(frozen=True)
class RawInstruction:
    """Opcode plus operand words; the bit-exact instruction layer."""

    opcode: int
    operands: tuple[int, ...] = ()

    @property
    def word_count(self) -> int:
        return 1 + len(self.operands)


@dataclass(frozen=True)
class TypedInt:
    """Integer for a context-dependent literal slot, with resolved width."""

    value: int
    width: int
    signed: bool = False


@dataclass(frozen=True)
class TypedFloat:
    """Float for a context-dependent literal slot, with resolved width."""

    value: float
    width: int


def encode_header(header: ModuleHeader) -> list[int]:
    """Encode the five header words.

    A bound of 0 is the builder's construction-time placeholder and must have
    been recomputed before any bytes are emitted.
    """
    if header.bound == 0:
        raise CodecError("header bound is 0; recompute the bound before serializing")
    if not 0 < header.bound <= WORD_MASK:
        raise CodecError(f"header bound {header.bound} out of range")
    if not (0 <= header.major_version <= 0xFF and 0 <= header.minor_version <= 0xFF):
        raise CodecError("version bytes out of range")
    return [
        MAGIC,
        (header.major_version << 16) | (header.minor_version << 8),
        header.generator_magic & WORD_MASK,
        header.bound,
        header.schema & WORD_MASK,
    ]


def decode_header(words) -> ModuleHeader:
    return ModuleHeader(
        major_version=(words[1] >> 16) & 0xFF,
        minor_version=(words[1] >> 8) & 0xFF,
        generator_magic=words[2],
        bound=words[3],
        schema=words[4],
    )


def encode_instruction(inst: RawInstruction) -> list[int]:
    """First word is (wordCount << 16) | opcode, then the operand words."""
    count = inst.word_count
    if count > 0xFFFF:
        raise CodecError(f"instruction length {count} words overflows the 16-bit count")
    if not 0 <= inst.opcode <= 0xFFFF:
        raise CodecError(f"opcode {inst.opcode} out of range")
    words = [(count << 16) | inst.opcode]
    words.extend(w & WORD_MASK for w in inst.operands)
    return words


def encode_string_literal(text: str) -> list[int]:
    """UTF-8 bytes plus a NUL terminator, zero-padded to a word boundary.

    The first byte lands in the lowest-order position of the first word.
    """
    data = text.encode("utf-8")
    if 0 in data:
        raise CodecError("string literal contains an embedded NUL byte")
    data += b"\x00"
    data += b"\x00" * (-len(data) % 4)
    return list(struct.unpack(f"<{len(data) // 4}I", data))


def decode_string_literal(words, start: int = 0) -> tuple[str, int]:
    """Read a NUL-terminated string starting at word index ``start``.

    Returns the text and the index of the first word past the literal.
    """
    chunks = []
    for i in range(start, len(words)):
        raw = struct.pack("<I", words[i])
        if 0 in raw:
            chunks.append(raw[: raw.index(0)])
            return b"".join(chunks).decode("utf-8"), i + 1
        chunks.append(raw)
    raise CorruptStreamError("string literal is not NUL-terminated")


def encode_context_dependent_literal(value, bit_width: int | None, *, signed: bool = False,
                                     floating: bool = False) -> list[int]:
    """Encode a literal whose width comes from the governing type instruction.

    Widths up to 32 occupy one word; width 64 occupies two, low word first.
    The caller resolves the width; an unresolved width is refused rather than
    silently assumed to be 32 bits.
    """
    if bit_width is None:
        raise CodecError("context-dependent literal has an unresolved bit width")
    if bit_width not in (8, 16, 32, 64):
        raise CodecError(f"unsupported literal width {bit_width}")
    if floating:
        try:
            raw = struct.pack(_FLOAT_FMT[bit_width], value)
        except KeyError:
            raise CodecError(f"unsupported float width {bit_width}") from None
        if bit_width == 64:
            lo, hi = struct.unpack("<2I", raw)
            return [lo, hi]
        return [struct.unpack("<I", raw.ljust(4, b"\x00"))[0]]
    value = int(value)
    if signed:
        limit = 1 << (bit_width - 1)
        if not -limit <= value < limit:
            raise CodecError(f"value {value} does not fit a signed {bit_width}-bit literal")
    else:
        if not 0 <= value < (1 << bit_width):
            raise CodecError(f"value {value} does not fit an unsigned {bit_width}-bit literal")
    bits = value & ((1 << bit_width) - 1)
    if bit_width == 64:
        return [bits & WORD_MASK, (bits >> 32) & WORD_MASK]
    if signed and value < 0:
        # Sign-extend into the full word so the stored word reproduces the
        # value under the governing type's interpretation.
        bits |= (WORD_MASK << bit_width) & WORD_MASK
    return [bits]


def decode_context_dependent_literal(words, *, signed: bool = False, floating: bool = False,
                                     bit_width: int = 32):
    """Inverse of encode_context_dependent_literal over already-split words."""
    if floating:
        if bit_width == 64:
            return struct.unpack("<d", struct.pack("<2I", words[0], words[1]))[0]
        raw = struct.pack("<I", words[0])
        return struct.unpack(_FLOAT_FMT[bit_width], raw[: bit_width // 8])[0]
    if bit_width == 64:
        bits = words[0] | (words[1] << 32)
    else:
        bits = words[0] & ((1 << bit_width) - 1)
    if signed and bits >= (1 << (bit_width - 1)):
        bits -= 1 << bit_width
    return bits


def literal_word_count(bit_width: int) -> int:
    return 2 if bit_width == 64 else 1


def encode_module(header: ModuleHeader, instructions) -> bytes:
    words = encode_header(header)
    for inst in instructions:
        words.extend(encode_instruction(inst))
    return struct.pack(f"<{len(words)}I", *words)


def decode_module(data: bytes) -> tuple[ModuleHeader, list[RawInstruction]]:
    """Split a binary module into its header and raw instructions.

    Byte order is detected from the magic word; a byte-swapped module decodes
    to the same result as its little-endian twin.
    """
    if len(data) % 4 != 0 or len(data) < HEADER_WORDS * 4:
        raise TruncatedStreamError(
            f"{len(data)} bytes is not a whole word stream of at least {HEADER_WORDS} words"
        )
    count = len(data) // 4
    words = struct.unpack(f"<{count}I", data)
    if words[0] != MAGIC:
        swapped = struct.unpack(f">{count}I", data)
        if swapped[0] != MAGIC:
            raise NotSpirvError(f"magic word 0x{words[0]:08X} is not SPIR-V")
        words = swapped
    header = decode_header(words)
    instructions = []
    pos = HEADER_WORDS
    while pos < count:
        first = words[pos]
        word_count = first >> 16
        opcode = first & 0xFFFF
        if word_count == 0:
            raise CorruptStreamError(f"instruction at word {pos} has word count 0")
        if pos + word_count > count:
            raise TruncatedStreamError(
                f"instruction at word {pos} runs past the end of the stream"
            )
        instructions.append(RawInstruction(opcode, tuple(words[pos + 1 : pos + word_count])))
        pos += word_count
    return header, instructions
