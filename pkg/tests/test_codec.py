import random
import struct

import pytest

import spirvkit as sk
from spirvkit import codec

# Frozen oracle words, computed by hand from the binary form rules
# (word0 = (count << 16) | opcode, strings packed little-endian with a NUL).
CAP_KERNEL_WORDS = [0x00020011, 0x00000006]
OPNOP_WORDS = [0x00010000]
OPENCL_STD_WORDS = [0x6E65704F, 0x732E4C43, 0x00006474]


def test_header_oracle():
    header = sk.ModuleHeader(1, 2, 32 << 16, 6, 0)
    assert sk.encode_header(header) == [0x07230203, 0x00010200, 0x00200000, 6, 0]


def test_header_magic_is_fixed(g12):
    assert codec.MAGIC == int(g12.magic_number, 16)
    for bound in (1, 77, 2**32 - 1):
        assert sk.encode_header(sk.ModuleHeader(1, 5, 0, bound))[0] == 0x07230203


def test_header_version_bytes():
    assert sk.encode_header(sk.ModuleHeader(1, 0, 0, 1))[1] == 0x00010000
    assert sk.encode_header(sk.ModuleHeader(1, 6, 0, 1))[1] == 0x00010600


def test_header_zero_bound_rejected():
    with pytest.raises(sk.CodecError):
        sk.encode_header(sk.ModuleHeader(1, 2, 0, 0))


def test_instruction_oracles():
    assert sk.encode_instruction(sk.RawInstruction(17, (6,))) == CAP_KERNEL_WORDS
    assert sk.encode_instruction(sk.RawInstruction(0)) == OPNOP_WORDS


def test_instruction_word_count_matches_length():
    rng = random.Random(7)
    for _ in range(200):
        inst = sk.RawInstruction(rng.randrange(0, 0x10000),
                                 tuple(rng.randrange(0, 2**32) for _ in range(rng.randrange(0, 20))))
        words = sk.encode_instruction(inst)
        assert (words[0] >> 16) == len(words) == inst.word_count


def test_instruction_overflow():
    with pytest.raises(sk.CodecError):
        sk.encode_instruction(sk.RawInstruction(1, tuple(range(0x10000))))


def test_string_literals():
    assert sk.encode_string_literal("OpenCL.std") == OPENCL_STD_WORDS
    assert sk.encode_string_literal("") == [0x00000000]
    assert sk.encode_string_literal("abc") == [0x00636261]


def test_string_embedded_nul_rejected():
    with pytest.raises(sk.CodecError):
        sk.encode_string_literal("a\x00b")


def test_string_length_rule():
    for text in ("", "a", "ab", "abc", "abcd", "abcde", "ünïcödé", "x" * 100):
        words = sk.encode_string_literal(text)
        assert len(words) == (len(text.encode("utf-8")) + 1 + 3) // 4


def test_string_round_trip():
    for text in ("", "main", "OpenCL.std", "white  space", "q\"uote\\back"):
        words = sk.encode_string_literal(text)
        decoded, consumed = codec.decode_string_literal(words)
        assert decoded == text
        assert consumed == len(words)


def test_context_dependent_literals():
    assert sk.encode_context_dependent_literal(42, 32) == [0x0000002A]
    assert sk.encode_context_dependent_literal(1, 64) == [0x00000001, 0x00000000]
    for width in (8, 16, 32, 64):
        words = sk.encode_context_dependent_literal(0, width)
        assert all(w == 0 for w in words)


def test_context_dependent_signed():
    assert sk.encode_context_dependent_literal(-1, 32, signed=True) == [0xFFFFFFFF]
    assert sk.encode_context_dependent_literal(-2, 16, signed=True) == [0xFFFFFFFE]
    assert sk.encode_context_dependent_literal(-1, 64, signed=True) == [0xFFFFFFFF, 0xFFFFFFFF]


def test_context_dependent_float():
    assert sk.encode_context_dependent_literal(1.0, 32, floating=True) == [0x3F800000]
    lo, hi = sk.encode_context_dependent_literal(1.0, 64, floating=True)
    assert (lo, hi) == (0, 0x3FF00000)


def test_context_dependent_unresolved_width():
    with pytest.raises(sk.CodecError):
        sk.encode_context_dependent_literal(1, None)


def test_context_dependent_range_checks():
    with pytest.raises(sk.CodecError):
        sk.encode_context_dependent_literal(256, 8)
    with pytest.raises(sk.CodecError):
        sk.encode_context_dependent_literal(128, 8, signed=True)


def test_decode_constructed_stream():
    words = [0x07230203, 0x00010200, 0, 0x00000001, 0, 0x00010000]
    data = struct.pack("<6I", *words)
    header, instructions = sk.decode_module(data)
    assert (header.major_version, header.minor_version) == (1, 2)
    assert header.bound == 1
    assert instructions == [sk.RawInstruction(0)]


def test_decode_byte_swapped_equivalent():
    words = [0x07230203, 0x00010200, 0, 0x00000001, 0, 0x00010000]
    little = struct.pack("<6I", *words)
    big = struct.pack(">6I", *words)
    assert sk.decode_module(little) == sk.decode_module(big)


def test_decode_truncated():
    with pytest.raises(sk.TruncatedStreamError):
        sk.decode_module(b"\x00" * 19)


def test_decode_bad_magic():
    with pytest.raises(sk.NotSpirvError):
        sk.decode_module(struct.pack("<5I", 0xDEADBEEF, 0, 0, 1, 0))


def test_decode_zero_word_count():
    words = [0x07230203, 0x00010200, 0, 1, 0, 0x00000011]
    with pytest.raises(sk.CorruptStreamError):
        sk.decode_module(struct.pack("<6I", *words))


def test_decode_instruction_past_end():
    words = [0x07230203, 0x00010200, 0, 1, 0, 0x00050011]
    with pytest.raises(sk.TruncatedStreamError):
        sk.decode_module(struct.pack("<6I", *words))


def _random_instructions(rng, count):
    return [
        sk.RawInstruction(rng.randrange(0, 0x10000),
                          tuple(rng.randrange(0, 2**32) for _ in range(rng.randrange(0, 8))))
        for _ in range(count)
    ]


def test_decode_encode_identity_random():
    rng = random.Random(99)
    for _ in range(50):
        header = sk.ModuleHeader(1, rng.randrange(0, 7), rng.randrange(0, 2**32),
                                 rng.randrange(1, 2**32), 0)
        instructions = _random_instructions(rng, rng.randrange(0, 30))
        data = sk.encode_module(header, instructions)
        decoded_header, decoded = sk.decode_module(data)
        assert decoded_header == header
        assert decoded == instructions
        assert sk.encode_module(decoded_header, decoded) == data
