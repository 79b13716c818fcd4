"""Typed instruction construction and grammar-driven operand walks.

One slot-walk engine drives three consumers: the typed constructors used by
the module builder, the assembler's token conversion, and the decoder used by
the disassembler and validator. The walk follows an instruction's grammar
slots, including enumerant parameters, optional tails, variadic tails and
composite (pair) kinds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import codec, grammar
from .codec import RawInstruction, TypedFloat, TypedInt
from .errors import CorruptStreamError, NotFoundError

_RESULT = "IdResult"
_RESULT_TYPE = "IdResultType"


@dataclass(frozen=True)
class Instruction:
    """A fully encoded instruction plus the ids it defines and references."""

    opdef: grammar.InstructionDef
    operand_words: tuple[int, ...]
    result_id: int | None = None
    result_type_id: int | None = None
    referenced_ids: tuple[int, ...] = ()

    @property
    def name(self) -> str:
        return self.opdef.name

    def raw(self) -> RawInstruction:
        return RawInstruction(self.opdef.opcode, self.operand_words)

    def __repr__(self):
        res = f"%{self.result_id} = " if self.result_id is not None else ""
        return f"<{res}{self.opdef.name} {list(self.operand_words)}>"


class _Cursor:
    """Flat input sequence consumed slot by slot."""

    def __init__(self, items):
        self.items = list(items)
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.items)

    def take(self, what: str):
        if self.done():
            raise ValueError(f"missing operand: expected {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item


def _coerce_id(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{what} expects an id, got {value!r}")
    if not 0 < value <= codec.WORD_MASK:
        raise ValueError(f"{what}: id {value} out of range")
    return value


def _split_mask_names(value) -> list[str]:
    if isinstance(value, str):
        return [part.strip() for part in value.split("|") if part.strip()]
    return [str(v) for v in value]


def _bit_components(kind: grammar.OperandKindDef, mask: int):
    """Set-bit enumerants covering ``mask`` in file order; None if impossible."""
    if mask == 0:
        return []
    parts = []
    covered = 0
    for enum in kind.enumerants or ():
        if enum.value and (mask & enum.value) == enum.value and (covered & enum.value) != enum.value:
            parts.append(enum)
            covered |= enum.value
    if covered != mask:
        return None
    return parts


class _EncodeRun:
    """Mutable state for one instruction encode; never shared."""

    __slots__ = ("words", "refs", "result", "result_type")

    def __init__(self):
        self.words: list[int] = []
        self.refs: list[int] = []
        self.result: int | None = None
        self.result_type: int | None = None


class Encoder:
    """Encodes operand inputs for one instruction against its grammar slots.

    ``coerce(kind, raw)``, when given, converts each raw input into a value
    the encoder understands just before it is consumed; the assembler uses
    this to turn source tokens into ids, enum names and typed literals.
    Encoders hold no per-call state, so one instance may serve concurrent
    callers.
    """

    def __init__(self, spec: grammar.GrammarSpec, ext: grammar.ExtInstGrammar | None,
                 coerce=None):
        self.spec = spec
        self.ext = ext
        self.coerce = coerce

    def encode(self, opdef: grammar.InstructionDef, inputs) -> Instruction:
        cursor = _Cursor(inputs)
        run = _EncodeRun()
        stopped = False
        for slot in opdef.operands:
            if slot.quantifier == grammar.QUANT_VARIADIC:
                while not cursor.done():
                    self._one(run, slot, cursor, opdef)
                break
            if slot.quantifier == grammar.QUANT_OPTIONAL:
                if cursor.done() or cursor.items[cursor.pos] is None:
                    if not cursor.done():
                        cursor.pos += 1
                    stopped = True
                    continue
                if stopped:
                    raise ValueError(
                        f"{opdef.name}: optional operand {slot.kind} given after an omitted one"
                    )
            self._one(run, slot, cursor, opdef)
            if slot.kind == "LiteralSpecConstantOpInteger":
                # The constituent operands of the wrapped instruction follow
                # the opcode literal but are not spelled out in the grammar.
                while not cursor.done():
                    self._value(run, self.spec.kind("IdRef"), cursor.take("id"), cursor, opdef)
        if not cursor.done():
            raise ValueError(
                f"{opdef.name}: {len(cursor.items) - cursor.pos} unexpected extra operand(s)"
            )
        return Instruction(
            opdef=opdef,
            operand_words=tuple(run.words),
            result_id=run.result,
            result_type_id=run.result_type,
            referenced_ids=tuple(run.refs),
        )

    def _one(self, run: _EncodeRun, slot: grammar.OperandSlot, cursor: _Cursor, opdef) -> None:
        value = cursor.take(f"{opdef.name} operand of kind {slot.kind}")
        self._value(run, self.spec.kind(slot.kind), value, cursor, opdef)

    def _value(self, run: _EncodeRun, kind: grammar.OperandKindDef, value,
               cursor: _Cursor, opdef) -> None:
        if self.coerce is not None:
            value = self.coerce(kind, value)
        category = kind.category
        if category == "Id":
            word = _coerce_id(value, f"{opdef.name} ({kind.kind})")
            run.words.append(word)
            if kind.kind == _RESULT:
                run.result = word
            else:
                run.refs.append(word)
                if kind.kind == _RESULT_TYPE:
                    run.result_type = word
            return
        if category == "ValueEnum":
            enum = kind.enumerant(value) if isinstance(value, str) else kind.enumerant(int(value))
            run.words.append(enum.value)
            for param in enum.parameters:
                self._one_param(run, param, cursor, opdef)
            return
        if category == "BitEnum":
            if isinstance(value, int) and not isinstance(value, bool):
                mask = value
                parts = _bit_components(kind, mask) or []
            else:
                mask = 0
                parts = []
                for name in _split_mask_names(value):
                    enum = kind.enumerant(name)
                    if enum.value and (mask & enum.value) != enum.value:
                        parts.append(enum)
                    mask |= enum.value
                parts.sort(key=lambda e: (kind.enumerants or ()).index(e))
            if not 0 <= mask <= codec.WORD_MASK:
                raise ValueError(f"{opdef.name}: {kind.kind} mask {mask:#x} out of range")
            run.words.append(mask)
            for enum in parts:
                for param in enum.parameters:
                    self._one_param(run, param, cursor, opdef)
            return
        if category == "Composite":
            bases = kind.bases or ()
            if isinstance(value, (tuple, list)):
                if len(value) != len(bases):
                    raise ValueError(
                        f"{opdef.name}: {kind.kind} needs {len(bases)} components"
                    )
                for base, component in zip(bases, value):
                    self._value(run, self.spec.kind(base), component, cursor, opdef)
            else:
                # Flat form: the value is the first component, the rest
                # follow in the input stream (how source tokens arrive).
                self._value(run, self.spec.kind(bases[0]), value, cursor, opdef)
                for base in bases[1:]:
                    self._one_param(run, grammar.OperandSlot(kind=base), cursor, opdef)
            return
        # Literal category.
        self._literal(run, kind, value, opdef)

    def _one_param(self, run: _EncodeRun, param: grammar.OperandSlot,
                   cursor: _Cursor, opdef) -> None:
        value = cursor.take(f"{opdef.name} enumerant parameter of kind {param.kind}")
        self._value(run, self.spec.kind(param.kind), value, cursor, opdef)

    def _literal(self, run: _EncodeRun, kind: grammar.OperandKindDef, value, opdef) -> None:
        name = kind.kind
        if name == "LiteralString":
            if not isinstance(value, str):
                raise ValueError(f"{opdef.name}: literal string expected, got {value!r}")
            run.words.extend(codec.encode_string_literal(value))
            return
        if name == "LiteralContextDependentNumber":
            if isinstance(value, TypedInt):
                run.words.extend(
                    codec.encode_context_dependent_literal(
                        value.value, value.width, signed=value.signed
                    )
                )
            elif isinstance(value, TypedFloat):
                run.words.extend(
                    codec.encode_context_dependent_literal(value.value, value.width, floating=True)
                )
            else:
                raise ValueError(
                    f"{opdef.name}: context-dependent literal needs a TypedInt or TypedFloat"
                )
            return
        if name == "LiteralInteger" and isinstance(value, TypedInt):
            # OpSwitch case literals take the selector type's width, which the
            # grammar cannot express; a TypedInt carries the resolved width.
            run.words.extend(
                codec.encode_context_dependent_literal(
                    value.value, value.width, signed=value.signed
                )
            )
            return
        if name == "LiteralExtInstInteger" and isinstance(value, str):
            if self.ext is None:
                raise ValueError(f"{opdef.name}: no extended grammar loaded to resolve {value!r}")
            run.words.append(self.ext.instruction(value).opcode)
            return
        if name == "LiteralSpecConstantOpInteger" and isinstance(value, str):
            opname = value if value.startswith("Op") else "Op" + value
            run.words.append(self.spec.instruction(opname).opcode)
            return
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"{opdef.name}: {name} expects an integer, got {value!r}")
        if not 0 <= value <= codec.WORD_MASK:
            raise ValueError(f"{opdef.name}: {name} value {value} out of range")
        run.words.append(value)


class InstructionFactory:
    """Constructor namespace: ``factory.OpIAdd(t, r, a, b)`` builds an Instruction.

    Constructors take one argument per grammar slot, in grammar order.
    ValueEnum operands accept the enumerant name or value, BitEnum operands a
    mask, a ``"A|B"`` string or an iterable of names; enumerant parameters
    follow their enumerant as additional arguments. Optional tail operands
    may be omitted; variadic tails take the remaining arguments.
    """

    def __init__(self, spec: grammar.GrammarSpec | None = None,
                 ext: grammar.ExtInstGrammar | None = None):
        self.spec = spec if spec is not None else grammar.load_pinned()
        self.ext = ext if ext is not None else grammar.load_pinned_extended()
        self._encoder = Encoder(self.spec, self.ext)

    def build(self, opname: str | int, *operands) -> Instruction:
        return self._encoder.encode(self.spec.instruction(opname), operands)

    def __getattr__(self, name: str):
        if name.startswith("Op"):
            try:
                opdef = self.spec.instruction(name)
            except NotFoundError:
                raise AttributeError(name) from None

            def construct(*operands, _opdef=opdef):
                return self._encoder.encode(_opdef, operands)

            construct.__name__ = name
            construct.__qualname__ = name
            setattr(self, name, construct)
            return construct
        raise AttributeError(name)


@lru_cache(maxsize=None)
def instruction_factory() -> InstructionFactory:
    """Shared factory over the vendored unified grammar snapshot."""
    return InstructionFactory()


@dataclass(frozen=True)
class DecodedOperand:
    """One decoded operand as produced by :func:`decode_operands`."""

    kind: grammar.OperandKindDef
    role: str  # result | result_type | id | value_enum | bit_enum | literal |
    #            string | ctx_number | ext_number | spec_opcode
    value: object
    enumerant: grammar.EnumerantDef | None = None
    components: tuple = ()  # bit_enum: covering enumerants; composite: parts


def decode_operands(spec: grammar.GrammarSpec, opdef: grammar.InstructionDef, words,
                    literal_resolver=None) -> list[DecodedOperand]:
    """Split raw operand words into decoded operands per the grammar slots.

    ``literal_resolver(opdef, decoded_so_far)`` supplies ``(width, signed,
    floating)`` for context-dependent literals; without one such literals are
    refused. Leftover words after all slots are consumed, or words running
    out mid-slot, raise CorruptStreamError.
    """
    state = _DecodeState(spec, list(words), literal_resolver)
    out: list[DecodedOperand] = []
    state.top = out
    for slot in opdef.operands:
        if slot.quantifier == grammar.QUANT_VARIADIC:
            while not state.done():
                state.one(slot.kind, opdef, out)
            break
        if slot.quantifier == grammar.QUANT_OPTIONAL and state.done():
            continue
        state.one(slot.kind, opdef, out)
        if slot.kind == "LiteralSpecConstantOpInteger":
            while not state.done():
                state.one("IdRef", opdef, out)
    if not state.done():
        raise CorruptStreamError(
            f"{opdef.name}: {len(state.words) - state.pos} leftover operand word(s)"
        )
    return out


class _DecodeState:
    def __init__(self, spec, words, literal_resolver):
        self.spec = spec
        self.words = words
        self.pos = 0
        self.literal_resolver = literal_resolver
        self.top: list = []  # top-level operands: the resolvers' context

    def done(self) -> bool:
        return self.pos >= len(self.words)

    def _next(self, opdef) -> int:
        if self.done():
            raise CorruptStreamError(f"{opdef.name}: operand words exhausted mid-instruction")
        word = self.words[self.pos]
        self.pos += 1
        return word

    def one(self, kind_name: str, opdef, out: list) -> None:
        kind = self.spec.kind(kind_name)
        category = kind.category
        if category == "Id":
            word = self._next(opdef)
            role = {"IdResult": "result", "IdResultType": "result_type"}.get(kind.kind, "id")
            out.append(DecodedOperand(kind, role, word))
            return
        if category == "ValueEnum":
            word = self._next(opdef)
            enum = None
            for e in kind.enumerants or ():
                if e.value == word:
                    enum = e
                    break
            out.append(DecodedOperand(kind, "value_enum", word, enumerant=enum))
            for param in enum.parameters if enum else ():
                self.one(param.kind, opdef, out)
            return
        if category == "BitEnum":
            mask = self._next(opdef)
            parts = _bit_components(kind, mask)
            out.append(DecodedOperand(kind, "bit_enum", mask, components=tuple(parts or ())))
            for enum in parts or ():
                for param in enum.parameters:
                    self.one(param.kind, opdef, out)
            return
        if category == "Composite":
            parts: list[DecodedOperand] = []
            for base in kind.bases or ():
                self.one(base, opdef, parts)
            out.append(DecodedOperand(kind, "composite", None, components=tuple(parts)))
            return
        self._decode_literal(kind, opdef, out)

    def _decode_literal(self, kind, opdef, out: list) -> None:
        name = kind.kind
        if name == "LiteralString":
            text, self.pos = codec.decode_string_literal(self.words, self.pos)
            out.append(DecodedOperand(kind, "string", text))
            return
        if name == "LiteralContextDependentNumber":
            resolved = self.literal_resolver(opdef, self.top) if self.literal_resolver else None
            if resolved is None:
                raise CorruptStreamError(
                    f"{opdef.name}: cannot resolve the width of a context-dependent literal"
                )
            width, signed, floating = resolved
            need = codec.literal_word_count(width)
            raw = [self._next(opdef) for _ in range(need)]
            value = codec.decode_context_dependent_literal(
                raw, signed=signed, floating=floating, bit_width=width
            )
            out.append(DecodedOperand(kind, "ctx_number", value))
            return
        if name == "LiteralInteger" and opdef.name == "OpSwitch" and self.literal_resolver:
            resolved = self.literal_resolver(opdef, self.top)
            if resolved is not None:
                width, signed, _ = resolved
                raw = [self._next(opdef) for _ in range(codec.literal_word_count(width))]
                value = codec.decode_context_dependent_literal(
                    raw, signed=signed, bit_width=width
                )
                out.append(DecodedOperand(kind, "literal", value))
                return
        word = self._next(opdef)
        role = {
            "LiteralExtInstInteger": "ext_number",
            "LiteralSpecConstantOpInteger": "spec_opcode",
        }.get(name, "literal")
        out.append(DecodedOperand(kind, role, word))
