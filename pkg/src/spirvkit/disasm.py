"""Render SPIR-V binaries as text.

The output dialect matches the assembler: ``%name = OpX ...`` lines, ``;``
comments, quoted strings. Rendering is deterministic, and for every
information-preserving option combination the emitted text re-assembles to
the original bytes. Friendly names are only used where re-assembly provably
reproduces the original id numbering; anything else falls back to ``%<id>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import codec, grammar, ops
from .errors import CodecError

_ANSI = {
    "opcode": "\x1b[36m",
    "id": "\x1b[33m",
    "string": "\x1b[32m",
    "comment": "\x1b[90m",
    "reset": "\x1b[0m",
}

_SECTION_ORDER = {
    "OpCapability": 0,
    "OpExtension": 1,
    "OpExtInstImport": 2,
    "OpMemoryModel": 3,
    "OpEntryPoint": 4,
    "OpExecutionMode": 5,
    "OpExecutionModeId": 5,
}

_CLASS_SECTIONS = {
    "Debug": 6,
    "Annotation": 7,
    "Type-Declaration": 8,
    "Constant-Creation": 8,
}

_FUNCTION_SECTION = 9


@dataclass
class DisassemblerOptions:
    """Presentation toggles; all independent of each other."""

    highlight: bool = False
    inline_names: bool = True
    no_indent: bool = False
    group: bool = False
    no_header: bool = False


@dataclass
class RenderContext:
    """Per-module maps the per-instruction renderer draws from."""

    refs: dict[int, str] = field(default_factory=dict)  # id -> %ref text
    type_info: dict[int, tuple[int, bool, bool]] = field(default_factory=dict)
    value_type: dict[int, int] = field(default_factory=dict)
    import_sets: dict[int, str] = field(default_factory=dict)

    def ref(self, ident: int) -> str:
        return self.refs.get(ident) or f"%{ident}"

    def literal_resolver(self, opdef, decoded):
        """Resolve (width, signed, floating) for width-typed literals."""
        if opdef.name == "OpSwitch":
            if not decoded:
                return None
            selector = decoded[0].value
            return self.type_info.get(self.value_type.get(selector, -1))
        for operand in decoded:
            if operand.role == "result_type":
                return self.type_info.get(operand.value)
        return None


def _sanitize_name(raw: str) -> str:
    text = re.sub(r"[^0-9A-Za-z_]", "_", raw)
    if not text or text[0].isdigit():
        text = "_" + text
    return text


def _escape_string(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _format_float(value: float) -> str:
    return repr(value)


class Disassembler:
    """Streams one binary module out as text."""

    def __init__(self, spec: grammar.GrammarSpec | None = None,
                 ext: grammar.ExtInstGrammar | None = None,
                 options: DisassemblerOptions | None = None,
                 strict: bool = False):
        self.spec = spec if spec is not None else grammar.load_pinned()
        self.ext = ext if ext is not None else grammar.load_pinned_extended()
        self.options = options if options is not None else DisassemblerOptions()
        self.strict = strict

    # -- public API ----------------------------------------------------------

    def disassemble(self, data: bytes, sink) -> int:
        """Write the text to ``sink``; returns the number of lines written."""
        text = self.to_text(data)
        sink.write(text)
        return text.count("\n")

    def to_text(self, data: bytes) -> str:
        header, instructions = codec.decode_module(data)
        context = self._prescan(instructions)
        rendered = []  # (result_ref|None, [(text, color)], section)
        section = 0
        in_function = False
        for inst in instructions:
            section, in_function = self._advance_section(inst, section, in_function)
            result_ref, tokens = self._render(inst, context)
            rendered.append((result_ref, tokens, section))
        return self._layout(header, rendered)

    # -- prescan ---------------------------------------------------------------

    def _prescan(self, instructions) -> RenderContext:
        context = RenderContext()
        names: dict[int, str] = {}
        for inst in instructions:
            opname = self._opname(inst)
            words = inst.operands
            if opname == "OpTypeInt" and len(words) == 3:
                context.type_info[words[0]] = (words[1], words[2] == 1, False)
            elif opname == "OpTypeFloat" and len(words) >= 2:
                context.type_info[words[0]] = (words[1], False, True)
            elif opname == "OpExtInstImport" and len(words) >= 2:
                try:
                    context.import_sets[words[0]], _ = codec.decode_string_literal(words, 1)
                except CodecError:
                    pass
            elif opname == "OpName" and len(words) >= 2:
                try:
                    text, _ = codec.decode_string_literal(words, 1)
                except CodecError:
                    continue
                names.setdefault(words[0], text)
            opdef = self._opdef(inst)
            if opdef is not None and opdef.has_result and opdef.has_result_type:
                if len(words) >= 2:
                    context.value_type[words[1]] = words[0]
        context.refs = self._assign_refs(instructions, names, context)
        return context

    def _assign_refs(self, instructions, names: dict[int, str],
                     context: RenderContext) -> dict[int, str]:
        """Decide, per id, between a friendly name and the numeric form.

        Re-assembly binds each symbolic name at its defining line, taking the
        lowest id not pinned by a numeric name, in document order. A friendly
        name is only usable when that allocation lands exactly on the id it
        replaces; the loop below simulates the allocation and demotes any
        name that would shift the numbering, so round-tripping the text
        always reproduces the binary.
        """
        if not self.options.inline_names or not names:
            return {}
        definition_order = self._definition_order(instructions)
        unique_names: dict[int, str] = {}
        taken: set[str] = set()
        for ident in definition_order:
            if ident not in names:
                continue
            base = _sanitize_name(names[ident])
            candidate = base
            serial = 0
            while candidate in taken:
                candidate = f"{base}_{serial}"
                serial += 1
            taken.add(candidate)
            unique_names[ident] = candidate

        all_ids = self._all_ids(instructions, context)
        pinned = {i for i in all_ids if i not in unique_names}
        while True:
            assigned: set[int] = set()
            demoted = None
            for ident in definition_order:
                if ident in pinned:
                    continue
                fresh = 1
                while fresh in pinned or fresh in assigned:
                    fresh += 1
                if fresh != ident:
                    demoted = ident
                    break
                assigned.add(ident)
            if demoted is None:
                break
            pinned.add(demoted)
        return {i: f"%{unique_names[i]}" for i in definition_order
                if i in unique_names and i not in pinned}

    def _definition_order(self, instructions) -> list[int]:
        order: list[int] = []
        seen: set[int] = set()
        for inst in instructions:
            opdef = self._opdef(inst)
            if opdef is None or not opdef.has_result:
                continue
            index = 1 if opdef.has_result_type else 0
            if index < len(inst.operands) and inst.operands[index] not in seen:
                seen.add(inst.operands[index])
                order.append(inst.operands[index])
        return order

    def _all_ids(self, instructions, context: RenderContext) -> set[int]:
        ids: set[int] = set()
        for inst in instructions:
            opdef = self._opdef(inst)
            if opdef is None:
                continue
            try:
                decoded = ops.decode_operands(self.spec, opdef, inst.operands,
                                              literal_resolver=context.literal_resolver)
            except CodecError:
                continue
            self._collect_ids(decoded, ids)
        return ids

    def _collect_ids(self, decoded, out: set) -> None:
        for operand in decoded:
            if operand.role in ("result", "result_type", "id"):
                out.add(operand.value)
            elif operand.role == "composite":
                self._collect_ids(operand.components, out)

    # -- rendering ---------------------------------------------------------------

    def _opdef(self, inst):
        if self.spec.has_instruction(inst.opcode):
            return self.spec.instruction(inst.opcode)
        return None

    def _opname(self, inst) -> str | None:
        opdef = self._opdef(inst)
        return opdef.name if opdef is not None else None

    def _advance_section(self, inst, section: int, in_function: bool):
        opdef = self._opdef(inst)
        if opdef is None:
            return section, in_function
        if opdef.name == "OpFunction":
            return _FUNCTION_SECTION, True
        if in_function:
            return _FUNCTION_SECTION, opdef.name != "OpFunctionEnd"
        if opdef.name in _SECTION_ORDER:
            return _SECTION_ORDER[opdef.name], False
        if opdef.class_attr in _CLASS_SECTIONS:
            return _CLASS_SECTIONS[opdef.class_attr], False
        if opdef.name in ("OpVariable", "OpUndef"):
            return 8, False
        return section, in_function

    def _render(self, inst, context: RenderContext):
        """Render one instruction into (result_ref | None, colored tokens)."""
        opdef = self._opdef(inst)
        if opdef is None:
            if self.strict:
                raise CodecError(f"unknown opcode {inst.opcode}")
            tokens = [(f"OpUnknown({inst.opcode})", "opcode")]
            tokens.extend((f"!0x{w:08X}", None) for w in inst.operands)
            return None, tokens
        decoded = ops.decode_operands(self.spec, opdef, inst.operands,
                                      literal_resolver=context.literal_resolver)
        return format_operands(opdef, decoded, context, self.spec, self.ext)

    # -- layout -----------------------------------------------------------------

    def _layout(self, header, rendered) -> str:
        opts = self.options
        width = 0
        if not opts.no_indent:
            width = max((len(r) for r, _, _ in rendered if r), default=0)
        out: list[str] = []
        if not opts.no_header:
            generator_hi = header.generator_magic >> 16
            generator_lo = header.generator_magic & 0xFFFF
            for line in (
                "; SPIR-V",
                f"; Version: {header.major_version}.{header.minor_version}",
                f"; Generator: {generator_hi}; {generator_lo}",
                f"; Bound: {header.bound}",
                f"; Schema: {header.schema}",
            ):
                out.append(self._paint(line, "comment"))
        previous_section = None
        for result_ref, tokens, section in rendered:
            if opts.group and previous_section is not None and section != previous_section:
                out.append("")
            previous_section = section
            body = " ".join(self._paint(text, color) for text, color in tokens)
            if result_ref is not None:
                pad = " " * (width - len(result_ref)) if width else ""
                out.append(f"{pad}{self._paint(result_ref, 'id')} = {body}")
            else:
                pad = " " * (width + 3) if width else ""
                out.append(f"{pad}{body}")
        return "\n".join(out) + "\n" if out else ""

    def _paint(self, text: str, color: str | None) -> str:
        if not self.options.highlight or color is None:
            return text
        return f"{_ANSI[color]}{text}{_ANSI['reset']}"


def format_operands(opdef, decoded, context: RenderContext, spec, ext):
    """Build (result_ref, colored body tokens) from decoded operands."""
    tokens: list[tuple[str, str | None]] = [(opdef.name, "opcode")]
    result_ref = None
    ext_set_known = True
    if opdef.name == "OpExtInst":
        # The set id operand (third slot) decides how the instruction number
        # renders: by name for OpenCL.std imports, as a number otherwise.
        set_ids = [d.value for d in decoded if d.role == "id"]
        ext_set_known = bool(set_ids) and context.import_sets.get(set_ids[0]) == "OpenCL.std"
    for operand in decoded:
        if operand.role == "result":
            result_ref = context.ref(operand.value)
            continue
        tokens.extend(_operand_tokens(operand, context, spec, ext, ext_set_known))
    return result_ref, tokens


def _operand_tokens(operand, context, spec, ext, ext_set_known):
    role = operand.role
    if role in ("id", "result_type"):
        return [(context.ref(operand.value), "id")]
    if role == "value_enum":
        if operand.enumerant is not None:
            return [(operand.enumerant.name, None)]
        return [(str(operand.value), None)]
    if role == "bit_enum":
        if operand.value == 0 or operand.components:
            return [(_render_mask(operand), None)]
        return [(f"0x{operand.value:x}", None)]
    if role == "string":
        return [(f'"{_escape_string(operand.value)}"', "string")]
    if role == "ctx_number":
        value = operand.value
        text = _format_float(value) if isinstance(value, float) else str(value)
        return [(text, None)]
    if role == "ext_number":
        if ext_set_known and ext is not None and ext.has_instruction(operand.value):
            return [(ext.instruction(operand.value).name, None)]
        return [(str(operand.value), None)]
    if role == "spec_opcode":
        if spec.has_instruction(operand.value):
            return [(spec.instruction(operand.value).name[2:], None)]
        return [(str(operand.value), None)]
    if role == "composite":
        tokens = []
        for part in operand.components:
            tokens.extend(_operand_tokens(part, context, spec, ext, ext_set_known))
        return tokens
    return [(str(operand.value), None)]


def _render_mask(operand) -> str:
    if operand.value == 0:
        zero = next((e.name for e in operand.kind.enumerants or () if e.value == 0), "0")
        return zero
    return "|".join(e.name for e in operand.components)


def format_instruction(spec, inst, context: RenderContext | None = None,
                       ext: grammar.ExtInstGrammar | None = None) -> str:
    """Format a single raw instruction as one plain-text line."""
    context = context if context is not None else RenderContext()
    opdef = spec.instruction(inst.opcode)
    decoded = ops.decode_operands(spec, opdef, inst.operands,
                                  literal_resolver=context.literal_resolver)
    result_ref, tokens = format_operands(opdef, decoded, context, spec, ext)
    body = " ".join(text for text, _ in tokens)
    return f"{result_ref} = {body}" if result_ref is not None else body


def disassemble_module(data: bytes, options: DisassemblerOptions | None = None,
                       sink=None, spec=None, ext=None, strict: bool = False):
    """Disassemble bytes; returns the line count (or the text when sink is None)."""
    tool = Disassembler(spec=spec, ext=ext, options=options, strict=strict)
    if sink is None:
        return tool.to_text(data)
    return tool.disassemble(data, sink)
