"""Structural and capability validation of SPIR-V modules.

All findings come back as diagnostics; nothing raises. Diagnostic codes are
stable and machine-readable:

======================  ========  ==================================================
code                    severity  meaning
======================  ========  ==================================================
NotSpirv                error     input bytes are not a SPIR-V module
TruncatedStream         error     word stream ends mid-header or mid-instruction
CorruptStream           error     impossible stream structure (word count 0, ...)
MissingFunction         error     no function is declared
MissingCapability       error     no capability declared / a required one missing
MissingMemoryModel      error     no memory model instruction
MultipleMemoryModels    error     more than one memory model instruction
MissingEntryPoint       error*    no entry point (*warning when Linkage is declared)
DuplicateResultId       error     an id is defined by more than one instruction
BoundTooSmall           error     header bound does not exceed every used id
OperandMismatch         error     operand words do not match the grammar slots
UnknownOpcode           warning   opcode not covered by the loaded grammar
==========================================================================

This validator is deliberately narrower than spirv-val: modules it accepts
are meant to also pass spirv-val, not the other way around.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import builder, codec, grammar, ops
from .errors import CodecError, CorruptStreamError, NotSpirvError, TruncatedStreamError

#: Width-dependent capability requirements the grammar cannot express.
#: Any one of the listed capabilities satisfies the requirement.
_WIDTH_CAPABILITIES = {
    ("OpTypeInt", 8): ("Int8",),
    ("OpTypeInt", 16): ("Int16",),
    ("OpTypeInt", 64): ("Int64",),
    ("OpTypeFloat", 16): ("Float16", "Float16Buffer"),
    ("OpTypeFloat", 64): ("Float64",),
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    location: int | None  # instruction index, or None for module-level findings
    message: str

    def __str__(self):
        where = "module" if self.location is None else str(self.location)
        return f"{self.severity} {self.code} {where} {self.message}"


def _err(code, location, message):
    return Diagnostic("error", code, location, message)


def _warn(code, location, message):
    return Diagnostic("warning", code, location, message)


def _decode_input(module):
    if isinstance(module, builder.ModuleScope):
        module = module.to_bytes()
    if isinstance(module, (bytes, bytearray)):
        return codec.decode_module(bytes(module))
    raise TypeError("validate_module expects bytes or a ModuleScope")


def validate_module(module, spec: grammar.GrammarSpec | None = None) -> list[Diagnostic]:
    """Run every check; an empty list means the module passed all of them."""
    spec = spec if spec is not None else grammar.load_pinned()
    try:
        header, instructions = _decode_input(module)
    except NotSpirvError as exc:
        return [_err("NotSpirv", None, str(exc))]
    except TruncatedStreamError as exc:
        return [_err("TruncatedStream", None, str(exc))]
    except CorruptStreamError as exc:
        return [_err("CorruptStream", None, str(exc))]

    diagnostics: list[Diagnostic] = []
    diagnostics.extend(_check_module_shape(instructions, spec))
    located: list[Diagnostic] = []
    located.extend(_check_ids(header, instructions, spec))
    located.extend(_check_operand_layout(instructions, spec))
    located.extend(_closure_diagnostics(instructions, spec))
    # Module-level findings first, then everything ordered by instruction.
    located.sort(key=lambda d: -1 if d.location is None else d.location)
    diagnostics.extend(located)
    return diagnostics


def _opdef(spec, inst):
    return spec.instruction(inst.opcode) if spec.has_instruction(inst.opcode) else None


def _declared_capabilities(instructions, spec) -> set[str]:
    declared = set()
    cap_kind = spec.kind("Capability") if spec.has_kind("Capability") else None
    for inst in instructions:
        opdef = _opdef(spec, inst)
        if opdef is not None and opdef.name == "OpCapability" and inst.operands:
            if cap_kind is not None:
                for enum in cap_kind.enumerants or ():
                    if enum.value == inst.operands[0]:
                        declared.add(enum.name)
                        break
    return declared


def _check_module_shape(instructions, spec) -> list[Diagnostic]:
    names = []
    for inst in instructions:
        opdef = _opdef(spec, inst)
        names.append(opdef.name if opdef else None)
    out = []
    if "OpFunction" not in names:
        out.append(_err("MissingFunction", None, "module declares no function"))
    if "OpCapability" not in names:
        out.append(_err("MissingCapability", None, "module declares no capability"))
    memory_models = names.count("OpMemoryModel")
    if memory_models == 0:
        out.append(_err("MissingMemoryModel", None, "module has no memory model"))
    elif memory_models > 1:
        out.append(_err("MultipleMemoryModels", None,
                        f"module has {memory_models} memory model instructions"))
    if "OpEntryPoint" not in names:
        effective = grammar.transitive_capabilities(
            spec, _declared_capabilities(instructions, spec))
        make = _warn if "Linkage" in effective else _err
        out.append(make("MissingEntryPoint", None, "module declares no entry point"))
    return out


def _check_ids(header, instructions, spec) -> list[Diagnostic]:
    out = []
    defined: dict[int, int] = {}
    for index, inst in enumerate(instructions):
        opdef = _opdef(spec, inst)
        if opdef is None or not opdef.has_result:
            continue
        result_index = 1 if opdef.has_result_type else 0
        if result_index >= len(inst.operands):
            continue  # reported by the operand-layout check
        result = inst.operands[result_index]
        if result in defined:
            out.append(_err("DuplicateResultId", index,
                            f"%{result} already defined at instruction {defined[result]}"))
        else:
            defined[result] = index
    resolver = _make_resolver(instructions, spec)
    for index, inst in enumerate(instructions):
        opdef = _opdef(spec, inst)
        if opdef is None:
            continue
        try:
            decoded = ops.decode_operands(spec, opdef, inst.operands, literal_resolver=resolver)
        except CodecError:
            continue
        for operand in _flat(decoded):
            if operand.role in ("result", "result_type", "id") and operand.value >= header.bound:
                out.append(_err("BoundTooSmall", index,
                                f"%{operand.value} is not below the header bound {header.bound}"))
    return out


def _flat(decoded):
    for operand in decoded:
        if operand.role == "composite":
            yield from _flat(operand.components)
        else:
            yield operand


def _make_resolver(instructions, spec):
    type_info = {}
    value_type = {}
    for inst in instructions:
        opdef = _opdef(spec, inst)
        if opdef is None:
            continue
        words = inst.operands
        if opdef.name == "OpTypeInt" and len(words) == 3:
            type_info[words[0]] = (words[1], words[2] == 1, False)
        elif opdef.name == "OpTypeFloat" and len(words) >= 2:
            type_info[words[0]] = (words[1], False, True)
        if opdef.has_result and opdef.has_result_type and len(words) >= 2:
            value_type[words[1]] = words[0]

    def resolver(opdef, decoded):
        if opdef.name == "OpSwitch":
            if not decoded:
                return None
            return type_info.get(value_type.get(decoded[0].value, -1))
        for operand in decoded:
            if operand.role == "result_type":
                return type_info.get(operand.value)
        return None

    return resolver


def _check_operand_layout(instructions, spec) -> list[Diagnostic]:
    out = []
    resolver = _make_resolver(instructions, spec)
    for index, inst in enumerate(instructions):
        opdef = _opdef(spec, inst)
        if opdef is None:
            out.append(_warn("UnknownOpcode", index,
                             f"opcode {inst.opcode} is not in the loaded grammar"))
            continue
        try:
            ops.decode_operands(spec, opdef, inst.operands, literal_resolver=resolver)
        except CodecError as exc:
            out.append(_err("OperandMismatch", index, str(exc)))
    return out


def check_capability_closure(module, spec: grammar.GrammarSpec | None = None) -> list[Diagnostic]:
    """Check that every used instruction and enumerant has its capabilities.

    A requirement lists alternatives: any one declared (or transitively
    implied, or aliased) capability satisfies it.
    """
    spec = spec if spec is not None else grammar.load_pinned()
    try:
        _, instructions = _decode_input(module)
    except CodecError as exc:
        return [_err("CorruptStream", None, str(exc))]
    return _closure_diagnostics(instructions, spec)


def _closure_diagnostics(instructions, spec) -> list[Diagnostic]:
    declared = _declared_capabilities(instructions, spec)
    effective = grammar.transitive_capabilities(spec, declared)
    resolver = _make_resolver(instructions, spec)
    out = []
    for index, inst in enumerate(instructions):
        opdef = _opdef(spec, inst)
        if opdef is None:
            continue
        if opdef.name == "OpCapability":
            continue  # declaring a capability never requires one
        missing = _unsatisfied(opdef.required_capabilities, effective)
        if missing:
            out.append(_err("MissingCapability", index,
                            f"{opdef.name} requires one of {missing}"))
        try:
            decoded = ops.decode_operands(spec, opdef, inst.operands, literal_resolver=resolver)
        except CodecError:
            continue
        for operand in _flat(decoded):
            for requirement in _operand_requirements(operand):
                missing = _unsatisfied(requirement, effective)
                if missing:
                    out.append(_err("MissingCapability", index,
                                    f"{opdef.name} operand requires one of {missing}"))
        width_req = _width_requirement(opdef, inst)
        missing = _unsatisfied(width_req, effective)
        if missing:
            out.append(_err("MissingCapability", index,
                            f"{opdef.name} with this width requires one of {missing}"))
    return out


def _operand_requirements(operand) -> list[tuple[str, ...]]:
    """Capability requirements carried by one operand, one tuple per rule."""
    if operand.role == "value_enum" and operand.enumerant is not None:
        # Alias names share a value; any alias's capabilities satisfy it.
        merged = []
        for other in operand.kind.enumerants or ():
            if other.value == operand.enumerant.value:
                merged.extend(other.required_capabilities)
        requirement = tuple(dict.fromkeys(merged))
        return [requirement] if requirement else []
    if operand.role == "bit_enum":
        # Every set bit must be satisfied on its own.
        return [e.required_capabilities for e in operand.components if e.required_capabilities]
    return []


def _unsatisfied(requirement, effective) -> tuple[str, ...]:
    """The requirement back, unless some alternative is already effective."""
    if not requirement or any(cap in effective for cap in requirement):
        return ()
    return tuple(requirement)


def _width_requirement(opdef, inst) -> tuple[str, ...]:
    if opdef.name in ("OpTypeInt", "OpTypeFloat") and len(inst.operands) >= 2:
        return _WIDTH_CAPABILITIES.get((opdef.name, inst.operands[1]), ())
    return ()


def diagnostics_text(diagnostics) -> str:
    """One diagnostic per line, suitable for CI output."""
    return "\n".join(str(d) for d in diagnostics)
