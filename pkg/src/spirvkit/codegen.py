"""Build-time source generation from a loaded grammar.

Emits one artifact per instruction, one per generated operand kind, and the
mapper tables the assembler and disassembler run on. Artifact sets are
deterministic: identical grammar bytes produce byte-identical sources in a
stable order. Templates are plain placeholder substitution over the files
vendored in ``templates/``.
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass
from pathlib import Path
from string import Template

from . import grammar
from .errors import GenerationError

#: Operand kinds backed by hand-written runtime types instead of generated
#: sources: every Id-category kind plus the literal base kinds.
BASE_MAPPED_KINDS = frozenset({
    "LiteralInteger",
    "LiteralString",
    "LiteralContextDependentNumber",
    "LiteralExtInstInteger",
})

_CATEGORY_DIRS = {
    "Instruction": "instructions",
    "OperandKind": "kinds",
    "MapperTable": "mappers",
}


@dataclass(frozen=True)
class GeneratedArtifact:
    logical_name: str
    source_text: str
    category: str  # Instruction | OperandKind | MapperTable


@dataclass(frozen=True)
class MapperTables:
    """Runtime lookup tables covering the whole grammar."""

    name_to_opcode: dict[str, int]
    opcode_to_def: dict[int, grammar.InstructionDef]
    enum_name_to_value: dict[str, dict[str, int]]
    enum_value_to_name: dict[str, dict[int, str]]
    ext_name_to_number: dict[str, int]
    ext_number_to_name: dict[int, str]


def sanitize_identifier(raw_name: str, prefix: str = "") -> str:
    """Turn a grammar name into a valid identifier, optionally prefixed.

    Characters outside [A-Za-z0-9_] become underscores; a leading digit in
    the combined result is protected by a leading underscore. Sanitizing an
    already-sanitized name is a no-op.
    """
    if not raw_name:
        raise ValueError("cannot sanitize an empty name")
    cleaned = "".join(c if c.isascii() and (c.isalnum() or c == "_") else "_" for c in raw_name)
    combined = prefix + cleaned
    if combined[0].isdigit():
        combined = "_" + combined
    return combined


def _constant_name(raw: str) -> str:
    ident = sanitize_identifier(raw)
    return ident + "_" if keyword.iskeyword(ident) else ident


def _template(name: str) -> Template:
    path = Path(__file__).parent / "templates" / name
    return Template(path.read_text(encoding="utf-8"))


def _banner_fields(spec) -> dict[str, str]:
    label = f"SPIR-V {spec.major_version}.{spec.minor_version}"
    return {"grammar_label": label, "revision": str(spec.revision)}


def generate_instruction_definitions(spec: grammar.GrammarSpec) -> list[GeneratedArtifact]:
    """One artifact per instruction entry, ordered by (opcode, name)."""
    template = _template("instruction.py.tmpl")
    banner = _banner_fields(spec)
    artifacts = []
    for inst in sorted(spec.instructions, key=lambda i: (i.opcode, i.name)):
        ident = sanitize_identifier(inst.name)
        slots = "".join(
            f"    ({slot.kind!r}, {slot.name!r}, {slot.quantifier!r}),\n"
            for slot in inst.operands
        )
        source = template.substitute(
            name=inst.name,
            ident=ident,
            opcode=inst.opcode,
            class_attr=inst.class_attr,
            slots=slots.rstrip("\n"),
            **banner,
        )
        artifacts.append(GeneratedArtifact(ident, source, "Instruction"))
    return artifacts


def generate_operand_kind_definitions(spec: grammar.GrammarSpec) -> list[GeneratedArtifact]:
    """One artifact per generated operand kind, ordered by kind name.

    Id-category kinds and the literal base kinds map to hand-written runtime
    types, so no source is generated for them.
    """
    enum_template = _template("kind_enum.py.tmpl")
    literal_template = _template("kind_literal.py.tmpl")
    composite_template = _template("kind_composite.py.tmpl")
    banner = _banner_fields(spec)
    artifacts = []
    for kind in sorted(spec.operand_kinds, key=lambda k: k.kind):
        if kind.category == "Id" or kind.kind in BASE_MAPPED_KINDS:
            continue
        ident = sanitize_identifier(kind.kind)
        if kind.category == "Composite":
            bases = ", ".join(repr(b) for b in kind.bases or ())
            if kind.bases and len(kind.bases) == 1:
                bases += ","
            source = composite_template.substitute(kind=kind.kind, bases=bases, **banner)
        elif kind.category == "Literal":
            source = literal_template.substitute(kind=kind.kind, **banner)
        else:
            # Enumerants like "None" collide with keywords as constant names.
            constants = "\n".join(
                f"{_constant_name(e.name)} = {e.value}" for e in kind.enumerants or ()
            )
            name_to_value = "".join(
                f"    {e.name!r}: {e.value},\n" for e in kind.enumerants or ()
            )
            first_by_value: dict[int, str] = {}
            for e in kind.enumerants or ():
                first_by_value.setdefault(e.value, e.name)
            value_to_name = "".join(
                f"    {value}: {name!r},\n" for value, name in first_by_value.items()
            )
            source = enum_template.substitute(
                kind=kind.kind,
                category=kind.category,
                constants=constants,
                name_to_value=name_to_value.rstrip("\n"),
                value_to_name=value_to_name.rstrip("\n"),
                **banner,
            )
        artifacts.append(GeneratedArtifact(ident, source, "OperandKind"))
    return artifacts


def generate_mapper_tables(spec: grammar.GrammarSpec,
                           ext: grammar.ExtInstGrammar | None = None) -> MapperTables:
    """Build the assembler/disassembler lookup tables.

    Entries that repeat an opcode must be aliases (identical operand
    signatures); the first name in grammar order decodes the opcode.
    A conflicting duplicate opcode is a generation error.
    """
    name_to_opcode: dict[str, int] = {}
    opcode_to_def: dict[int, grammar.InstructionDef] = {}
    signatures: dict[int, tuple] = {}
    for inst in spec.instructions:
        if inst.name in name_to_opcode:
            raise GenerationError(f"duplicate instruction name {inst.name}")
        signature = tuple((s.kind, s.quantifier) for s in inst.operands)
        if inst.opcode in signatures and signatures[inst.opcode] != signature:
            raise GenerationError(
                f"opcode {inst.opcode} reused with a different signature by {inst.name}"
            )
        signatures[inst.opcode] = signature
        name_to_opcode[inst.name] = inst.opcode
        opcode_to_def.setdefault(inst.opcode, inst)
    enum_name_to_value: dict[str, dict[str, int]] = {}
    enum_value_to_name: dict[str, dict[int, str]] = {}
    for kind in spec.operand_kinds:
        if kind.category not in grammar.ENUM_CATEGORIES:
            continue
        forward: dict[str, int] = {}
        backward: dict[int, str] = {}
        for enum in kind.enumerants or ():
            forward[enum.name] = enum.value
            backward.setdefault(enum.value, enum.name)
        enum_name_to_value[kind.kind] = forward
        enum_value_to_name[kind.kind] = backward
    ext_name_to_number: dict[str, int] = {}
    ext_number_to_name: dict[int, str] = {}
    for inst in ext.instructions if ext is not None else ():
        ext_name_to_number[inst.name] = inst.opcode
        ext_number_to_name.setdefault(inst.opcode, inst.name)
    return MapperTables(
        name_to_opcode=name_to_opcode,
        opcode_to_def=opcode_to_def,
        enum_name_to_value=enum_name_to_value,
        enum_value_to_name=enum_value_to_name,
        ext_name_to_number=ext_name_to_number,
        ext_number_to_name=ext_number_to_name,
    )


def generate_mapper_artifacts(spec: grammar.GrammarSpec,
                              ext: grammar.ExtInstGrammar | None = None) -> list[GeneratedArtifact]:
    """Source form of the mapper tables: assembler, disassembler, extinst."""
    tables = generate_mapper_tables(spec, ext)
    template = _template("mapper.py.tmpl")
    banner = _banner_fields(spec)

    def dict_literal(name: str, mapping, key_repr=repr, value_repr=repr) -> str:
        lines = [f"{name} = {{"]
        lines.extend(f"    {key_repr(k)}: {value_repr(v)}," for k, v in mapping.items())
        lines.append("}")
        return "\n".join(lines)

    assembler_tables = [dict_literal("NAME_TO_OPCODE", tables.name_to_opcode)]
    for kind in sorted(tables.enum_name_to_value):
        assembler_tables.append(
            dict_literal(f"{sanitize_identifier(kind).upper()}_NAME_TO_VALUE",
                         tables.enum_name_to_value[kind])
        )
    disassembler_tables = [
        dict_literal("OPCODE_TO_NAME", {op: d.name for op, d in tables.opcode_to_def.items()})
    ]
    for kind in sorted(tables.enum_value_to_name):
        disassembler_tables.append(
            dict_literal(f"{sanitize_identifier(kind).upper()}_VALUE_TO_NAME",
                         tables.enum_value_to_name[kind])
        )
    ext_tables = [
        dict_literal("EXT_NAME_TO_NUMBER", tables.ext_name_to_number),
        dict_literal("EXT_NUMBER_TO_NAME", tables.ext_number_to_name),
    ]
    specs = [
        ("assembler_mapper", "Name-to-opcode and enumerant tables for assembly.", assembler_tables),
        ("disassembler_mapper", "Opcode-to-name and enumerant tables for disassembly.", disassembler_tables),
        ("extinst_mapper", "Extended instruction set name/number tables.", ext_tables),
    ]
    return [
        GeneratedArtifact(
            name,
            template.substitute(purpose=purpose, tables="\n\n".join(tables_text), **banner),
            "MapperTable",
        )
        for name, purpose, tables_text in specs
    ]


def generate_all(spec: grammar.GrammarSpec,
                 ext: grammar.ExtInstGrammar | None = None) -> list[GeneratedArtifact]:
    artifacts = generate_instruction_definitions(spec)
    artifacts += generate_operand_kind_definitions(spec)
    artifacts += generate_mapper_artifacts(spec, ext)
    return artifacts


def write_artifacts(artifacts, out_dir) -> list[Path]:
    """Write artifacts under ``<out_dir>/generated/{instructions,kinds,mappers}/``."""
    root = Path(out_dir) / "generated"
    written = []
    for artifact in artifacts:
        directory = root / _CATEGORY_DIRS[artifact.category]
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{artifact.logical_name}.py"
        path.write_text(artifact.source_text, encoding="utf-8")
        written.append(path)
    return written
