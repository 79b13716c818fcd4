"""Assemble SPIR-V disassembly text into a binary module.

The dialect is the Khronos one: one instruction per line, optional
``%name =`` result column, ``;`` comments, quoted string literals. Symbolic
names bind to fresh ids at first mention (forward references included);
numeric names like ``%13`` pin that exact id value so binaries round-trip
byte for byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import builder, grammar, ops
from .codec import TypedFloat, TypedInt
from .errors import (
    AsmDiagnostic,
    AssemblyError,
    NotFoundError,
    ScopeError,
    SpirvKitError,
)

_HEADER_PATTERNS = (
    ("version", re.compile(r";\s*Version:\s*(\d+)\.(\d+)\s*$")),
    ("generator", re.compile(r";\s*Generator:\s*(\d+);\s*(\d+)\s*$")),
    ("schema", re.compile(r";\s*Schema:\s*(\d+)\s*$")),
)

_INT_TOKEN = re.compile(r"[+-]?(0[xX][0-9a-fA-F]+|\d+)$")


@dataclass(frozen=True)
class Token:
    text: str
    column: int  # 1-based
    is_string: bool = False


@dataclass
class TextInstruction:
    """One parsed source line: optional result name, opcode, operand tokens."""

    result: Token | None
    opname: Token
    operands: list[Token]
    line: int


def tokenize_line(line: str, lineno: int = 1) -> TextInstruction | None:
    """Split one logical line; returns None for blank and comment lines.

    Quoted strings stay single tokens with backslash escapes resolved; an
    unterminated string is a syntax error carrying the opening column.
    """
    tokens: list[Token] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == ";":
            break
        start = i
        if ch == '"':
            i += 1
            chunk: list[str] = []
            while i < n and line[i] != '"':
                if line[i] == "\\" and i + 1 < n:
                    i += 1
                chunk.append(line[i])
                i += 1
            if i >= n:
                raise AssemblyError([AsmDiagnostic(lineno, start + 1, "unterminated string literal")])
            i += 1
            tokens.append(Token("".join(chunk), start + 1, is_string=True))
            continue
        while i < n and line[i] not in ' \t\r\n;"':
            i += 1
        tokens.append(Token(line[start:i], start + 1))
    if not tokens:
        return None
    result = None
    if len(tokens) >= 3 and tokens[0].text.startswith("%") and tokens[1].text == "=":
        result = tokens[0]
        tokens = tokens[2:]
    return TextInstruction(result=result, opname=tokens[0], operands=tokens[1:], line=lineno)


class SymbolTable:
    """Bijective mapping between textual names and module ids.

    Numeric names (``%13``) pin their exact value; symbolic names allocate
    the lowest unused id at first mention, which is what makes re-assembly of
    our own disassembly the identity.
    """

    def __init__(self, module: builder.ModuleScope):
        self.module = module
        self.by_name: dict[str, builder.Id] = {}
        self.by_id: dict[int, str] = {}

    def resolve(self, name: str) -> builder.Id:
        if not name.startswith("%") or len(name) == 1:
            raise ValueError(f"expected an id like %name, got {name!r}")
        try:
            return self.by_name[name]
        except KeyError:
            pass
        body = name[1:]
        if body.isdigit():
            ident = self.module.reserve_id(int(body))
        else:
            ident = self.module.new_id()
        self.by_name[name] = ident
        self.by_id[int(ident)] = name
        return ident


class Assembler:
    """Parses a whole document and serializes it through the module builder."""

    def __init__(self, spec: grammar.GrammarSpec | None = None,
                 ext: grammar.ExtInstGrammar | None = None,
                 default_version: tuple[int, int] = (1, 2)):
        self.spec = spec if spec is not None else grammar.load_pinned()
        self.ext = ext if ext is not None else grammar.load_pinned_extended()
        self.default_version = default_version

    def assemble(self, text: str) -> bytes:
        """Assemble a full document; raises AssemblyError with all diagnostics."""
        diagnostics: list[AsmDiagnostic] = []
        lines: list[TextInstruction] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            try:
                parsed = tokenize_line(raw, lineno)
            except AssemblyError as exc:
                diagnostics.extend(exc.diagnostics)
                continue
            if parsed is not None:
                lines.append(parsed)

        module = self._create_module(text)
        symbols = SymbolTable(module)
        # Pin every numeric name up front so fresh allocation never collides
        # with a pin that only appears later in the document.
        for parsed in lines:
            for token in self._id_tokens(parsed):
                if token.text[1:].isdigit():
                    module.reserve_id(int(token.text[1:]))
        # Bind symbolic names at their defining line, in document order, so
        # ids land where the disassembler's numbering simulation expects
        # them; uses before the definition then resolve to the same id.
        for parsed in lines:
            if parsed.result is not None and not parsed.result.text[1:].isdigit():
                try:
                    symbols.resolve(parsed.result.text)
                except (ValueError, SpirvKitError) as exc:
                    diagnostics.append(
                        AsmDiagnostic(parsed.line, parsed.result.column, str(exc)))

        widths = self._scan_type_widths(lines)
        value_types = self._scan_value_types(lines)

        current_function: builder.FunctionScope | None = None
        current_block: builder.BlockScope | None = None
        for parsed in lines:
            try:
                current_function, current_block = self._emit(
                    parsed, module, symbols, widths, value_types,
                    current_function, current_block,
                )
            except (SpirvKitError, ValueError, KeyError) as exc:
                diagnostics.append(AsmDiagnostic(parsed.line, parsed.opname.column, str(exc)))
        if diagnostics:
            raise AssemblyError(diagnostics)
        return module.to_bytes()

    # -- document scans ------------------------------------------------------

    def _create_module(self, text: str) -> builder.ModuleScope:
        version = self.default_version
        generator_word = None
        schema = 0
        for raw in text.splitlines():
            stripped = raw.strip()
            if stripped and not stripped.startswith(";"):
                break
            for key, pattern in _HEADER_PATTERNS:
                match = pattern.match(stripped)
                if not match:
                    continue
                if key == "version":
                    version = (int(match.group(1)), int(match.group(2)))
                elif key == "generator":
                    generator_word = (int(match.group(1)) << 16) | int(match.group(2))
                else:
                    schema = int(match.group(1))
        module = builder.create_module(version[0], version[1], schema=schema,
                                       factory=ops.InstructionFactory(self.spec, self.ext))
        if generator_word is not None:
            module.generator_magic = generator_word
        return module

    def _id_tokens(self, parsed: TextInstruction):
        if parsed.result is not None:
            yield parsed.result
        for token in parsed.operands:
            if not token.is_string and token.text.startswith("%"):
                yield token

    def _scan_type_widths(self, lines) -> dict[str, tuple[int, bool, bool]]:
        """Map type result names to (bit width, signed, floating)."""
        widths: dict[str, tuple[int, bool, bool]] = {}
        for parsed in lines:
            if parsed.result is None or not parsed.operands:
                continue
            name = parsed.opname.text
            try:
                if name == "OpTypeInt":
                    width = int(parsed.operands[0].text, 0)
                    signed = int(parsed.operands[1].text, 0) == 1
                    widths[parsed.result.text] = (width, signed, False)
                elif name == "OpTypeFloat":
                    widths[parsed.result.text] = (int(parsed.operands[0].text, 0), False, True)
            except (ValueError, IndexError):
                continue  # reported later by the real operand walk
        return widths

    def _scan_value_types(self, lines) -> dict[str, str]:
        """Map result names to their result-type token (for OpSwitch widths)."""
        value_types: dict[str, str] = {}
        for parsed in lines:
            if parsed.result is None or not parsed.operands:
                continue
            try:
                opdef = self.spec.instruction(parsed.opname.text)
            except NotFoundError:
                continue
            if opdef.has_result_type and parsed.operands[0].text.startswith("%"):
                value_types[parsed.result.text] = parsed.operands[0].text
        return value_types

    # -- per-line emission -----------------------------------------------------

    def _emit(self, parsed, module, symbols, widths, value_types,
              current_function, current_block):
        name = parsed.opname.text
        opdef = self.spec.instruction(name)  # NotFoundError: unknown opcode

        if name == "OpLabel":
            if current_function is None:
                raise ScopeError("OpLabel outside a function")
            if parsed.result is None:
                raise ValueError("OpLabel needs a result name")
            label = symbols.resolve(parsed.result.text)
            current_block = current_function.begin_block(label)
            return current_function, current_block

        inst = self._encode(parsed, opdef, symbols, widths, value_types)

        if name == "OpFunction":
            if current_function is not None and not current_function.ended:
                raise ScopeError("OpFunction before the previous OpFunctionEnd")
            return module.begin_function(inst), None
        if name in ("OpFunctionParameter", "OpFunctionEnd"):
            if current_function is None:
                raise ScopeError(f"{name} outside a function")
            current_function.add(inst)
            if name == "OpFunctionEnd":
                return None, None
            return current_function, current_block
        try:
            module.add(inst)
            return current_function, current_block
        except ScopeError:
            pass  # block-level instruction
        if current_block is None:
            raise ScopeError(f"{name} must appear inside a block")
        current_block.add(inst)
        return current_function, current_block

    def _encode(self, parsed, opdef, symbols, widths, value_types) -> ops.Instruction:
        literal_info = self._literal_info(parsed, opdef, widths, value_types)

        def coerce(kind: grammar.OperandKindDef, raw):
            if not isinstance(raw, Token):
                return raw
            token = raw
            if token.is_string:
                if kind.kind != "LiteralString":
                    raise ValueError(f"string literal given for a {kind.kind} operand")
                return token.text
            text = token.text
            if kind.category == "Composite":
                return token  # components are coerced one by one
            if kind.category == "Id":
                return symbols.resolve(text)
            if kind.category in ("ValueEnum", "BitEnum"):
                return int(text, 0) if _INT_TOKEN.match(text) else text
            if kind.kind == "LiteralContextDependentNumber":
                if literal_info is None:
                    raise ValueError(
                        "cannot resolve the literal width (unknown governing type)"
                    )
                width, signed, floating = literal_info
                if floating:
                    return TypedFloat(float(text), width)
                return TypedInt(int(text, 0), width, signed)
            if kind.kind == "LiteralInteger" and opdef.name == "OpSwitch" and literal_info:
                width, signed, _ = literal_info
                return TypedInt(int(text, 0), width, signed)
            if kind.kind in ("LiteralExtInstInteger", "LiteralSpecConstantOpInteger"):
                return int(text, 0) if _INT_TOKEN.match(text) else text
            # Plain integer literals.
            value = int(text, 0)
            if value < 0:
                raise ValueError(f"{kind.kind} cannot be negative")
            return value

        encoder = ops.Encoder(self.spec, self.ext, coerce=coerce)
        inputs: list = list(parsed.operands)
        if opdef.has_result:
            if parsed.result is None:
                raise ValueError(f"{opdef.name} needs a result name")
            inputs = self._with_result(opdef, parsed, inputs)
        elif parsed.result is not None:
            raise ValueError(f"{opdef.name} does not produce a result")
        return encoder.encode(opdef, inputs)

    def _with_result(self, opdef, parsed, inputs: list) -> list:
        """Insert the result token at its grammar slot position.

        Every slot before IdResult (only ever IdResultType) consumes exactly
        one input, so the grammar index is also the input index.
        """
        inputs = list(inputs)
        inputs.insert(self._result_index(opdef), parsed.result)
        return inputs

    @staticmethod
    def _result_index(opdef) -> int:
        for i, slot in enumerate(opdef.operands):
            if slot.kind == "IdResult":
                return i
        raise ValueError(f"{opdef.name} has no result slot")

    def _literal_info(self, parsed, opdef, widths, value_types):
        """(width, signed, floating) governing this line's width-typed literals."""
        if opdef.name == "OpSwitch":
            if not parsed.operands:
                return None
            selector = parsed.operands[0].text
            return widths.get(value_types.get(selector, ""))
        if not any(s.kind == "LiteralContextDependentNumber" for s in opdef.operands):
            return None
        if opdef.has_result_type and parsed.operands:
            return widths.get(parsed.operands[0].text)
        return None


def assemble_module(text: str, spec: grammar.GrammarSpec | None = None,
                    ext: grammar.ExtInstGrammar | None = None) -> bytes:
    """Assemble disassembly text into SPIR-V binary bytes."""
    return Assembler(spec, ext).assemble(text)
