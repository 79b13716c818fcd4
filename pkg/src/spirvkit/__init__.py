"""Grammar-driven SPIR-V toolkit.

Loads the Khronos machine-readable grammar, generates a typed instruction
API from it, and provides a binary codec, a composable module builder, an
assembler, a disassembler, a validator and a command-line client.
"""

from .asm import Assembler, SymbolTable, TextInstruction, assemble_module, tokenize_line
from .builder import (
    BlockScope,
    FunctionScope,
    Id,
    ModuleScope,
    create_module,
)
from .codec import (
    ModuleHeader,
    RawInstruction,
    TypedFloat,
    TypedInt,
    decode_module,
    encode_context_dependent_literal,
    encode_header,
    encode_instruction,
    encode_module,
    encode_string_literal,
)
from .codegen import (
    GeneratedArtifact,
    MapperTables,
    generate_all,
    generate_instruction_definitions,
    generate_mapper_artifacts,
    generate_mapper_tables,
    generate_operand_kind_definitions,
    sanitize_identifier,
    write_artifacts,
)
from .disasm import (
    Disassembler,
    DisassemblerOptions,
    disassemble_module,
    format_instruction,
)
from .errors import (
    AssemblyError,
    CodecError,
    CorruptStreamError,
    GenerationError,
    GrammarError,
    GrammarParseError,
    GrammarSchemaError,
    IdExhaustedError,
    NotFoundError,
    NotSpirvError,
    ScopeError,
    SerializationError,
    SpirvKitError,
    SsaError,
    StructureError,
    TruncatedStreamError,
)
from .grammar import (
    DependencyReport,
    EnumerantDef,
    ExtInstGrammar,
    GrammarSpec,
    InstructionDef,
    OperandKindDef,
    OperandSlot,
    capability_dependency_graph,
    load_core_grammar,
    load_extended_grammar,
    load_pinned,
    load_pinned_extended,
    transitive_capabilities,
)
from .ops import Instruction, InstructionFactory, instruction_factory
from .validate import Diagnostic, check_capability_closure, diagnostics_text, validate_module

__version__ = "0.1.0"
