"""Exception hierarchy shared across the toolkit."""


class SpirvKitError(Exception):
    """Base class for all toolkit errors."""


class GrammarError(SpirvKitError):
    """Problems with a grammar file or a grammar lookup."""


class GrammarParseError(GrammarError):
    """Malformed grammar JSON. Carries 1-based line/column of the defect."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class GrammarSchemaError(GrammarError):
    """Well-formed JSON that does not follow the grammar layout."""


class NotFoundError(GrammarError, KeyError):
    """Lookup by name, opcode or number found nothing."""

    def __str__(self):
        # KeyError quotes its argument; keep the plain message.
        return Exception.__str__(self)


class CodecError(SpirvKitError):
    """Binary encoding or decoding failure."""


class NotSpirvError(CodecError):
    """Input bytes do not start with the SPIR-V magic word."""


class TruncatedStreamError(CodecError):
    """Word stream ends in the middle of a header or instruction."""


class CorruptStreamError(CodecError):
    """Word stream is structurally impossible (e.g. word count 0)."""


class GenerationError(SpirvKitError):
    """The source generator hit an inconsistent grammar."""


class ScopeError(SpirvKitError):
    """Instruction added to a scope that does not accept its class."""


class SsaError(SpirvKitError):
    """An id was defined more than once."""


class StructureError(SpirvKitError):
    """Module structure broken: unterminated block, duplicate memory model, ..."""


class SerializationError(SpirvKitError):
    """Module cannot be serialized (e.g. a referenced id is never defined)."""


class IdExhaustedError(SpirvKitError):
    """The 32-bit id space of a module ran out."""


class AssemblyError(SpirvKitError):
    """Text assembly failed; carries all collected diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "\n".join(str(d) for d in self.diagnostics)
        super().__init__(f"{len(self.diagnostics)} error(s):\n{lines}")


class AsmDiagnostic:
    """One positioned assembler message: line and column are 1-based."""

    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        self.message = message

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"

    def __repr__(self):
        return f"AsmDiagnostic({self.line}, {self.column}, {self.message!r})"
