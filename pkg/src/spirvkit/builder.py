"""Composable module construction: scopes, SSA ids, serialization.

A module owns the id counter and an id registry; function and block scopes
append instructions. Module-level instructions are routed into section
buckets so any insertion order serializes into the mandated logical layout;
within functions and blocks, insertion order is preserved.
"""

from __future__ import annotations

import io

from . import ops
from .codec import ModuleHeader, WORD_MASK, encode_header, encode_instruction
from .errors import (
    IdExhaustedError,
    ScopeError,
    SerializationError,
    SsaError,
    StructureError,
)

SUPPORTED_VERSIONS = tuple((1, minor) for minor in range(7))

#: Generator tool id used for modules built by this library (high 16 bits of
#: the header's generator word).
DEFAULT_GENERATOR_ID = 32

_MAX_ID = WORD_MASK - 1

#: Block-terminating instructions (the unified grammar has no marker for
#: these, so they are data here).
TERMINATORS = frozenset({
    "OpBranch", "OpBranchConditional", "OpSwitch", "OpKill", "OpReturn",
    "OpReturnValue", "OpUnreachable", "OpTerminateInvocation",
    "OpIgnoreIntersectionKHR", "OpTerminateRayKHR", "OpEmitMeshTasksEXT",
})

_SECTIONS = (
    "capabilities", "extensions", "ext_imports", "memory_model",
    "entry_points", "execution_modes", "debug_sources", "debug_names",
    "debug_processed", "annotations", "globals",
)

_MODE_SETTING_BUCKET = {
    "OpCapability": "capabilities",
    "OpMemoryModel": "memory_model",
    "OpEntryPoint": "entry_points",
    "OpExecutionMode": "execution_modes",
    "OpExecutionModeId": "execution_modes",
}

_DEBUG_BUCKET = {
    "OpSourceContinued": "debug_sources",
    "OpSource": "debug_sources",
    "OpSourceExtension": "debug_sources",
    "OpString": "debug_sources",
    "OpName": "debug_names",
    "OpMemberName": "debug_names",
    "OpModuleProcessed": "debug_processed",
}

#: Instructions whose routing differs from their grammar class. Overrides are
#: data, not code; OpVariable is handled separately (storage class decides).
_CLASS_OVERRIDES = {
    "OpExtInst": "block",
    "OpUndef": "globals_or_block",
    "OpLine": "block_or_debug",
    "OpNoLine": "block_or_debug",
}


class Id(int):
    """A module-unique SSA identifier (a 32-bit integer, 1-based)."""

    def __repr__(self):
        return f"%{int(self)}"


class ModuleScope:
    """Top-level scope: header fields, section buckets, ids, functions.

    A module and its child scopes form one single-owner mutable structure:
    hand it between threads whole, never mutate it concurrently. Distinct
    modules are fully independent.
    """

    def __init__(self, major: int, minor: int, generator: int = DEFAULT_GENERATOR_ID,
                 schema: int = 0, factory: ops.InstructionFactory | None = None):
        if (major, minor) not in SUPPORTED_VERSIONS:
            raise ValueError(f"unsupported SPIR-V version {major}.{minor}")
        self.major_version = major
        self.minor_version = minor
        # Tool id lives in the high 16 bits of the generator word.
        self.generator_magic = (generator << 16) & WORD_MASK
        self.schema = schema
        self.factory = factory if factory is not None else ops.instruction_factory()
        self.buckets: dict[str, list[ops.Instruction]] = {name: [] for name in _SECTIONS}
        self.functions: list[FunctionScope] = []
        self.id_registry: dict[int, ops.Instruction] = {}
        self._counter = 0
        self._reserved: set[int] = set()
        self._labels: set[int] = set()
        self._storage_function = self.factory.spec.kind("StorageClass").enumerant("Function").value

    # -- ids ---------------------------------------------------------------

    def new_id(self) -> Id:
        """Allocate the next unused id; ids are never reused."""
        value = self._counter + 1
        while value in self._reserved:
            value += 1
        if value > _MAX_ID:
            raise IdExhaustedError("module id space exhausted")
        self._counter = value
        return Id(value)

    def reserve_id(self, value: int) -> Id:
        """Pin a specific id value (used for numeric names in assembly)."""
        if not 0 < value <= _MAX_ID:
            raise ValueError(f"id {value} out of range")
        self._reserved.add(value)
        return Id(value)

    @property
    def max_id(self) -> int:
        reserved_used = max(self._reserved, default=0)
        return max(self._counter, reserved_used)

    def _register(self, inst: ops.Instruction) -> None:
        result = inst.result_id
        if result is None:
            return
        if result in self.id_registry:
            raise SsaError(f"%{result} is defined by more than one instruction")
        self.id_registry[result] = inst

    # -- composition ---------------------------------------------------------

    def add(self, inst: ops.Instruction) -> "ModuleScope":
        """Append a module-level instruction to its section bucket."""
        bucket = self._route(inst)
        if bucket == "memory_model" and self.buckets["memory_model"]:
            raise StructureError("module already has a memory model")
        self._register(inst)
        self.buckets[bucket].append(inst)
        return self

    def begin_function(self, function_inst: ops.Instruction) -> "FunctionScope":
        if function_inst.opdef.name != "OpFunction":
            raise ScopeError(f"begin_function expects OpFunction, got {function_inst.opdef.name}")
        self._register(function_inst)
        scope = FunctionScope(self, function_inst)
        self.functions.append(scope)
        return scope

    def _route(self, inst: ops.Instruction) -> str:
        name = inst.opdef.name
        cls = inst.opdef.class_attr
        override = _CLASS_OVERRIDES.get(name)
        if override == "block":
            raise ScopeError(f"{name} belongs in a block scope")
        if override in ("globals_or_block", "block_or_debug"):
            return "globals" if override == "globals_or_block" else "debug_sources"
        if name == "OpVariable":
            if inst.operand_words[2] == self._storage_function:
                raise ScopeError("OpVariable with Function storage belongs in a block scope")
            return "globals"
        if cls == "Mode-Setting":
            return _MODE_SETTING_BUCKET[name]
        if cls == "Extension":
            return "extensions" if name == "OpExtension" else "ext_imports"
        if cls == "Debug":
            return _DEBUG_BUCKET.get(name, "debug_sources")
        if cls == "Annotation":
            return "annotations"
        if cls in ("Type-Declaration", "Constant-Creation"):
            return "globals"
        if cls == "@exclude" and name.startswith("OpType"):
            return "globals"
        if cls == "Function":
            raise ScopeError(f"{name} belongs in a function scope")
        raise ScopeError(f"{name} ({cls or 'unclassified'}) is not a module-level instruction")

    # -- serialization -------------------------------------------------------

    def instruction_stream(self):
        """All instructions in logical-layout order (checked)."""
        self._check_structure()
        stream: list[ops.Instruction] = []
        for section in _SECTIONS:
            stream.extend(self.buckets[section])
        declarations = [f for f in self.functions if not f.blocks]
        definitions = [f for f in self.functions if f.blocks]
        for function in declarations + definitions:
            stream.extend(function.instruction_stream())
        return stream

    def header(self) -> ModuleHeader:
        return ModuleHeader(
            major_version=self.major_version,
            minor_version=self.minor_version,
            generator_magic=self.generator_magic,
            bound=self.max_id + 1,
            schema=self.schema,
        )

    def serialize(self, sink=None) -> int:
        """Write header and instructions to ``sink``; returns the byte count.

        The bound is recomputed here, right before writing.
        """
        stream = self.instruction_stream()
        self._check_references(stream)
        words = encode_header(self.header())
        for inst in stream:
            words.extend(encode_instruction(inst.raw()))
        buffer = bytearray()
        for word in words:
            buffer += word.to_bytes(4, "little")
        if sink is None:
            return len(buffer)
        sink.write(bytes(buffer))
        return len(buffer)

    def to_bytes(self) -> bytes:
        out = io.BytesIO()
        self.serialize(out)
        return out.getvalue()

    def _check_structure(self) -> None:
        for function in self.functions:
            function._check_structure()

    def _check_references(self, stream) -> None:
        defined = set(self.id_registry)
        for inst in stream:
            for ref in inst.referenced_ids:
                if ref not in defined:
                    raise SerializationError(
                        f"%{ref} is referenced by {inst.opdef.name} but never defined"
                    )


class FunctionScope:
    """One function: the OpFunction instruction, parameters, blocks."""

    def __init__(self, module: ModuleScope, function_inst: ops.Instruction):
        self.module = module
        self.function = function_inst
        self.parameters: list[ops.Instruction] = []
        self.blocks: list[BlockScope] = []
        self.ended = False

    def add(self, inst: ops.Instruction) -> "FunctionScope":
        name = inst.opdef.name
        if name == "OpFunctionParameter":
            if self.blocks:
                raise StructureError("function parameters must precede all blocks")
            self.module._register(inst)
            self.parameters.append(inst)
            return self
        if name == "OpFunctionEnd":
            if self.ended:
                raise StructureError("function already ended")
            self.ended = True
            return self
        raise ScopeError(f"{name} cannot be added at function scope")

    def begin_block(self, label: int) -> "BlockScope":
        """Open a new basic block headed by OpLabel(label)."""
        if label in self.module._labels:
            raise SsaError(f"%{label} is already used as a block label")
        if self.ended:
            raise StructureError("cannot begin a block after OpFunctionEnd")
        label_inst = self.module.factory.OpLabel(label)
        self.module._register(label_inst)
        self.module._labels.add(int(label))
        block = BlockScope(self.module, label_inst)
        self.blocks.append(block)
        return block

    def instruction_stream(self):
        stream = [self.function]
        stream.extend(self.parameters)
        for block in self.blocks:
            stream.append(block.label)
            stream.extend(block.instructions)
        stream.append(self.module.factory.OpFunctionEnd())
        return stream

    def _check_structure(self) -> None:
        fname = f"function %{self.function.result_id}"
        if not self.ended:
            raise StructureError(f"{fname} has no OpFunctionEnd")
        for block in self.blocks:
            if not block.terminated:
                raise StructureError(
                    f"block %{block.label.result_id} in {fname} has no terminator"
                )


class BlockScope:
    """A label-headed instruction sequence with one trailing terminator."""

    def __init__(self, module: ModuleScope, label_inst: ops.Instruction):
        self.module = module
        self.label = label_inst
        self.instructions: list[ops.Instruction] = []

    @property
    def terminated(self) -> bool:
        return bool(self.instructions) and self.instructions[-1].opdef.name in TERMINATORS

    def add(self, inst: ops.Instruction) -> "BlockScope":
        name = inst.opdef.name
        cls = inst.opdef.class_attr
        if self.terminated:
            raise StructureError("block already has its terminator")
        if name == "OpLabel":
            raise ScopeError("open a new block with begin_block instead of adding OpLabel")
        if name == "OpVariable":
            storage = self.module._storage_function
            if inst.operand_words[2] != storage:
                raise ScopeError("only Function-storage OpVariable belongs in a block")
            if any(i.opdef.name != "OpVariable" for i in self.instructions):
                raise StructureError("Function-storage OpVariable must open the first block")
        elif cls in ("Mode-Setting", "Annotation", "Type-Declaration", "Constant-Creation") \
                or name in ("OpExtension", "OpExtInstImport", "OpFunction",
                            "OpFunctionParameter", "OpFunctionEnd"):
            raise ScopeError(f"{name} ({cls or 'unclassified'}) is not a block instruction")
        self.module._register(inst)
        self.instructions.append(inst)
        return self


def create_module(major: int, minor: int, generator: int = DEFAULT_GENERATOR_ID,
                  schema: int = 0, factory: ops.InstructionFactory | None = None) -> ModuleScope:
    """Create an empty module; the header bound stays 0 until serialization."""
    return ModuleScope(major, minor, generator, schema, factory=factory)
