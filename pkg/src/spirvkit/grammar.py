"""Load and index Khronos SPIR-V grammar JSON files.

Two layouts are understood: the core grammar (``spirv.core.grammar.json``)
and the extended-instruction-set grammar (``extinst.opencl.std.100.grammar.json``).
Loaded specs are immutable and safe to share between threads; loading is a
pure function of the input text.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .errors import GrammarParseError, GrammarSchemaError, NotFoundError

#: Quantifier markers as they appear in the grammar files.
QUANT_ONE = ""
QUANT_OPTIONAL = "?"
QUANT_VARIADIC = "*"

ENUM_CATEGORIES = ("BitEnum", "ValueEnum")
KNOWN_CATEGORIES = ("Id", "BitEnum", "ValueEnum", "Literal", "Composite")

_GRAMMAR_DIR_ENV = "SPIRV_GRAMMAR_DIR"


@dataclass(frozen=True)
class OperandSlot:
    """One operand position of an instruction or enumerant parameter."""

    kind: str
    name: str | None = None
    quantifier: str = QUANT_ONE


@dataclass(frozen=True)
class EnumerantDef:
    """A named constant of a BitEnum or ValueEnum operand kind."""

    name: str
    value: int
    required_capabilities: tuple[str, ...] = ()
    parameters: tuple[OperandSlot, ...] = ()


@dataclass(frozen=True)
class OperandKindDef:
    category: str
    kind: str
    enumerants: tuple[EnumerantDef, ...] | None = None
    bases: tuple[str, ...] | None = None

    def enumerant(self, key: str | int) -> EnumerantDef:
        """Look up an enumerant by name or value (first occurrence wins)."""
        if self.enumerants is None:
            raise NotFoundError(f"operand kind {self.kind} has no enumerants")
        for e in self.enumerants:
            if key == e.name or key == e.value:
                return e
        raise NotFoundError(f"no enumerant {key!r} in operand kind {self.kind}")


@dataclass(frozen=True)
class InstructionDef:
    name: str
    opcode: int
    class_attr: str
    operands: tuple[OperandSlot, ...] = ()
    required_capabilities: tuple[str, ...] = ()

    @property
    def has_result(self) -> bool:
        return any(o.kind == "IdResult" for o in self.operands)

    @property
    def has_result_type(self) -> bool:
        return any(o.kind == "IdResultType" for o in self.operands)


@dataclass(frozen=True)
class GrammarSpec:
    """Indexed, immutable model of one core grammar file."""

    magic_number: str
    major_version: int
    minor_version: int
    revision: int
    instructions: tuple[InstructionDef, ...]
    operand_kinds: tuple[OperandKindDef, ...]
    _by_name: dict = field(compare=False, repr=False, default_factory=dict)
    _by_opcode: dict = field(compare=False, repr=False, default_factory=dict)
    _kinds: dict = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        for inst in self.instructions:
            if inst.name in self._by_name:
                raise GrammarSchemaError(f"duplicate instruction name {inst.name}")
            self._by_name[inst.name] = inst
            # Aliased entries (e.g. OpSDot / OpSDotKHR) share an opcode; the
            # first occurrence in file order wins for opcode lookups.
            self._by_opcode.setdefault(inst.opcode, inst)
        for kind in self.operand_kinds:
            self._kinds.setdefault(kind.kind, kind)

    def instruction(self, key: str | int) -> InstructionDef:
        """Find an instruction by name or by opcode."""
        table = self._by_name if isinstance(key, str) else self._by_opcode
        try:
            return table[key]
        except KeyError:
            raise NotFoundError(f"no instruction {key!r} in grammar") from None

    def has_instruction(self, key: str | int) -> bool:
        table = self._by_name if isinstance(key, str) else self._by_opcode
        return key in table

    def kind(self, name: str) -> OperandKindDef:
        try:
            return self._kinds[name]
        except KeyError:
            raise NotFoundError(f"no operand kind {name!r} in grammar") from None

    def has_kind(self, name: str) -> bool:
        return name in self._kinds


@dataclass(frozen=True)
class ExtInstGrammar:
    """Indexed model of an extended instruction set grammar."""

    version: int
    revision: int
    instructions: tuple[InstructionDef, ...]
    _by_name: dict = field(compare=False, repr=False, default_factory=dict)
    _by_number: dict = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        for inst in self.instructions:
            self._by_name[inst.name] = inst
            self._by_number.setdefault(inst.opcode, inst)

    def instruction(self, key: str | int) -> InstructionDef:
        table = self._by_name if isinstance(key, str) else self._by_number
        try:
            return table[key]
        except KeyError:
            raise NotFoundError(f"no extended instruction {key!r}") from None

    def has_instruction(self, key: str | int) -> bool:
        table = self._by_name if isinstance(key, str) else self._by_number
        return key in table


@dataclass(frozen=True)
class DependencyReport:
    """Capability implication graph plus its non-trivial cycles."""

    nodes: tuple[str, ...]
    edges: dict[str, tuple[str, ...]]
    cycles: tuple[tuple[str, ...], ...]


def _parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GrammarParseError(str(exc), line=exc.lineno, column=exc.colno) from exc


def _parse_slot(obj, where: str) -> OperandSlot:
    if "kind" not in obj:
        raise GrammarSchemaError(f"operand without kind in {where}")
    quantifier = obj.get("quantifier", QUANT_ONE)
    if quantifier not in (QUANT_ONE, QUANT_OPTIONAL, QUANT_VARIADIC):
        raise GrammarSchemaError(f"unknown quantifier {quantifier!r} in {where}")
    return OperandSlot(kind=obj["kind"], name=obj.get("name"), quantifier=quantifier)


def _parse_instruction(obj) -> InstructionDef:
    if "opname" not in obj or "opcode" not in obj:
        raise GrammarSchemaError("instruction entry without opname/opcode")
    name = obj["opname"]
    operands = tuple(_parse_slot(o, name) for o in obj.get("operands", []))
    seen_tail = False
    for slot in operands:
        if seen_tail and slot.quantifier == QUANT_ONE:
            raise GrammarSchemaError(f"{name}: required operand after ?/* tail")
        if slot.quantifier != QUANT_ONE:
            seen_tail = True
    return InstructionDef(
        name=name,
        opcode=int(obj["opcode"]),
        class_attr=obj.get("class", ""),
        operands=operands,
        required_capabilities=tuple(obj.get("capabilities", [])),
    )


def _parse_enumerant(obj, category: str, kind: str) -> EnumerantDef:
    if "enumerant" not in obj or "value" not in obj:
        raise GrammarSchemaError(f"enumerant without name/value in kind {kind}")
    value = obj["value"]
    # BitEnum values are hex strings in the Khronos files, ValueEnum decimal.
    if isinstance(value, str):
        if category != "BitEnum":
            raise GrammarSchemaError(f"string value {value!r} in {category} kind {kind}")
        value = int(value, 16)
    return EnumerantDef(
        name=obj["enumerant"],
        value=int(value),
        required_capabilities=tuple(obj.get("capabilities", [])),
        parameters=tuple(_parse_slot(p, f"{kind}.{obj['enumerant']}") for p in obj.get("parameters", [])),
    )


def _parse_kind(obj) -> OperandKindDef:
    if "category" not in obj or "kind" not in obj:
        raise GrammarSchemaError("operand kind entry without category/kind")
    category = obj["category"]
    if category not in KNOWN_CATEGORIES:
        raise GrammarSchemaError(f"unknown operand category {category!r}")
    kind = obj["kind"]
    enumerants = None
    if category in ENUM_CATEGORIES:
        enumerants = tuple(_parse_enumerant(e, category, kind) for e in obj.get("enumerants", []))
    bases = tuple(obj["bases"]) if category == "Composite" else None
    return OperandKindDef(category=category, kind=kind, enumerants=enumerants, bases=bases)


def load_core_grammar(text: str) -> GrammarSpec:
    """Parse a Khronos core grammar document into a GrammarSpec.

    Unknown top-level fields are ignored for forward compatibility; a missing
    ``instructions`` or ``operand_kinds`` field is a schema error.
    """
    doc = _parse_json(text)
    if not isinstance(doc, dict):
        raise GrammarSchemaError("grammar root must be a JSON object")
    for required in ("instructions", "operand_kinds"):
        if required not in doc:
            raise GrammarSchemaError(f"grammar is missing the {required!r} field")
    spec = GrammarSpec(
        magic_number=doc.get("magic_number", "0x07230203"),
        major_version=int(doc.get("major_version", 1)),
        minor_version=int(doc.get("minor_version", 0)),
        revision=int(doc.get("revision", 0)),
        instructions=tuple(_parse_instruction(i) for i in doc["instructions"]),
        operand_kinds=tuple(_parse_kind(k) for k in doc["operand_kinds"]),
    )
    _check_kind_references(spec)
    return spec


def _check_kind_references(spec: GrammarSpec) -> None:
    """Every kind referenced anywhere must resolve (no dangling kinds)."""
    for inst in spec.instructions:
        for slot in inst.operands:
            if not spec.has_kind(slot.kind):
                raise GrammarSchemaError(f"{inst.name} references unknown kind {slot.kind!r}")
    for kind in spec.operand_kinds:
        for base in kind.bases or ():
            if not spec.has_kind(base):
                raise GrammarSchemaError(f"{kind.kind} has unknown base {base!r}")
        for enum in kind.enumerants or ():
            for param in enum.parameters:
                if not spec.has_kind(param.kind):
                    raise GrammarSchemaError(
                        f"{kind.kind}.{enum.name} parameter references unknown kind {param.kind!r}"
                    )


def load_extended_grammar(text: str) -> ExtInstGrammar:
    """Parse an extended-instruction-set grammar (e.g. OpenCL.std)."""
    doc = _parse_json(text)
    if not isinstance(doc, dict):
        raise GrammarSchemaError("grammar root must be a JSON object")
    if "instructions" not in doc:
        raise GrammarSchemaError("grammar is missing the 'instructions' field")
    return ExtInstGrammar(
        version=int(doc.get("version", 0)),
        revision=int(doc.get("revision", 0)),
        instructions=tuple(_parse_instruction(i) for i in doc["instructions"]),
    )


def capability_dependency_graph(spec: GrammarSpec) -> DependencyReport:
    """Build the capability implication graph and find its cycles.

    An edge A -> B means declaring capability A implicitly makes B available.
    That happens in two ways: the grammar lists B in A's ``capabilities``
    (a dependency), or A and B share a numeric value (aliased names denote
    the same capability, so they imply each other). Cycles are the strongly
    connected components with more than one member; members of a cycle all
    imply one another, which the validator's closure relies on.
    """
    if not spec.has_kind("Capability"):
        raise GrammarSchemaError("grammar has no Capability operand kind")
    cap = spec.kind("Capability")
    deps: dict[str, list[str]] = {}
    by_value: dict[int, list[str]] = {}
    for enum in cap.enumerants or ():
        if enum.name not in deps:
            deps[enum.name] = list(dict.fromkeys(enum.required_capabilities))
            by_value.setdefault(enum.value, []).append(enum.name)
    edges: dict[str, tuple[str, ...]] = {}
    for value, names in by_value.items():
        for name in names:
            peers = [n for n in names if n != name]
            edges[name] = tuple(dict.fromkeys(deps[name] + peers))
    nodes = tuple(edges)
    cycles = tuple(tuple(c) for c in _strongly_connected(edges) if len(c) > 1)
    return DependencyReport(nodes=nodes, edges=edges, cycles=cycles)


def transitive_capabilities(spec: GrammarSpec, declared) -> frozenset[str]:
    """Close a set of capability names under the implication graph.

    Declaring a capability implicitly declares everything reachable from it:
    its dependencies, its aliases, and so on transitively (cycle members all
    imply each other).
    """
    edges = capability_dependency_graph(spec).edges
    seen: set[str] = set()
    stack = [c for c in declared]
    while stack:
        name = stack.pop()
        if name in seen or name not in edges:
            continue
        seen.add(name)
        stack.extend(edges[name])
    return frozenset(seen)


def _strongly_connected(edges: dict[str, tuple[str, ...]]):
    """Iterative Tarjan SCC over a name-keyed adjacency mapping.

    Components are emitted with members sorted and the component list sorted,
    so the result is deterministic regardless of dict order.
    """
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    components: list[list[str]] = []

    for root in edges:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in edges:
                    continue
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(sorted(component))
    return sorted(components)


def grammar_dir() -> Path:
    """Directory holding the vendored grammar snapshots.

    The SPIRV_GRAMMAR_DIR environment variable overrides the packaged copies.
    """
    override = os.environ.get(_GRAMMAR_DIR_ENV)
    if override:
        return Path(override)
    return Path(__file__).parent / "grammars"


@lru_cache(maxsize=None)
def load_pinned(version: str = "unified1") -> GrammarSpec:
    """Load a vendored core grammar snapshot ("1.2" or "unified1").

    Cached per process; set SPIRV_GRAMMAR_DIR before the first load to
    override where snapshots come from.
    """
    path = grammar_dir() / version / "spirv.core.grammar.json"
    if not path.is_file():
        raise NotFoundError(f"no vendored grammar snapshot {version!r} at {path}")
    return load_core_grammar(path.read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def load_pinned_extended() -> ExtInstGrammar:
    """Load the vendored OpenCL.std extended instruction grammar."""
    path = grammar_dir() / "unified1" / "extinst.opencl.std.100.grammar.json"
    if not path.is_file():
        raise NotFoundError(f"no vendored extended grammar at {path}")
    return load_extended_grammar(path.read_text(encoding="utf-8"))
