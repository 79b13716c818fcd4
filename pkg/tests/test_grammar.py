import json
import random

import pytest

import spirvkit as sk

MINIMAL = '{"magic_number":"0x07230203","instructions":[],"operand_kinds":[]}'


def test_minimal_grammar_loads_empty():
    spec = sk.load_core_grammar(MINIMAL)
    assert spec.magic_number == "0x07230203"
    assert spec.instructions == ()
    assert spec.operand_kinds == ()


def test_pinned_snapshot_sizes(g12, g16):
    assert len(g12.instructions) == 332
    assert len(g12.operand_kinds) == 43
    assert len(g16.instructions) == 667
    assert len(g16.operand_kinds) == 53


def test_malformed_json_reports_position():
    with pytest.raises(sk.GrammarParseError) as err:
        sk.load_core_grammar('{"instructions": [,]}')
    assert err.value.line == 1
    assert err.value.column is not None


@pytest.mark.parametrize("missing", ["instructions", "operand_kinds"])
def test_missing_mandatory_field(missing):
    doc = json.loads(MINIMAL)
    del doc[missing]
    with pytest.raises(sk.GrammarSchemaError):
        sk.load_core_grammar(json.dumps(doc))


def test_unknown_top_level_fields_ignored():
    doc = json.loads(MINIMAL)
    doc["brand_new_field"] = {"x": 1}
    sk.load_core_grammar(json.dumps(doc))


def test_lookup_by_name_and_opcode(g12):
    by_name = g12.instruction("OpCapability")
    assert by_name.opcode == 17
    assert g12.instruction(17) is by_name


def test_lookup_missing_raises(g12):
    with pytest.raises(sk.NotFoundError):
        g12.instruction("OpDoesNotExist")
    with pytest.raises(sk.NotFoundError):
        g12.instruction(0xFFFF)


def test_every_instruction_lookup_consistent(g16):
    for inst in g16.instructions:
        assert g16.instruction(inst.name) is inst
        # Aliased opcodes resolve to the first entry in file order.
        assert g16.instruction(inst.opcode).opcode == inst.opcode


def test_loading_is_deterministic(g12):
    text = (sk.grammar.grammar_dir() / "1.2" / "spirv.core.grammar.json").read_text()
    assert sk.load_core_grammar(text) == sk.load_core_grammar(text)
    assert sk.load_core_grammar(text) == g12


def test_no_dangling_kind_references(g12, g16):
    # The loader rejects dangling kinds; loading the full pinned files is the
    # assertion, plus a negative case here.
    doc = {
        "instructions": [{"opname": "OpX", "opcode": 9, "operands": [{"kind": "Ghost"}]}],
        "operand_kinds": [],
    }
    with pytest.raises(sk.GrammarSchemaError):
        sk.load_core_grammar(json.dumps(doc))


def test_extended_grammar_fabs(opencl_ext):
    fabs = opencl_ext.instruction("fabs")
    assert opencl_ext.instruction(fabs.opcode) is fabs


def test_extended_grammar_empty_lookup_fails():
    ext = sk.load_extended_grammar('{"instructions": []}')
    with pytest.raises(sk.NotFoundError):
        ext.instruction("fabs")
    with pytest.raises(sk.NotFoundError):
        ext.instruction(23)


def _capability_grammar(enumerants):
    doc = {
        "magic_number": "0x07230203",
        "instructions": [],
        "operand_kinds": [
            {"category": "ValueEnum", "kind": "Capability", "enumerants": enumerants}
        ],
    }
    return sk.load_core_grammar(json.dumps(doc))


def test_injected_two_cycle():
    spec = _capability_grammar([
        {"enumerant": "A", "value": 0, "capabilities": ["B"]},
        {"enumerant": "B", "value": 1, "capabilities": ["A"]},
    ])
    report = sk.capability_dependency_graph(spec)
    assert report.cycles == (("A", "B"),)


def test_alias_pair_is_a_cycle():
    spec = _capability_grammar([
        {"enumerant": "New", "value": 7},
        {"enumerant": "Old", "value": 7},
        {"enumerant": "Lone", "value": 8},
    ])
    report = sk.capability_dependency_graph(spec)
    assert report.cycles == (("New", "Old"),)
    assert sk.transitive_capabilities(spec, ["Old"]) == {"Old", "New"}


def test_missing_capability_kind_is_schema_error():
    spec = sk.load_core_grammar(MINIMAL)
    with pytest.raises(sk.GrammarSchemaError):
        sk.capability_dependency_graph(spec)


def test_pinned_cycle_counts(g12, g16):
    # Derived by running the detector over the pinned snapshots: the only
    # non-trivial components are alias groups (two names, one value).
    assert len(sk.capability_dependency_graph(g12).cycles) == 3
    assert len(sk.capability_dependency_graph(g16).cycles) == 25
    for cycle in sk.capability_dependency_graph(g16).cycles:
        assert len(cycle) >= 2


def _brute_force_cycle_nodes(edges):
    nodes = sorted(edges)
    reach = {n: set(edges[n]) for n in nodes}
    changed = True
    while changed:
        changed = False
        for n in nodes:
            extra = set()
            for m in reach[n]:
                extra |= set(edges.get(m, ()))
            if not extra <= reach[n]:
                reach[n] |= extra
                changed = True
    return {n for n in nodes if n in reach[n]}


def test_cycle_detection_matches_transitive_closure():
    rng = random.Random(1234)
    for trial in range(20):
        node_count = rng.randint(2, 200)
        names = [f"C{i}" for i in range(node_count)]
        enumerants = []
        for i, name in enumerate(names):
            deps = rng.sample(names, k=min(rng.randint(0, 3), node_count - 1))
            enumerants.append({"enumerant": name, "value": i,
                               "capabilities": [d for d in deps if d != name]})
        spec = _capability_grammar(enumerants)
        report = sk.capability_dependency_graph(spec)
        in_cycle = {name for cycle in report.cycles for name in cycle}
        assert in_cycle == _brute_force_cycle_nodes(report.edges)


def test_grammar_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SPIRV_GRAMMAR_DIR", str(tmp_path))
    assert sk.grammar.grammar_dir() == tmp_path
