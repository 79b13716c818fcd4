"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Every expectation is pinned here, including the stated runtime
budgets; nothing is deferred to later calibration.
"""

import random
import time

import spirvkit as sk

from corpus import FACTORY, corpus_binaries, random_module

LISTING_CAPS = ("Addresses", "Linkage", "Kernel", "Int64", "Int8")


def _report(criterion: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {criterion}: {status}{suffix}")
    return ok


def test_criterion_1_generator_counts(g12, g16):
    start = time.perf_counter()
    counts = {
        "1.2 instructions": len(sk.generate_instruction_definitions(g12)),
        "1.2 operand kinds": len(sk.generate_operand_kind_definitions(g12)),
        "1.6 instructions": len(sk.generate_instruction_definitions(g16)),
        "1.6 operand kinds": len(sk.generate_operand_kind_definitions(g16)),
    }
    elapsed = time.perf_counter() - start
    expected = {
        "1.2 instructions": 366,
        "1.2 operand kinds": 34,
        "1.6 instructions": 667,
        "1.6 operand kinds": 44,
    }
    ok = True
    for key, want in expected.items():
        got = counts[key]
        ok &= _report(f"1 (generator counts: {key})", got == want, f"expected {want}, got {got}")
    ok &= _report("1 (runtime budget)", elapsed < 5.0, f"{elapsed:.2f}s < 5s")
    assert ok, f"generator counts {counts} != {expected}"


def test_criterion_2_capability_listing_reproduction():
    start = time.perf_counter()
    module = sk.create_module(1, 2)
    for cap in LISTING_CAPS:
        module.add(FACTORY.OpCapability(cap))
    text = sk.disassemble_module(module.to_bytes(), sk.DisassemblerOptions(no_header=True))
    elapsed = time.perf_counter() - start
    expected = "\n".join(f"OpCapability {cap}" for cap in LISTING_CAPS) + "\n"
    ok = _report("2 (five capability lines)", text == expected, repr(text))
    ok &= _report("2 (runtime budget)", elapsed < 1.0, f"{elapsed:.2f}s < 1s")
    assert ok


def test_criterion_3_round_trip_identity():
    start = time.perf_counter()
    corpus = corpus_binaries(random_count=5)
    assert len(corpus) >= 10
    ok = True
    for name, data in corpus.items():
        text = sk.disassemble_module(data)
        identical = sk.assemble_module(text) == data
        header, instructions = sk.decode_module(data)
        structural = sk.decode_module(sk.encode_module(header, instructions)) == (header, instructions)
        if not (identical and structural):
            ok = _report(f"3 (round trip: {name})", False) and ok
    elapsed = time.perf_counter() - start
    ok &= _report("3 (round trip identity)", ok, f"{len(corpus)} modules")
    ok &= _report("3 (runtime budget)", elapsed < 10.0, f"{elapsed:.2f}s < 10s")
    assert ok


def test_criterion_4_validator_rules():
    start = time.perf_counter()
    empty = sk.create_module(1, 2).to_bytes()
    empty_codes = [d.code for d in sk.validate_module(empty)]
    from corpus import minimal_kernel
    clean = sk.validate_module(minimal_kernel().to_bytes())
    elapsed = time.perf_counter() - start
    ok = _report(
        "4 (empty module rules)",
        empty_codes == ["MissingFunction", "MissingCapability",
                        "MissingMemoryModel", "MissingEntryPoint"],
        str(empty_codes),
    )
    ok &= _report("4 (minimal kernel clean)", clean == [], str([str(d) for d in clean]))
    ok &= _report("4 (runtime budget)", elapsed < 1.0, f"{elapsed:.2f}s < 1s")
    assert ok
    _maybe_check_spirv_val()


def _maybe_check_spirv_val():
    import shutil
    import subprocess
    import tempfile
    from corpus import minimal_kernel
    if shutil.which("spirv-val") is None:
        print("criterion 4 (spirv-val cross-check): SKIPPED (not installed)")
        return
    with tempfile.NamedTemporaryFile(suffix=".spv") as handle:
        handle.write(minimal_kernel().to_bytes())
        handle.flush()
        result = subprocess.run(["spirv-val", handle.name], capture_output=True)
    assert _report("4 (spirv-val cross-check)", result.returncode == 0,
                   result.stderr.decode()[:200])


def test_criterion_5_capability_cycles(g12, g16):
    start = time.perf_counter()
    cycles_12 = sk.capability_dependency_graph(g12).cycles
    cycles_16 = sk.capability_dependency_graph(g16).cycles
    elapsed = time.perf_counter() - start
    ok = _report("5 (1.6 snapshot has cycles)", len(cycles_16) >= 1, f"{len(cycles_16)} cycles")
    ok &= _report("5 (1.2 snapshot cycle-free)", len(cycles_12) == 0,
                  f"expected 0, got {len(cycles_12)}: {cycles_12}")
    ok &= _report("5 (runtime budget)", elapsed < 2.0, f"{elapsed:.2f}s < 2s")
    assert ok, (
        "the pinned 1.2 snapshot carries aliased capability values, which are "
        "mutual implications and therefore cycles; see the module tests for the "
        "derived counts"
    )


def test_criterion_6_property_suites():
    start = time.perf_counter()
    rng = random.Random(20250810)
    section_rank = {"OpCapability": 0, "OpExtension": 1, "OpExtInstImport": 2,
                    "OpMemoryModel": 3, "OpEntryPoint": 4, "OpExecutionMode": 5}
    spec = sk.load_pinned()
    checked = 0
    for _ in range(1000):
        module = random_module(rng.randrange(1 << 62))
        data = module.to_bytes()
        header, instructions = sk.decode_module(data)
        # Bound = max allocated id + 1.
        assert header.bound == module.max_id + 1
        # SSA uniqueness over the registry.
        results = [i.result_id for i in module.id_registry.values()]
        assert len(results) == len(set(results))
        # Word-count consistency for every encoded instruction.
        for inst in instructions:
            assert inst.word_count == 1 + len(inst.operands)
        # Section ordering: mode-setting sections appear in layout order and
        # capabilities precede the memory model, which precedes all types.
        names = [spec.instruction(i.opcode).name for i in instructions]
        ranks = [section_rank[n] for n in names if n in section_rank]
        assert ranks == sorted(ranks)
        first_type = next(i for i, n in enumerate(names) if n.startswith("OpType"))
        assert names.index("OpMemoryModel") < first_type
        checked += 1
    elapsed = time.perf_counter() - start
    ok = _report("6 (invariants over randomized builds)", checked == 1000,
                 f"{checked} modules")
    ok &= _report("6 (runtime budget)", elapsed < 60.0, f"{elapsed:.1f}s < 60s")
    assert ok


def test_criterion_7_large_module_assembly_budget():
    # End-to-end GPU benchmarks need driver hardware this environment lacks;
    # the stand-in is a plain engineering budget on a large assembly job.
    prologue = [
        "OpCapability Addresses",
        "OpCapability Kernel",
        "OpMemoryModel Physical64 OpenCL",
        'OpEntryPoint Kernel %f "main"',
        "%void = OpTypeVoid",
        "%fnt = OpTypeFunction %void",
        "%uint = OpTypeInt 32 0",
        "%c0 = OpConstant %uint 1",
        "%c1 = OpConstant %uint 2",
        "%f = OpFunction %void None %fnt",
        "%entry = OpLabel",
    ]
    body = [f"%v{i} = OpIAdd %uint %c0 %c1" for i in range(10_000 - len(prologue) - 2)]
    text = "\n".join(prologue + body + ["OpReturn", "OpFunctionEnd"]) + "\n"
    assembler = sk.Assembler()
    start = time.perf_counter()
    data = assembler.assemble(text)
    elapsed = time.perf_counter() - start
    _, instructions = sk.decode_module(data)
    assert len(instructions) >= 10_000 - 2
    ok = _report("7 (10k-instruction assembly)", elapsed < 1.0, f"{elapsed:.3f}s < 1s")
    assert ok
