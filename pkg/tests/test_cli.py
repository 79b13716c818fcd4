import spirvkit as sk
from spirvkit.cli import run_cli

from corpus import corpus_binaries, minimal_kernel


def test_dis_to_file(tmp_path, capsys):
    binary = tmp_path / "kernel.spv"
    binary.write_bytes(minimal_kernel().to_bytes())
    out = tmp_path / "out.txt"
    assert run_cli(["-d", str(binary), "-o", str(out)]) == 0
    assert out.read_text() == sk.disassemble_module(binary.read_bytes())


def test_dis_to_stdout(tmp_path, capsys):
    binary = tmp_path / "kernel.spv"
    binary.write_bytes(minimal_kernel().to_bytes())
    assert run_cli([str(binary)]) == 0
    assert capsys.readouterr().out == sk.disassemble_module(binary.read_bytes())


def test_asm_round_trip(tmp_path):
    data = minimal_kernel().to_bytes()
    text_path = tmp_path / "in.txt"
    text_path.write_text(sk.disassemble_module(data))
    out = tmp_path / "out.spv"
    assert run_cli(["--tool", "asm", "-o", str(out), str(text_path)]) == 0
    assert out.read_bytes() == data


def test_asm_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("OpCapability Bogus\n")
    assert run_cli(["--tool", "asm", "-o", str(tmp_path / "x.spv"), str(bad)]) == 1
    assert "Bogus" in capsys.readouterr().err


def test_val_empty_module(tmp_path, capsys):
    empty = tmp_path / "empty.spv"
    empty.write_bytes(sk.create_module(1, 2).to_bytes())
    assert run_cli(["--tool", "val", str(empty)]) == 1
    lines = [l for l in capsys.readouterr().out.splitlines() if l]
    assert len(lines) == 4


def test_val_clean_module(tmp_path, capsys):
    good = tmp_path / "good.spv"
    good.write_bytes(minimal_kernel().to_bytes())
    assert run_cli(["--tool", "val", str(good)]) == 0
    assert capsys.readouterr().out == ""


def test_missing_input_is_usage_error(capsys):
    assert run_cli([]) == 2


def test_missing_file_is_usage_error(tmp_path):
    assert run_cli([str(tmp_path / "nope.spv")]) == 2


def test_both_input_forms_rejected(tmp_path):
    path = tmp_path / "kernel.spv"
    path.write_bytes(minimal_kernel().to_bytes())
    assert run_cli([str(path), "-d", str(path)]) == 2


def test_stdin_only_for_text_tool():
    assert run_cli(["-"]) == 2


def test_asm_from_stdin(tmp_path, monkeypatch, capsysbinary):
    data = minimal_kernel().to_bytes()
    text = sk.disassemble_module(data)

    import io
    import sys
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    assert run_cli(["--tool", "asm", "-"]) == 0
    assert capsysbinary.readouterr().out == data


def test_option_flags_forwarded(tmp_path):
    binary = tmp_path / "kernel.spv"
    data = minimal_kernel().to_bytes()
    binary.write_bytes(data)
    out = tmp_path / "out.txt"
    assert run_cli([str(binary), "-o", str(out), "--no-header", "--no-indent",
                    "--group", "--no-inline-names"]) == 0
    expected = sk.disassemble_module(
        data,
        sk.DisassemblerOptions(no_header=True, no_indent=True, group=True, inline_names=False),
    )
    assert out.read_text() == expected


def test_color_never_matches_library(tmp_path):
    binary = tmp_path / "kernel.spv"
    binary.write_bytes(minimal_kernel().to_bytes())
    out = tmp_path / "out.txt"
    assert run_cli([str(binary), "-o", str(out), "--color", "never"]) == 0
    assert "\x1b[" not in out.read_text()


def test_color_always(tmp_path):
    binary = tmp_path / "kernel.spv"
    binary.write_bytes(minimal_kernel().to_bytes())
    out = tmp_path / "out.txt"
    assert run_cli([str(binary), "-o", str(out), "--color", "always"]) == 0
    assert "\x1b[" in out.read_text()


def test_cli_is_a_thin_shell(tmp_path):
    # The same corpus through the library and the CLI produces identical output.
    for name, data in corpus_binaries(random_count=2).items():
        binary = tmp_path / f"{name}.spv"
        binary.write_bytes(data)
        out = tmp_path / f"{name}.txt"
        assert run_cli([str(binary), "-o", str(out)]) == 0
        assert out.read_text() == sk.disassemble_module(data)
        rebuilt = tmp_path / f"{name}.rebuilt.spv"
        assert run_cli(["--tool", "asm", "-o", str(rebuilt), str(out)]) == 0
        assert rebuilt.read_bytes() == sk.assemble_module(out.read_text())
        assert rebuilt.read_bytes() == data
