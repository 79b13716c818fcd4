"""Command-line client: disassemble, assemble and validate SPIR-V files.

Exit codes: 0 success, 1 diagnostics or conversion failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .asm import Assembler
from .disasm import Disassembler, DisassemblerOptions
from .errors import AssemblyError, SpirvKitError
from .validate import diagnostics_text, validate_module

USAGE_ERROR = 2
FAILURE = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spirvkit",
        description="Assemble, disassemble and validate SPIR-V compute modules.",
    )
    parser.add_argument("input", nargs="?", help="input file ('-' reads text from stdin)")
    parser.add_argument("-d", dest="legacy_input", metavar="FILE",
                        help="legacy input-file alias (implies --tool dis unless --tool is given)")
    parser.add_argument("--tool", choices=("dis", "asm", "val"), default="dis",
                        help="which tool to run (default: dis)")
    parser.add_argument("-o", "--output", metavar="FILE",
                        help="output file (default: standard output)")
    parser.add_argument("--no-header", action="store_true", help="omit the header summary")
    parser.add_argument("--no-indent", action="store_true", help="do not align the result column")
    parser.add_argument("--group", action="store_true",
                        help="blank line between logical-layout sections")
    parser.add_argument("--no-inline-names", action="store_true",
                        help="always print ids as %%N, never as friendly names")
    parser.add_argument("--color", choices=("auto", "always", "never"), default="auto",
                        help="syntax highlighting (default: auto)")
    parser.add_argument("--strict", action="store_true",
                        help="fail on unknown opcodes instead of dumping raw words")
    parser.add_argument("--force", action="store_true",
                        help="allow writing binary output to a terminal")
    return parser


def _fail(message: str, code: int) -> int:
    print(f"spirvkit: error: {message}", file=sys.stderr)
    return code


def _read_binary(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as stream:
        return stream.read()


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as stream:
        return stream.read()


def _highlight_wanted(args, writing_to_stdout: bool) -> bool:
    if args.color == "always":
        return True
    if args.color == "never":
        return False
    return writing_to_stdout and sys.stdout.isatty()


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    input_path = args.input or args.legacy_input
    if input_path is None:
        parser.print_usage(sys.stderr)
        return _fail("an input file is required", USAGE_ERROR)
    if args.input and args.legacy_input:
        parser.print_usage(sys.stderr)
        return _fail("give the input either positionally or with -d, not both", USAGE_ERROR)
    if input_path == "-" and args.tool != "asm":
        return _fail("'-' (stdin) is only supported for the text tool (--tool asm)", USAGE_ERROR)

    try:
        if args.tool == "dis":
            return _run_dis(args, input_path)
        if args.tool == "asm":
            return _run_asm(args, input_path)
        return _run_val(args, input_path)
    except FileNotFoundError as exc:
        return _fail(f"{exc.filename}: no such file", USAGE_ERROR)
    except OSError as exc:
        return _fail(str(exc), USAGE_ERROR)
    except AssemblyError as exc:
        for diagnostic in exc.diagnostics:
            print(f"{input_path}:{diagnostic}", file=sys.stderr)
        return FAILURE
    except SpirvKitError as exc:
        return _fail(str(exc), FAILURE)


def _run_dis(args, input_path: str) -> int:
    data = _read_binary(input_path)
    options = DisassemblerOptions(
        highlight=_highlight_wanted(args, writing_to_stdout=args.output is None),
        inline_names=not args.no_inline_names,
        no_indent=args.no_indent,
        group=args.group,
        no_header=args.no_header,
    )
    text = Disassembler(options=options, strict=args.strict).to_text(data)
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as stream:
            stream.write(text)
    return 0


def _run_asm(args, input_path: str) -> int:
    binary = Assembler().assemble(_read_text(input_path))
    if args.output is None:
        if sys.stdout.isatty() and not args.force:
            return _fail("refusing to write binary to a terminal (use -o or --force)",
                         USAGE_ERROR)
        sys.stdout.buffer.write(binary)
        return 0
    with open(args.output, "wb") as stream:
        stream.write(binary)
    return 0


def _run_val(args, input_path: str) -> int:
    diagnostics = validate_module(_read_binary(input_path))
    text = diagnostics_text(diagnostics)
    if args.output is None:
        if text:
            print(text)
    else:
        with open(args.output, "w", encoding="utf-8") as stream:
            stream.write(text + "\n" if text else "")
    return FAILURE if any(d.severity == "error" for d in diagnostics) else 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
