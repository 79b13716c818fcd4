#!/usr/bin/env python3
"""Run the source generator against a vendored grammar snapshot.

Writes one file per instruction, per generated operand kind and per mapper
table under ``<out>/generated/``. This is a build-time step; the library
itself constructs the same constructors and tables at import from the
vendored grammar, so running this is only needed to inspect or ship the
generated sources.
"""

import argparse
import sys

import spirvkit as sk


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--snapshot", choices=("1.2", "unified1"), default="unified1",
                        help="which pinned grammar snapshot to generate from")
    parser.add_argument("-o", "--out", default="build",
                        help="output directory (default: ./build)")
    args = parser.parse_args()

    spec = sk.load_pinned(args.snapshot)
    ext = sk.load_pinned_extended()
    artifacts = sk.generate_all(spec, ext)
    written = sk.write_artifacts(artifacts, args.out)
    by_kind = {}
    for artifact in artifacts:
        by_kind[artifact.category] = by_kind.get(artifact.category, 0) + 1
    print(f"wrote {len(written)} files under {args.out}/generated: {by_kind}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
