#!/usr/bin/env python3
"""Fetch Khronos grammar snapshots at a given SPIRV-Headers revision.

Downloads into src/spirvkit/grammars/ and prints the new sha256 digests to
paste into PINNED.json. The test suite runs against the pinned files, so a
refresh is a deliberate re-pin, never an implicit side effect of building.
"""

import argparse
import hashlib
import json
import sys
import urllib.request
from pathlib import Path

RAW_URL = "https://raw.githubusercontent.com/KhronosGroup/SPIRV-Headers/{rev}/include/spirv/{path}"

FILES = {
    "1.2/spirv.core.grammar.json": "1.2/spirv.core.grammar.json",
    "unified1/spirv.core.grammar.json": "unified1/spirv.core.grammar.json",
    "unified1/extinst.opencl.std.100.grammar.json": "unified1/extinst.opencl.std.100.grammar.json",
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("revision", help="SPIRV-Headers commit sha or tag to fetch")
    parser.add_argument("--dest", default=None, help="grammar directory (default: the package's)")
    args = parser.parse_args()

    dest = Path(args.dest) if args.dest else Path(__file__).parent.parent / "src/spirvkit/grammars"
    pins = []
    for upstream, local in FILES.items():
        url = RAW_URL.format(rev=args.revision, path=upstream)
        print(f"fetching {url}")
        with urllib.request.urlopen(url) as response:
            data = response.read()
        target = dest / local
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        pins.append({"path": local, "sha256": hashlib.sha256(data).hexdigest()})
    print(json.dumps(pins, indent=2))
    print("update PINNED.json and re-run the test suite before committing a re-pin")
    return 0


if __name__ == "__main__":
    sys.exit(main())
