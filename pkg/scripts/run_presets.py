#!/usr/bin/env python3
"""Run bundled designs and write their artifacts under one root directory.

Each preset lands in <out>/<name>/ with its manifest, so the whole set can be
replayed or checksum-compared later. Without --only, runs everything,
including the full focusing sweep (the slowest entry by far).
"""

import argparse
import sys
import time
from pathlib import Path

from iplsim import PRESETS, run_preset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description=__doc__.splitlines()[0],
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--out", default="out", metavar="DIR",
                        help="root output directory")
    parser.add_argument("--only", nargs="*", metavar="NAME",
                        help="subset of preset names (default: all)")
    parser.add_argument("--emit", action="append", choices=("csv", "pgm", "json"),
                        help="artifact kinds for non-sweep presets (default: all)")
    args = parser.parse_args(argv)

    names = args.only or list(PRESETS)
    unknown = [n for n in names if n not in PRESETS]
    if unknown:
        parser.error(f"unknown preset(s): {', '.join(unknown)}; "
                     f"known: {', '.join(PRESETS)}")

    emit = tuple(args.emit) if args.emit else ("csv", "pgm", "json")
    root = Path(args.out)
    width = max(len(n) for n in names)
    for name in names:
        start = time.perf_counter()
        manifest = run_preset(name, out_dir=root / name, emit=emit)
        elapsed = time.perf_counter() - start
        files = ", ".join(sorted(manifest.checksums))
        print(f"{name:<{width}}  {elapsed:6.1f} s  {manifest.kind:<5}  {files}")
    print(f"artifacts under {root}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
