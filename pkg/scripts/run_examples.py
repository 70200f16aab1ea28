"""Run every catalog scenario through its verifier and print a verdict table.

Usage: python scripts/run_examples.py [--horizon N] [--out DIR]

With --out, each report is also written to DIR/<scenario>.json.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from prefkernel.cli import atomic_write, dumps, run_verifier
from prefkernel.scenarios import CATALOG, generate


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--out", type=Path)
    args = parser.parse_args(argv)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    mismatches = 0
    for name in sorted(CATALOG):
        entry = CATALOG[name]
        start = time.perf_counter()
        report = run_verifier(entry.verifier, generate(entry.spec.with_overrides(horizon=args.horizon)))
        took = time.perf_counter() - start
        ok = report.verdict == entry.expected
        mismatches += not ok
        print(f"{name:26s} {report.verdict.value:18s} expected {entry.expected.value:18s} "
              f"{'ok' if ok else 'MISMATCH':8s} {took:6.2f}s")
        if args.out:
            atomic_write(args.out / f"{name}.json", dumps(report.to_dict()))
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
