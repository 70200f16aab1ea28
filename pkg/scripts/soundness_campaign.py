"""Seeded soundness campaign for the general maximality verifier.

Usage: python scripts/soundness_campaign.py [--seeds N] [--size S] [--horizon H]

Generates random convergent sequences, runs verify_general_max_theorem on
each, tallies verdicts and exits 1 if any COUNTEREXAMPLE appears.
"""

from __future__ import annotations

import argparse
import collections
import sys

from prefkernel.scenarios import CATALOG, generate
from prefkernel.sequences import Verdict, verify_general_max_theorem


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=500)
    parser.add_argument("--size", type=int, default=8)
    parser.add_argument("--horizon", type=int, default=12)
    args = parser.parse_args(argv)
    spec = CATALOG["random"].spec.with_params(size=args.size)
    tally: collections.Counter = collections.Counter()
    bad = []
    for seed in range(args.seeds):
        rep = verify_general_max_theorem(generate(spec.with_overrides(horizon=args.horizon, seed=seed)))
        tally[rep.verdict.value] += 1
        if rep.verdict is Verdict.COUNTEREXAMPLE:
            bad.append(seed)
    for verdict, count in sorted(tally.items()):
        print(f"{verdict:18s} {count}")
    if bad:
        print(f"counterexamples at seeds {bad}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
