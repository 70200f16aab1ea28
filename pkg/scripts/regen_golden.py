"""Regenerate the golden CLI reports in tests/golden/.

Each catalog scenario is run at horizon 20 and written byte-for-byte as the
CLI would write it. Rerun after an intentional change to report contents.
"""

from __future__ import annotations

import sys
from pathlib import Path

from prefkernel.cli import main
from prefkernel.scenarios import CATALOG

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"
HORIZON = "20"


def golden_args(name: str, out: Path) -> list[str]:
    return ["run", "--scenario", name, "--horizon", HORIZON, "--out", str(out)]


def regenerate() -> int:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    status = 0
    for name in sorted(CATALOG):
        code = main(golden_args(name, GOLDEN / f"{name}.json"))
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(regenerate())
