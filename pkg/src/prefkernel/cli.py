"""Command-line entry point: run catalog scenarios, verifiers and differential campaigns.

Exit codes: 0 when every verdict matches its expectation (and every oracle
comparison agrees), 1 on a mismatch or disagreement, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import oracle
from .scenarios import CATALOG, ScenarioSpec, generate, load_spec
from .sequences import CSV_FIELDS, VERIFIERS, Verdict, VerifierReport

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: str | None = None
    spec_path: str | None = None
    verifier: str | None = None
    epsilon: float | None = None
    window: int | None = None
    min_matches: int | None = None
    horizon: int | None = None
    seed: int | None = None
    out: str | None = None
    fmt: str = "json"
    oracle_log: str | None = None

    def __post_init__(self):
        if self.command not in ("run", "suite", "list"):
            raise UsageError(f"unknown command {self.command!r}")
        if self.epsilon is not None and self.epsilon < 0:
            raise UsageError("--epsilon must be nonnegative")
        for name in ("window", "min_matches", "horizon"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.window is not None and self.min_matches is not None and self.min_matches > self.window:
            raise UsageError("--min-matches cannot exceed --window")
        if self.fmt not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        if self.command == "run" and (self.scenario is None) == (self.spec_path is None):
            raise UsageError("run needs exactly one of --scenario or --spec")
        if self.verifier is not None and self.verifier not in VERIFIERS:
            raise UsageError(f"unknown verifier {self.verifier!r}; choose from {sorted(VERIFIERS)}")

    def apply(self, spec: ScenarioSpec) -> ScenarioSpec:
        return spec.with_overrides(horizon=self.horizon, seed=self.seed, epsilon=self.epsilon,
                                   tail_window=self.window, min_matches=self.min_matches)


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CSV_FIELDS), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: "" if r[k] is None else r[k] for k in CSV_FIELDS})
    return buf.getvalue()


def run_verifier(name: str, seq, seed: int | None = None) -> VerifierReport:
    fn = VERIFIERS[name]
    if name in ("verify_simple_max_theorem", "corollary_floor_check"):
        return fn(seq, seed=seed or 0)
    return fn(seq)


def resolve(config: RunConfig) -> tuple[ScenarioSpec, str, Verdict | None]:
    """Scenario spec, verifier name and expected verdict for a run."""
    if config.scenario is not None:
        if config.scenario not in CATALOG:
            raise UsageError(f"unknown scenario {config.scenario!r}; see 'prefkernel list'")
        entry = CATALOG[config.scenario]
        spec, verifier, expected = entry.spec, entry.verifier, entry.expected
    else:
        try:
            spec, extra = load_spec(config.spec_path)
        except FileNotFoundError:
            raise UsageError(f"spec file {config.spec_path!r} does not exist") from None
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"bad spec file: {exc}") from None
        entry = next((e for e in CATALOG.values() if e.spec.generator == spec.generator), None)
        verifier = extra.get("verifier") or (entry.verifier if entry else None)
        expected = Verdict(extra["expected"]) if "expected" in extra else None
        if expected is None and entry is not None and verifier == entry.verifier and spec.name == entry.spec.name:
            expected = entry.expected
        if verifier is None:
            raise UsageError("spec file names no verifier and its generator has no catalog default")
    if config.verifier is not None and config.verifier != verifier:
        verifier, expected = config.verifier, None
    return config.apply(spec), verifier, expected


def execute(spec: ScenarioSpec, verifier: str, seed: int | None) -> VerifierReport:
    try:
        seq = generate(spec)
        return run_verifier(verifier, seq, seed)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_run(config: RunConfig) -> int:
    spec, verifier, expected = resolve(config)
    report = execute(spec, verifier, config.seed)
    match = None if expected is None else report.verdict == expected
    if config.fmt == "csv":
        text = rows_csv(report.rows)
    else:
        text = dumps({
            "scenario": spec.name,
            "spec": spec.to_dict(),
            "verifier": verifier,
            "expected": None if expected is None else expected.value,
            "matches_expected": match,
            "report": report.to_dict(),
        })
    if config.out:
        try:
            atomic_write(config.out, text)
        except OSError as exc:
            raise UsageError(f"cannot write {config.out}: {exc}") from None
    else:
        sys.stdout.write(text)
    status = "no expectation" if match is None else ("match" if match else "MISMATCH")
    print(f"{spec.name}: {verifier} -> {report.verdict.value} ({status})", file=sys.stderr)
    return EXIT_MISMATCH if match is False else EXIT_OK


def cmd_suite(config: RunConfig) -> int:
    lines = [f"{'scenario':28s} {'verifier':28s} {'verdict':18s} {'expected':18s} status"]
    results, failed = [], False
    for name in sorted(CATALOG):
        entry = CATALOG[name]
        spec = config.apply(entry.spec)
        report = execute(spec, entry.verifier, config.seed)
        ok = report.verdict == entry.expected
        failed |= not ok
        results.append({"scenario": name, "verifier": entry.verifier, "verdict": report.verdict.value,
                        "expected": entry.expected.value, "ok": ok})
        lines.append(f"{name:28s} {entry.verifier:28s} {report.verdict.value:18s} {entry.expected.value:18s} "
                     f"{'ok' if ok else 'MISMATCH'}")
    campaigns = {
        "exhaustive-4-point": oracle.exhaustive_campaign(4),
        "random-small": oracle.random_campaign(200, seed=config.seed or 0),
        "catalog-ls": oracle.catalog_ls_campaign(),
    }
    log = []
    summary = {}
    for cname, stream in campaigns.items():
        checked = disagree = 0
        for rep in stream:
            checked += 1
            if not rep.agree:
                disagree += 1
            if config.oracle_log or not rep.agree:
                log.append(rep.to_json_line())
        summary[cname] = {"checked": checked, "disagreements": disagree}
        failed |= disagree > 0
        lines.append(f"campaign {cname:19s} checked {checked:6d}  disagreements {disagree}")
    print("\n".join(lines))
    try:
        if config.out:
            atomic_write(config.out, dumps({"scenarios": results, "campaigns": summary,
                                            "disagreements": [json.loads(x) for x in log if '"agree": false' in x]}))
        if config.oracle_log:
            atomic_write(config.oracle_log, "".join(x + "\n" for x in log))
    except OSError as exc:
        raise UsageError(f"cannot write report: {exc}") from None
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_list(config: RunConfig) -> int:
    for name in sorted(CATALOG):
        e = CATALOG[name]
        print(f"{name:28s} {e.verifier:28s} expect {e.expected.value:18s} {e.note}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prefkernel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--epsilon", type=float, help="limit tolerance (default 2h)")
        p.add_argument("--window", type=int, help="tail window length (default max(m, N/4))")
        p.add_argument("--min-matches", type=int, dest="min_matches", help="LS subsequence threshold m")
        p.add_argument("--horizon", type=int, help="number of terms N")
        p.add_argument("--seed", type=int, help="seed for random scenarios and sampling")
        p.add_argument("--out", help="report path (written atomically)")

    run = sub.add_parser("run", help="run one scenario through a verifier")
    run.add_argument("--scenario", help="catalog scenario name")
    run.add_argument("--spec", dest="spec_path", help="JSON or TOML scenario spec")
    run.add_argument("--verifier", help="override the scenario's default verifier")
    run.add_argument("--format", dest="fmt", default="json", choices=["json", "csv"])
    common(run)
    suite = sub.add_parser("suite", help="run the catalog plus differential oracle campaigns")
    common(suite)
    suite.add_argument("--oracle-log", dest="oracle_log", help="write every oracle report as JSON lines")
    sub.add_parser("list", help="list catalog scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = RunConfig(**vars(args))
        return {"run": cmd_run, "suite": cmd_suite, "list": cmd_list}[config.command](config)
    except UsageError as exc:
        print(f"prefkernel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
