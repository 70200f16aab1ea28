"""Brute-force reference implementations for differential testing.

The oracle functions work from definitions only: subset sweeps, double loops
and explicit enumeration of selection sequences. They read the data in
Preference, FeasibleSet and GroundSpace objects but call none of the kernel
algorithms, and they recompute distances from raw coordinates. The compare_*
helpers and campaigns pair each oracle with its kernel counterpart.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import domains as _domains
from . import preference as _preference
from . import sequences as _sequences
from .preference import Preference
from .space import ATOL, FeasibleSet, GroundSpace

SUBSET_LIMIT = 15
SELECTION_LIMIT = 200_000


class OracleGuard(ValueError):
    """Instance too large for brute force."""


@dataclass(frozen=True)
class OracleReport:
    operation: str
    digest: str
    kernel: object
    oracle: object
    agree: bool

    def to_json_line(self) -> str:
        return json.dumps({"operation": self.operation, "digest": self.digest, "kernel": self.kernel,
                           "oracle": self.oracle, "agree": self.agree}, sort_keys=True)


def _digest(*parts) -> str:
    return hashlib.sha1(json.dumps(parts, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _pref_digest(p: Preference, *extra) -> str:
    return _digest(p.holds.astype(int).tolist(), p.space.points.tolist(), *extra)


# ---------------------------------------------------------------- definitions

def oracle_distance(space: GroundSpace, i: int, j: int) -> float:
    a, b = space.points[i], space.points[j]
    diffs = [abs(float(x) - float(y)) for x, y in zip(a, b)]
    if space.metric == "linf":
        return max(diffs)
    return math.sqrt(sum(d * d for d in diffs))


def oracle_hausdorff(space: GroundSpace, a: Sequence[int], b: Sequence[int]) -> float:
    forward = max(min(oracle_distance(space, i, j) for j in b) for i in a)
    backward = max(min(oracle_distance(space, i, j) for i in a) for j in b)
    return max(forward, backward)


def oracle_is_preorder(h: np.ndarray) -> bool:
    n = h.shape[0]
    if not all(h[i, i] for i in range(n)):
        return False
    return all(not (h[i, j] and h[j, k]) or h[i, k] for i in range(n) for j in range(n) for k in range(n))


def all_preorders(n: int) -> Iterator[np.ndarray]:
    """Every reflexive and transitive relation on n labelled points (n <= 4)."""
    if n > 4:
        raise OracleGuard("exhaustive preorder sweep is limited to 4 points")
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in range(1 << len(off)):
        h = np.eye(n, dtype=bool)
        for k, (i, j) in enumerate(off):
            if bits >> k & 1:
                h[i, j] = True
        if oracle_is_preorder(h):
            yield h


def oracle_max(p: Preference, a: FeasibleSet) -> list[int]:
    h = p.holds
    return [x for x in a.members if not any(h[y, x] and not h[x, y] for y in a.members)]


def oracle_min(p: Preference, a: FeasibleSet) -> list[int]:
    h = p.holds
    return [x for x in a.members if not any(h[x, y] and not h[y, x] for y in a.members)]


def oracle_maximal_domains(p: Preference, b: FeasibleSet) -> list[tuple[int, ...]]:
    """Sweep all subsets of B, keep complete ones with no complete one-point extension."""
    idx = list(b.members)
    m = len(idx)
    if m > SUBSET_LIMIT:
        raise OracleGuard(f"subset sweep limited to {SUBSET_LIMIT} points, got {m}")
    h = p.holds
    comparable = [sum(1 << k for k in range(m) if h[idx[v], idx[k]] or h[idx[k], idx[v]]) for v in range(m)]
    complete = np.zeros(1 << m, dtype=bool)
    complete[0] = True
    for s in range(1, 1 << m):
        low = s & -s
        v = low.bit_length() - 1
        rest = s ^ low
        complete[s] = complete[rest] and (rest & ~comparable[v]) == 0
    out = []
    for s in np.flatnonzero(complete):
        s = int(s)
        if s and not any(not s >> v & 1 and complete[s | 1 << v] for v in range(m)):
            out.append(tuple(idx[k] for k in range(m) if s >> k & 1))
    return sorted(out)


def oracle_ls(seq: _sequences.ProblemSequence, limit: int = SELECTION_LIMIT) -> list[tuple[int, ...]]:
    """Candidates matched within epsilon at >= m tail indices by some selection sequence."""
    tail = seq.terms[-seq.window:]
    collections = [oracle_maximal_domains(t.preference, t.feasible) for t in tail]
    total = math.prod(len(c) for c in collections)
    if total > limit:
        raise OracleGuard(f"{total} selection sequences exceed the bound {limit}")
    pool = sorted({d for c in collections for d in c}
                  | set(oracle_maximal_domains(seq.limit.preference, seq.limit.feasible)))
    eps, need = seq.policy.epsilon, seq.policy.min_matches
    memo: dict[tuple, bool] = {}

    def close(c, d) -> bool:
        key = (c, d)
        if key not in memo:
            memo[key] = oracle_hausdorff(seq.space, c, d) <= eps + ATOL
        return memo[key]

    found = set()
    for selection in itertools.product(*collections):
        for c in pool:
            if c not in found and sum(close(c, d) for d in selection) >= need:
                found.add(c)
    return sorted(found)


# ---------------------------------------------------------------- differential comparisons

def compare_max(p: Preference, a: FeasibleSet) -> OracleReport:
    k = list(_preference.max_elements(p, a).members)
    o = oracle_max(p, a)
    return OracleReport("max_elements", _pref_digest(p, a.members), k, o, k == o)


def compare_min(p: Preference, a: FeasibleSet) -> OracleReport:
    k = list(_preference.min_elements(p, a).members)
    o = oracle_min(p, a)
    return OracleReport("min_elements", _pref_digest(p, a.members), k, o, k == o)


def compare_maximal_domains(p: Preference, b: FeasibleSet) -> OracleReport:
    k = [list(d.members) for d in _domains.maximal_domains(p, b)]
    o = [list(d) for d in oracle_maximal_domains(p, b)]
    return OracleReport("maximal_domains", _pref_digest(p, b.members), k, o, k == o)


def compare_max_via_domains(p: Preference, a: FeasibleSet) -> OracleReport:
    k = list(_domains.max_via_domains(p, a).members)
    o = oracle_max(p, a)
    return OracleReport("max_via_domains", _pref_digest(p, a.members), k, o, k == o)


def compare_ls(seq: _sequences.ProblemSequence) -> OracleReport:
    """Agreement means the kernel's accumulation sets are a subset of the oracle's."""
    k = [list(a.members) for a in _sequences.ls_domains(seq).accumulation_sets]
    o = [list(c) for c in oracle_ls(seq)]
    return OracleReport("ls_domains", _digest(seq.name, seq.horizon, seq.policy.__dict__), k, o,
                        {tuple(x) for x in k} <= {tuple(x) for x in o})


def _line_space(size: int) -> GroundSpace:
    return GroundSpace(np.arange(size, dtype=float)[:, None], "linf", 1.0, 1.0)


def exhaustive_campaign(size: int = 4) -> Iterator[OracleReport]:
    """Every preorder on ``size`` points against every nonempty base subset."""
    space = _line_space(size)
    subsets = [FeasibleSet(space, [i for i in range(size) if s >> i & 1]) for s in range(1, 1 << size)]
    for h in all_preorders(size):
        p = Preference(space, h)
        for b in subsets:
            yield compare_maximal_domains(p, b)


def random_campaign(count: int, seed: int = 0, max_size: int = 12) -> Iterator[OracleReport]:
    """Seeded random preorders (sizes 1..max_size) on random base subsets."""
    from .scenarios import random_preference

    rng = np.random.default_rng(seed)
    for _ in range(count):
        size = int(rng.integers(1, max_size + 1))
        space = _line_space(size)
        p = Preference(space, random_preference(rng, size))
        mask = rng.random(size) < 0.8
        mask[int(rng.integers(size))] = True
        b = FeasibleSet.from_mask(space, mask)
        yield compare_maximal_domains(p, b)
        yield compare_max(p, b)
        yield compare_min(p, b)
        yield compare_max_via_domains(p, b)


def catalog_ls_campaign() -> Iterator[OracleReport]:
    from .scenarios import CATALOG, generate

    for name in sorted(CATALOG):
        yield compare_ls(generate(CATALOG[name].oracle_spec))
