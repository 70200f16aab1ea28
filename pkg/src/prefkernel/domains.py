"""Maximal comparability domains.

A set is a domain when the preference is complete on it, so domains are
exactly the cliques of the comparability graph and maximal domains relative
to B are its maximal cliques. Enumeration uses Bron-Kerbosch with Tomita
pivoting over Python-int bitsets, scanning vertices in ascending index.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .preference import Preference, has_exterior_bound, indifference_partition, is_complete_on, is_dense
from .space import FeasibleSet, _same_space, is_connected

DEFAULT_CLIQUE_CAP = 10**6


class CliqueCapExceeded(RuntimeError):
    """Maximal-clique enumeration produced more cliques than the cap allows."""


def clique_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("PREFKERNEL_CLIQUE_CAP")
    return int(env) if env else DEFAULT_CLIQUE_CAP


@dataclass(frozen=True)
class DomainCollection:
    base: FeasibleSet
    domains: tuple[FeasibleSet, ...]

    def __len__(self) -> int:
        return len(self.domains)

    def __iter__(self):
        return iter(self.domains)

    def __contains__(self, d: FeasibleSet) -> bool:
        return d.members in {x.members for x in self.domains}

    def containing(self, i: int) -> list[FeasibleSet]:
        return [d for d in self.domains if i in d]

    def to_json(self) -> dict:
        return {"base": list(self.base.members), "domains": [list(d.members) for d in self.domains]}

    @classmethod
    def from_json(cls, data: dict, space) -> DomainCollection:
        doms = sorted(tuple(sorted(d)) for d in data["domains"])
        return cls(FeasibleSet(space, data["base"]), tuple(FeasibleSet(space, d) for d in doms))


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def comparability_graph(p: Preference, b: FeasibleSet) -> dict[int, set[int]]:
    """Adjacency over members of ``b``: an edge iff the two points are comparable."""
    _same_space(p.space, b.space)
    sub = p.restricted(b)
    comp = sub | sub.T
    np.fill_diagonal(comp, False)
    idx = b.members
    return {idx[r]: {idx[c] for c in np.flatnonzero(comp[r])} for r in range(len(idx))}


def _maximal_cliques(nbrs: list[int], cap: int) -> list[int]:
    out: list[int] = []
    stack = [(0, (1 << len(nbrs)) - 1, 0)]
    while stack:
        r, p, x = stack.pop()
        if not p:
            if not x:
                out.append(r)
                if len(out) > cap:
                    raise CliqueCapExceeded(f"more than {cap} maximal domains; raise the cap or shrink the instance")
            continue
        pivot, best = -1, -1
        for u in _bits(p | x):
            c = (p & nbrs[u]).bit_count()
            if c > best:
                pivot, best = u, c
        children = []
        for v in _bits(p & ~nbrs[pivot]):
            bit = 1 << v
            children.append((r | bit, p & nbrs[v], x & nbrs[v]))
            p &= ~bit
            x |= bit
        stack.extend(reversed(children))
    return out


def maximal_domains(p: Preference, b: FeasibleSet, cap: int | None = None) -> DomainCollection:
    """All maximal domains relative to ``b``, canonically sorted."""
    _same_space(p.space, b.space)
    sub = p.restricted(b)
    comp = sub | sub.T
    n = len(b)
    nbrs = []
    for r in range(n):
        row = comp[r].copy()
        row[r] = False
        nbrs.append(int.from_bytes(np.packbits(row[::-1]).tobytes(), "big") >> ((-n) % 8))
    cliques = _maximal_cliques(nbrs, clique_cap(cap))
    idx = b.members
    doms = sorted(tuple(idx[k] for k in _bits(c)) for c in cliques)
    return DomainCollection(b, tuple(FeasibleSet(b.space, d) for d in doms))


def best_elements(p: Preference, d: FeasibleSet) -> FeasibleSet:
    """Elements of a domain weakly above every element of it."""
    if not is_complete_on(p, d):
        raise ValueError("best elements are only defined on a domain (complete subset)")
    sub = p.restricted(d)
    return FeasibleSet(d.space, d.index[sub.all(axis=1)].tolist())


def max_via_domains(p: Preference, k: FeasibleSet, cap: int | None = None) -> FeasibleSet:
    """Union of best elements over all maximal domains relative to ``k``."""
    found: set[int] = set()
    for d in maximal_domains(p, k, cap):
        found.update(best_elements(p, d).members)
    return FeasibleSet(k.space, found)


def is_maximal_domain(p: Preference, d: FeasibleSet, k: FeasibleSet) -> tuple[bool, int | None]:
    """One-point extension test: a complete D in K with no point of K \\ D comparable to all of D.

    Completeness is hereditary, so this is equivalent to maximality under
    inclusion. The witness is an extending point, or None.
    """
    _same_space(p.space, d.space)
    if not d.issubset(k):
        raise ValueError("D must be a subset of K")
    if not is_complete_on(p, d):
        return False, None
    outside = np.array(k.minus(d), dtype=np.intp)
    if outside.size == 0:
        return True, None
    comp = p.holds[np.ix_(outside, d.index)] | p.holds[np.ix_(d.index, outside)].T
    hit = np.flatnonzero(comp.all(axis=1))
    if hit.size:
        return False, int(outside[hit[0]])
    return True, None


def extend_to_maximal_domain(p: Preference, seed, k: FeasibleSet) -> FeasibleSet:
    """Greedily grow a domain containing ``seed`` inside ``k`` (ascending index order)."""
    members = sorted({seed} if isinstance(seed, (int, np.integer)) else set(seed))
    comp = p.holds | p.holds.T
    chosen = np.zeros(p.space.size, dtype=bool)
    chosen[members] = True
    if not comp[np.ix_(members, members)].all():
        raise ValueError("seed is not a domain")
    ok = comp[members].all(axis=0)
    for i in k.members:
        if not chosen[i] and ok[i]:
            chosen[i] = True
            ok &= comp[i]
    return FeasibleSet.from_mask(p.space, chosen)


@dataclass(frozen=True)
class DomainCharacterization:
    is_domain: bool
    is_connected: bool
    has_exterior_bound: bool
    exterior_witness: int | None
    verdict: str
    hypotheses: dict = field(default_factory=dict)
    enumeration_member: bool | None = None
    agrees: bool | None = None

    def to_dict(self) -> dict:
        return {
            "is_domain": self.is_domain,
            "is_connected": self.is_connected,
            "has_exterior_bound": self.has_exterior_bound,
            "exterior_witness": self.exterior_witness,
            "verdict": self.verdict,
            "hypotheses": dict(self.hypotheses),
            "enumeration_member": self.enumeration_member,
            "agrees": self.agrees,
        }


def characterize_domain(p: Preference, k: FeasibleSet, d: FeasibleSet, cap: int | None = None,
                        density_slack: float = 0.0) -> DomainCharacterization:
    """Connected-domain-without-exterior-bound test, with its hypotheses reported.

    The test is authoritative only when K is dense and the indifference
    classes in K are connected; otherwise the verdict is diagnostic and the
    report names the failed hypothesis. When the hypotheses hold the verdict
    is cross-checked against enumeration.
    """
    if not d.issubset(k):
        raise ValueError("D must be a subset of K")
    dom = is_complete_on(p, d)
    conn = is_connected(d)
    bound, witness = has_exterior_bound(p, d, k)
    dense, dense_witness = is_dense(p, k, slack=density_slack)
    classes_ok = all(is_connected(c) for c in indifference_partition(p, k))
    hyp = {"dense": dense, "dense_witness": dense_witness, "indifference_classes_connected": classes_ok}
    verdict = "maximal" if dom and conn and not bound else "not maximal"
    member = agrees = None
    if dense and classes_ok:
        member = d in maximal_domains(p, k, cap)
        agrees = member == (verdict == "maximal")
    return DomainCharacterization(dom, conn, bound, witness, verdict, hyp, member, agrees)
