"""Problem sequences, LS approximation, the tail-domain condition and the theorem verifiers.

A problem sequence is a finite family n -> (preference_n, K_n, x_n) for
n = 1..N with a declared limit problem. Every limit statement is decided by
the tail-window policy: a coordinate converges when every index in the final
window lies within epsilon of the declared limit. LS (the accumulation
collection) is approximated by matching: a candidate set enters when some
member of the n-th collection lies within epsilon of it at no fewer than
``min_matches`` tail indices. The candidate pool is the union of tail-term
collections and the limit collection.

Verifiers keep premise failures (PREMISE_VIOLATION, NOT_APPLICABLE) apart
from conclusion failures (COUNTEREXAMPLE).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .domains import (CliqueCapExceeded, DomainCollection, extend_to_maximal_domain, is_maximal_domain,
                      maximal_domains)
from .preference import (MultiUtility, Preference, from_multi_utility, indifference_partition, is_dense,
                         is_partial_order, max_elements, min_elements, relation_hausdorff_distance, validate)
from .space import (ATOL, FeasibleSet, GroundSpace, LimitPolicy, _same_space, hausdorff_distance, is_connected,
                    metric_distance, set_sequence_limit)


class Verdict(str, Enum):
    PASS = "PASS"
    PREMISE_VIOLATION = "PREMISE_VIOLATION"
    NOT_APPLICABLE = "NOT_APPLICABLE"
    COUNTEREXAMPLE = "COUNTEREXAMPLE"
    UNDETERMINED = "UNDETERMINED"


class VaryingPreference(ValueError):
    """The simple theorem needs one fixed preference; use verify_general_max_theorem."""


@dataclass(frozen=True)
class Term:
    n: int
    preference: Preference
    feasible: FeasibleSet
    x: int | None = None


@dataclass(frozen=True)
class LimitProblem:
    preference: Preference
    feasible: FeasibleSet
    x: int | None = None


@dataclass(frozen=True, eq=False)
class ProblemSequence:
    space: GroundSpace
    terms: tuple[Term, ...]
    limit: LimitProblem
    policy: LimitPolicy
    name: str = ""
    utility: MultiUtility | None = None
    distinguished_domains: tuple[FeasibleSet, ...] | None = None

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("a problem sequence needs at least one term")
        for k, t in enumerate(terms, start=1):
            if t.n != k:
                raise ValueError(f"terms must be indexed 1..N in order; got n={t.n} at position {k}")
            _same_space(self.space, t.preference.space)
            _same_space(self.space, t.feasible.space)
        _same_space(self.space, self.limit.preference.space)
        if self.policy.window(len(terms)) > len(terms):
            raise ValueError("horizon is shorter than the tail window")
        bad = validate(self.limit.preference, limit=1)
        if bad:
            raise ValueError(f"declared limit preference is invalid: {bad[0]}")
        if self.distinguished_domains is not None and len(self.distinguished_domains) != len(terms):
            raise ValueError("distinguished_domains must align with the terms")

    @property
    def horizon(self) -> int:
        return len(self.terms)

    @property
    def window(self) -> int:
        return self.policy.window(self.horizon)

    def tail(self) -> tuple[Term, ...]:
        return self.terms[-self.window:]

    @property
    def fixed_preference(self) -> bool:
        ref = self.limit.preference
        return all(t.preference is ref or t.preference == ref for t in self.terms)

    def with_policy(self, **overrides) -> ProblemSequence:
        return replace(self, policy=replace(self.policy, **overrides))

    def truncated(self, horizon: int) -> ProblemSequence:
        dd = None if self.distinguished_domains is None else self.distinguished_domains[:horizon]
        return replace(self, terms=self.terms[:horizon], distinguished_domains=dd)

    def reversed(self) -> ProblemSequence:
        """Same problems under the dual relations; maximal and minimal elements swap."""
        rev = {}

        def flip(p: Preference) -> Preference:
            if id(p) not in rev:
                rev[id(p)] = p.reverse()
            return rev[id(p)]

        terms = tuple(replace(t, preference=flip(t.preference)) for t in self.terms)
        return replace(self, terms=terms, limit=replace(self.limit, preference=flip(self.limit.preference)),
                       utility=None)


@functools.lru_cache(maxsize=4096)
def _cached_domains(p: Preference, k: FeasibleSet, cap: int | None) -> DomainCollection:
    return maximal_domains(p, k, cap)


def term_domains(p: Preference, k: FeasibleSet, cap: int | None = None) -> DomainCollection:
    return _cached_domains(p, k, cap)


# ---------------------------------------------------------------- limits

@dataclass(frozen=True)
class LimitReport:
    pref_converges: bool
    sets_converge: bool
    points_converge: bool | None
    pref_distances: tuple[float, ...]
    set_distances: tuple[float, ...]
    point_distances: tuple[float, ...] | None

    @property
    def all_converge(self) -> bool:
        return self.pref_converges and self.sets_converge and self.points_converge is not False

    def to_dict(self) -> dict:
        return {
            "pref_converges": self.pref_converges,
            "sets_converge": self.sets_converge,
            "points_converge": self.points_converge,
        }


def detect_limits(seq: ProblemSequence) -> LimitReport:
    """Test each coordinate against the declared limit over the tail window."""
    lim = seq.limit
    dist = seq.space.distances
    pref_d, set_d, pt_d = [], [], []
    for t in seq.terms:
        pref_d.append(relation_hausdorff_distance(t.preference, lim.preference))
        set_d.append(hausdorff_distance(t.feasible, lim.feasible))
        if t.x is not None and lim.x is not None:
            pt_d.append(float(dist[t.x, lim.x]))
    w = seq.window
    within = seq.policy.within
    points = None
    if lim.x is not None and len(pt_d) == seq.horizon:
        points = all(within(d) for d in pt_d[-w:])
    return LimitReport(
        all(within(d) for d in pref_d[-w:]),
        all(within(d) for d in set_d[-w:]),
        points,
        tuple(pref_d),
        tuple(set_d),
        tuple(pt_d) if len(pt_d) == seq.horizon else None,
    )


# ---------------------------------------------------------------- LS approximation

@dataclass(frozen=True)
class Provenance:
    indices: tuple[int, ...]
    matched: tuple[FeasibleSet, ...]
    distances: tuple[float, ...]


@dataclass(frozen=True)
class LsApproximation:
    accumulation_sets: tuple[FeasibleSet, ...]
    provenance: tuple[Provenance, ...]

    def __len__(self) -> int:
        return len(self.accumulation_sets)

    def __contains__(self, s: FeasibleSet) -> bool:
        return any(a.members == s.members for a in self.accumulation_sets)

    def to_dict(self) -> dict:
        return {
            "accumulation_sets": [list(a.members) for a in self.accumulation_sets],
            "provenance": [{"indices": list(p.indices), "distances": list(p.distances)} for p in self.provenance],
        }


def _masks(sets: Sequence[FeasibleSet], n: int) -> np.ndarray:
    out = np.zeros((len(sets), n), dtype=bool)
    for r, s in enumerate(sets):
        out[r, s.index] = True
    return out


def _near(space: GroundSpace, eps: float) -> np.ndarray:
    return (space.distances <= eps + ATOL).astype(np.float32)


def _match(cands: np.ndarray, targets: np.ndarray, near: np.ndarray) -> np.ndarray:
    """(c, k) matrix of d_H(candidate, target) <= eps, using epsilon-dilations."""
    cf, tf = cands.astype(np.float32), targets.astype(np.float32)
    dil_t = (tf @ near) > 0.5
    dil_c = (cf @ near) > 0.5
    c_in_t = (cf @ (~dil_t).T.astype(np.float32)) < 0.5
    t_in_c = (tf @ (~dil_c).T.astype(np.float32)) < 0.5
    return c_in_t & t_in_c.T


def _dedup(sets: Iterable[FeasibleSet]) -> list[FeasibleSet]:
    seen, out = set(), []
    for s in sets:
        if s.members not in seen:
            seen.add(s.members)
            out.append(s)
    return out


def ls_approximation(space: GroundSpace, tail: Sequence[tuple[int, Sequence[FeasibleSet]]],
                     extra: Sequence[FeasibleSet], policy: LimitPolicy) -> LsApproximation:
    """Tail-window matching approximation of LS over a family of collections.

    ``tail`` pairs each index n with its collection.
    """
    pool = sorted(_dedup([s for _, coll in tail for s in coll] + list(extra)), key=lambda s: s.members)
    if not pool:
        return LsApproximation((), ())
    near = _near(space, policy.epsilon)
    pm = _masks(pool, space.size)
    hits: list[list[tuple[int, FeasibleSet]]] = [[] for _ in pool]
    for n, coll in tail:
        coll = list(coll)
        match = _match(pm, _masks(coll, space.size), near)
        for c in np.flatnonzero(match.any(axis=1)):
            hits[c].append((n, coll[int(np.argmax(match[c]))]))
    acc, prov = [], []
    for c, h in enumerate(hits):
        if len(h) >= policy.min_matches:
            acc.append(pool[c])
            prov.append(Provenance(tuple(n for n, _ in h), tuple(m for _, m in h),
                                   tuple(hausdorff_distance(pool[c], m) for _, m in h)))
    return LsApproximation(tuple(acc), tuple(prov))


def ls_domains(seq: ProblemSequence, cap: int | None = None) -> LsApproximation:
    """LS approximation of the maximal-domain collections along the tail."""
    tail = [(t.n, term_domains(t.preference, t.feasible, cap).domains) for t in seq.tail()]
    extra = term_domains(seq.limit.preference, seq.limit.feasible, cap).domains
    return ls_approximation(seq.space, tail, extra, seq.policy)


def ls_extremes(seq: ProblemSequence, which: str = "max") -> LsApproximation:
    """LS approximation over the singleton families {{x} : x in Max_n} (or Min_n)."""
    pick = {"max": max_elements, "min": min_elements}[which]
    tail = [(t.n, [FeasibleSet(seq.space, [i]) for i in pick(t.preference, t.feasible)]) for t in seq.tail()]
    extra = [FeasibleSet(seq.space, [i]) for i in pick(seq.limit.preference, seq.limit.feasible)]
    return ls_approximation(seq.space, tail, extra, seq.policy)


@dataclass(frozen=True)
class Condition3:
    """Tail-domain condition: the LS of the term maximal-domain collections sits inside the limit's."""

    holds: bool
    violating: FeasibleSet | None
    ls: LsApproximation
    limit_domains: DomainCollection

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violating": None if self.violating is None else list(self.violating.members),
            "accumulation_count": len(self.ls),
            "limit_domain_count": len(self.limit_domains),
        }


def condition3_holds(seq: ProblemSequence, ls: LsApproximation | None = None, epsilon: float | None = None,
                     cap: int | None = None) -> Condition3:
    """Every accumulation set lies within epsilon of an exact maximal domain of the limit."""
    if ls is None:
        ls = ls_domains(seq, cap)
    limit_doms = term_domains(seq.limit.preference, seq.limit.feasible, cap)
    eps = seq.policy.epsilon if epsilon is None else epsilon
    if not ls.accumulation_sets:
        return Condition3(True, None, ls, limit_doms)
    match = _match(_masks(ls.accumulation_sets, seq.space.size), _masks(limit_doms.domains, seq.space.size),
                   _near(seq.space, eps))
    ok = match.any(axis=1)
    bad = np.flatnonzero(~ok)
    violating = ls.accumulation_sets[int(bad[0])] if bad.size else None
    return Condition3(bool(ok.all()), violating, ls, limit_doms)


# ---------------------------------------------------------------- midpoint certificates

class MidpointError(ValueError):
    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class MidpointCertificate:
    """Balls around the combination and the dominated point with strict dominance across them."""

    alpha: float
    better: int
    worse: int
    center: tuple[float, ...]
    radius: float
    gap: float
    center_ball: tuple[int, ...]
    worse_ball: tuple[int, ...]

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _ball(space: GroundSpace, coords, radius: float) -> np.ndarray:
    return np.flatnonzero(space.distances_to(coords) < radius)


def _strictly_above(mu: MultiUtility, zs: np.ndarray, xs: np.ndarray) -> bool:
    uz = mu.values[:, zs][:, :, None]
    ux = mu.values[:, xs][:, None, :]
    ge = (uz >= ux).all(axis=0)
    le = (uz <= ux).all(axis=0)
    return bool((ge & ~le).all())


def verify_certificate(cert: MidpointCertificate, mu: MultiUtility) -> bool:
    """Recompute the gap, the radius bound and both balls, then recheck strict dominance."""
    space = mu.space
    if not (0.0 <= cert.alpha < 1.0 and cert.radius > 0 and cert.gap > 0):
        return False
    if mu.lipschitz is None or any(c is None for c in mu.lipschitz):
        return False
    center = np.asarray(cert.center, dtype=float)
    expected = cert.alpha * space.points[cert.better] + (1 - cert.alpha) * space.points[cert.worse]
    if mu.functions is not None and not np.allclose(center, expected, atol=ATOL):
        return False
    gap = float((mu.evaluate(center) - mu.values[:, cert.worse]).min())
    if cert.gap > gap + ATOL:
        return False
    lip = max(mu.lipschitz)
    if lip > 0 and cert.radius > cert.gap / (2 * lip) + ATOL:
        return False
    zs = _ball(space, cert.center, cert.radius)
    xs = _ball(space, space.points[cert.worse], cert.radius)
    if tuple(zs.tolist()) != cert.center_ball or tuple(xs.tolist()) != cert.worse_ball:
        return False
    return _strictly_above(mu, zs, xs)


def midpoint_certificate(mu: MultiUtility, better: int, worse: int, alpha: float = 0.5) -> MidpointCertificate:
    """Certify midpoint continuity at a strict pair following the finite multi-utility argument.

    The center z = alpha*better + (1-alpha)*worse is evaluated exactly when
    utility functions are attached, otherwise snapped to the grid. The gap is
    min_u (u(z) - u(worse)) and the radius is gap / (2 * max Lipschitz).
    """
    space = mu.space
    better, worse = space.check_index(better), space.check_index(worse)
    v = mu.values
    if better == worse or not ((v[:, better] >= v[:, worse]).all() and (v[:, better] > v[:, worse]).any()):
        raise MidpointError("not-strict", f"point {better} does not strictly dominate point {worse}")
    center = alpha * space.points[better] + (1 - alpha) * space.points[worse]
    idx, err = space.nearest(center)
    if err > 1e-12 and mu.functions is None:
        center = space.points[idx]
    uz = mu.evaluate(center)
    gap = float((uz - v[:, worse]).min())
    if gap <= ATOL:
        flags = mu.strictly_quasiconcave
        raise MidpointError("nonpositive-gap",
                            f"gap {gap:g} at pair ({better}, {worse}); strict quasiconcavity flags {flags}")
    if mu.lipschitz is None or any(c is None for c in mu.lipschitz):
        raise MidpointError("missing-lipschitz", "every utility needs a Lipschitz constant")
    lip = max(mu.lipschitz)
    radius = gap / (2 * lip) if lip > 0 else math.inf
    radius = min(radius, float(space.distances.max()) + 1.0)
    zs = _ball(space, center, radius)
    xs = _ball(space, space.points[worse], radius)
    if not _strictly_above(mu, zs, xs):
        raise MidpointError("verification-failed",
                            f"ball check failed at pair ({better}, {worse}); Lipschitz constant {lip:g} too small")
    return MidpointCertificate(alpha, better, worse, tuple(float(c) for c in center), radius, gap,
                               tuple(zs.tolist()), tuple(xs.tolist()))


@dataclass(frozen=True)
class MidpointEvidence:
    holds: bool
    checked: int
    certified: int
    failures: tuple[tuple[int, int, str], ...]

    def to_dict(self) -> dict:
        return {"holds": self.holds, "checked": self.checked, "certified": self.certified,
                "failures": [list(f) for f in self.failures[:10]]}


def midpoint_evidence(mu: MultiUtility, p: Preference, focus: Iterable[tuple[int, int]] = (),
                      sample: int = 200, full_sweep: bool = False, seed: int = 0) -> MidpointEvidence:
    """Certificates on strict pairs: the ``focus`` pairs first, then a seeded sample."""
    if from_multi_utility(mu) != p:
        raise ValueError("multi-utility does not represent the preference")
    pairs = np.argwhere(p.strict)
    chosen = [tuple(map(int, f)) for f in focus]
    seen = set(chosen)
    if full_sweep:
        rest = [tuple(map(int, r)) for r in pairs]
    else:
        rng = np.random.default_rng(seed)
        k = min(len(pairs), max(0, sample - len(chosen)))
        rest = [tuple(map(int, pairs[i])) for i in sorted(rng.choice(len(pairs), size=k, replace=False))] if k else []
    chosen += [r for r in rest if r not in seen]
    failures, ok = [], 0
    for b, w in chosen:
        try:
            midpoint_certificate(mu, b, w)
            ok += 1
        except MidpointError as exc:
            failures.append((b, w, exc.reason))
    return MidpointEvidence(not failures, len(chosen), ok, tuple(failures))


# ---------------------------------------------------------------- reports

@dataclass
class VerifierReport:
    verifier: str
    scenario: str
    verdict: Verdict
    checks: dict
    conclusion: dict
    details: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verifier": self.verifier,
            "scenario": self.scenario,
            "verdict": self.verdict.value,
            "checks": self.checks,
            "conclusion": self.conclusion,
            "details": self.details,
            "rows": self.rows,
        }


CSV_FIELDS = ("n", "hausdorff_feasible", "hausdorff_preference", "domain_count", "x_maximal",
              "matched_domain_distance")


def _rows(seq: ProblemSequence, limits: LimitReport, x_max: Sequence[bool | None] | None = None,
          counts: dict | None = None, matched: dict | None = None) -> list[dict]:
    rows = []
    for k, t in enumerate(seq.terms):
        rows.append({
            "n": t.n,
            "hausdorff_feasible": limits.set_distances[k],
            "hausdorff_preference": limits.pref_distances[k],
            "domain_count": None if counts is None else counts.get(t.n),
            "x_maximal": None if x_max is None else x_max[k],
            "matched_domain_distance": None if matched is None else matched.get(t.n),
        })
    return rows


def _verdict(premises: dict, conclusion: bool | None) -> Verdict:
    vals = list(premises.values())
    if any(v is False for v in vals):
        return Verdict.PREMISE_VIOLATION
    if any(v is None for v in vals) or conclusion is None:
        return Verdict.UNDETERMINED
    return Verdict.PASS if conclusion else Verdict.COUNTEREXAMPLE


def _require_points(seq: ProblemSequence) -> None:
    if seq.limit.x is None or any(t.x is None for t in seq.terms):
        raise ValueError("candidate points x_n and x are required")


def is_discretely_convex(k: FeasibleSet, tol: float | None = None) -> tuple[bool, tuple[int, int] | None]:
    """Closure of K under pairwise midpoints, up to a coordinate snap error of h/2."""
    space = k.space
    if tol is None:
        tol = 0.5 * space.spacing if space.spacing is not None else 0.0
    if len(k) < 2:
        return True, None
    pts = k.coords()
    tree = cKDTree(pts)
    i, j = np.triu_indices(len(k), 1)
    mids = 0.5 * (pts[i] + pts[j])
    dist, _ = tree.query(mids, p=np.inf)
    bad = np.flatnonzero(dist > tol + ATOL)
    if bad.size:
        return False, (int(k.index[i[bad[0]]]), int(k.index[j[bad[0]]]))
    return True, None


def verify_simple_max_theorem(seq: ProblemSequence, mu: MultiUtility | None = None, sample: int = 200,
                              full_sweep: bool = False, seed: int = 0) -> VerifierReport:
    """Fixed preference, convex feasible sets, midpoint continuity => limit of maxima is maximal."""
    if not seq.fixed_preference:
        raise VaryingPreference("preferences vary along the sequence; use verify_general_max_theorem")
    _require_points(seq)
    mu = mu if mu is not None else seq.utility
    p, lim = seq.limit.preference, seq.limit
    limits = detect_limits(seq)
    x_max = [t.x in max_elements(p, t.feasible) for t in seq.terms]
    convex = [is_discretely_convex(t.feasible) for t in seq.terms]
    focus = [(int(y), lim.x) for y in lim.feasible.members if p.strict[y, lim.x]]
    evidence = None if mu is None else midpoint_evidence(mu, p, focus, sample, full_sweep, seed)
    premises = {
        "convergence": limits.sets_converge and bool(limits.points_converge),
        "maximality": all(x_max),
        "convexity": all(ok for ok, _ in convex),
        "midpoint_continuity": None if evidence is None else evidence.holds,
    }
    conclusion = lim.x in max_elements(p, lim.feasible)
    dominators = [int(y) for y in lim.feasible.members if p.strict[y, lim.x]]
    bad_convex = next((w for ok, w in convex if not ok), None)
    return VerifierReport(
        "verify_simple_max_theorem", seq.name, _verdict(premises, conclusion), premises,
        {"x_maximal_in_limit": conclusion, "dominator": dominators[0] if dominators else None,
         "implication_holds": (not all(v is True for v in premises.values())) or conclusion},
        {"limits": limits.to_dict(),
         "midpoint_evidence": None if evidence is None else evidence.to_dict(),
         "convexity_witness": None if bad_convex is None else list(bad_convex)},
        _rows(seq, limits, x_max),
    )


def verify_general_max_theorem(seq: ProblemSequence, cap: int | None = None) -> VerifierReport:
    """Convergent problems, maximal x_n and the tail-domain condition => x is maximal in the limit."""
    _require_points(seq)
    lim = seq.limit
    limits = detect_limits(seq)
    x_max = [t.x in max_elements(t.preference, t.feasible) for t in seq.terms]
    counts, matched = {}, {}
    try:
        c3 = condition3_holds(seq, cap=cap)
        cond3 = c3.holds
        for t in seq.tail():
            counts[t.n] = len(term_domains(t.preference, t.feasible, cap))
        for prov in c3.ls.provenance:
            for n, d in zip(prov.indices, prov.distances):
                matched[n] = max(matched.get(n, 0.0), d)
        c3_detail = c3.to_dict()
    except CliqueCapExceeded as exc:
        cond3, c3_detail = None, {"holds": None, "error": str(exc)}
    premises = {"convergence": limits.all_converge, "maximality": all(x_max), "condition3": cond3}
    conclusion = lim.x in max_elements(lim.preference, lim.feasible)
    return VerifierReport(
        "verify_general_max_theorem", seq.name, _verdict(premises, conclusion), premises,
        {"x_maximal_in_limit": conclusion,
         "implication_holds": (not all(v is True for v in premises.values())) or conclusion},
        {"limits": limits.to_dict(), "condition3": c3_detail},
        _rows(seq, limits, x_max, counts, matched),
    )


# ---------------------------------------------------------------- equivalence

@dataclass(frozen=True)
class DomainSequenceCheck:
    """Per-term one-point-extension maximality of a domain sequence and of its limit in K."""

    indices: tuple[int, ...]
    per_term_maximal: tuple[bool, ...]
    limit: FeasibleSet | None
    limit_maximal: bool | None
    extension: int | None

    @property
    def is_violation(self) -> bool:
        return all(self.per_term_maximal) and self.limit is not None and self.limit_maximal is False

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "per_term_maximal": all(self.per_term_maximal),
            "limit": None if self.limit is None else list(self.limit.members),
            "limit_maximal": self.limit_maximal,
            "extension": self.extension,
            "is_violation": self.is_violation,
        }


def _snap_into(s: FeasibleSet, k: FeasibleSet) -> FeasibleSet:
    if s.issubset(k):
        return s
    sub = s.space.distances[np.ix_(s.index, k.index)]
    return FeasibleSet(s.space, k.index[sub.argmin(axis=1)].tolist())


def check_domain_sequence(seq: ProblemSequence, domains: Sequence[FeasibleSet],
                          indices: Sequence[int] | None = None) -> DomainSequenceCheck:
    """Test a domain sequence D_n against the terms and its limit against the limit problem."""
    if indices is None:
        indices = [t.n for t in seq.terms]
    by_n = {t.n: t for t in seq.terms}
    per = tuple(is_maximal_domain(by_n[n].preference, d, by_n[n].feasible)[0] for n, d in zip(indices, domains))
    limit = set_sequence_limit(list(domains), seq.policy)
    if limit is None:
        return DomainSequenceCheck(tuple(indices), per, None, None, None)
    snapped = _snap_into(limit, seq.limit.feasible)
    ok, ext = is_maximal_domain(seq.limit.preference, snapped, seq.limit.feasible)
    return DomainSequenceCheck(tuple(indices), per, snapped, ok, ext)


def find_violating_domain_sequence(seq: ProblemSequence, point_ls: LsApproximation,
                                   targets: FeasibleSet) -> DomainSequenceCheck | None:
    """Grow maximal domains through x_n converging outside ``targets`` and test their limit.

    Any maximal domain through a maximal x_n has x_n as a best element, so
    such a sequence is exactly the one the general theorem's proof tracks.
    """
    dist = seq.space.distances
    by_n = {t.n: t for t in seq.terms}
    for acc, prov in zip(point_ls.accumulation_sets, point_ls.provenance):
        c = acc.members[0]
        if seq.policy.within(dist[c, targets.index].min()):
            continue
        doms = [extend_to_maximal_domain(by_n[n].preference, m.members[0], by_n[n].feasible)
                for n, m in zip(prov.indices, prov.matched)]
        check = check_domain_sequence(seq, doms, prov.indices)
        if check.is_violation:
            return check
    return None


def _inclusion(point_ls: LsApproximation, targets: FeasibleSet, policy: LimitPolicy) -> bool:
    dist = targets.space.distances
    return all(policy.within(dist[a.members[0], targets.index].min()) for a in point_ls.accumulation_sets)


def verify_equivalence(seq: ProblemSequence, cap: int | None = None) -> VerifierReport:
    """Check both directions of the tail-domain condition <=> LS(Max) and LS(Min) inclusion equivalence.

    When an LS inclusion fails, a violating maximal-domain sequence is
    searched for first; it settles the tail-domain condition without enumerating every
    domain of every term. Hypothesis failures demote the verdict to
    NOT_APPLICABLE.
    """
    lim = seq.limit
    slack = seq.policy.density_slack
    dense, classes_ok, dense_witness = [], [], None
    for t in seq.terms:
        ok, wit = is_dense(t.preference, t.feasible, slack=slack)
        dense.append(ok)
        if not ok and dense_witness is None:
            dense_witness = [t.n, *wit]
        classes_ok.append(all(is_connected(c) for c in indifference_partition(t.preference, t.feasible)))
    hyp = {
        "limit_partial_order": is_partial_order(lim.preference),
        "terms_dense": all(dense),
        "indifference_classes_connected": all(classes_ok),
    }
    max_lim = max_elements(lim.preference, lim.feasible)
    min_lim = min_elements(lim.preference, lim.feasible)
    ls_max = ls_extremes(seq, "max")
    ls_min = ls_extremes(seq, "min")
    max_ok = _inclusion(ls_max, max_lim, seq.policy)
    min_ok = _inclusion(ls_min, min_lim, seq.policy)

    witness = None
    if not max_ok:
        witness = find_violating_domain_sequence(seq, ls_max, max_lim)
    if witness is None and not min_ok:
        witness = find_violating_domain_sequence(seq, ls_min, min_lim)
    c3_detail: dict
    if witness is not None:
        cond3, method = False, "witness"
        c3_detail = {"holds": False, "violating": list(witness.limit.members)}
    else:
        try:
            c3 = condition3_holds(seq, cap=cap)
            cond3, method, c3_detail = c3.holds, "enumeration", c3.to_dict()
        except CliqueCapExceeded as exc:
            cond3, method, c3_detail = None, "capped", {"holds": None, "error": str(exc)}
    both = max_ok and min_ok
    d12 = None if cond3 is None else (not cond3) or both
    d21 = None if cond3 is None else (not both) or cond3
    if not all(hyp.values()):
        verdict = Verdict.NOT_APPLICABLE
    elif d12 is None:
        verdict = Verdict.UNDETERMINED
    else:
        verdict = Verdict.PASS if d12 and d21 else Verdict.COUNTEREXAMPLE
    limits = detect_limits(seq)
    return VerifierReport(
        "verify_equivalence", seq.name, verdict, hyp,
        {"dir_1_to_2": d12, "dir_2_to_1": d21, "condition3": cond3, "condition3_method": method,
         "ls_max_inclusion": max_ok, "ls_min_inclusion": min_ok},
        {"limits": limits.to_dict(), "condition3": c3_detail,
         "dense_witness": dense_witness,
         "witness": None if witness is None else witness.to_dict(),
         "ls_max": [a.members[0] for a in ls_max.accumulation_sets],
         "ls_min": [a.members[0] for a in ls_min.accumulation_sets]},
        _rows(seq, limits),
    )


def corollary_floor_check(seq: ProblemSequence, sample: int = 200, seed: int = 0, cap: int | None = None) -> VerifierReport:
    """Common floor point + partial order + simple-theorem setting => the tail-domain condition."""
    lim = seq.limit
    checks: dict = {"fixed_preference": seq.fixed_preference}
    floor = None
    if checks["fixed_preference"]:
        p = lim.preference
        common = set(lim.feasible.members)
        union = set(lim.feasible.members)
        for t in seq.terms:
            common &= set(t.feasible.members)
            union |= set(t.feasible.members)
        union_idx = np.array(sorted(union), dtype=np.intp)
        floor = next((f for f in sorted(common) if p.holds[union_idx, f].all()), None)
        checks["floor"] = floor is not None
        checks["limit_partial_order"] = is_partial_order(p)
        checks["convexity"] = all(is_discretely_convex(t.feasible)[0] for t in seq.terms)
        mu = seq.utility
        checks["midpoint_continuity"] = (None if mu is None
                                         else midpoint_evidence(mu, p, (), sample, False, seed).holds)
    applicable = all(v is True for v in checks.values())
    cond3, detail = None, {}
    if applicable:
        try:
            c3 = condition3_holds(seq, cap=cap)
            cond3, detail = c3.holds, c3.to_dict()
        except CliqueCapExceeded as exc:
            detail = {"holds": None, "error": str(exc)}
    if not applicable:
        verdict = Verdict.NOT_APPLICABLE
    elif cond3 is None:
        verdict = Verdict.UNDETERMINED
    else:
        verdict = Verdict.PASS if cond3 else Verdict.COUNTEREXAMPLE
    limits = detect_limits(seq)
    return VerifierReport(
        "corollary_floor_check", seq.name, verdict, checks,
        {"condition3": cond3, "floor": floor, "agreement": cond3 if applicable else None},
        {"condition3": detail, "limits": limits.to_dict()},
        _rows(seq, limits),
    )


VERIFIERS = {
    "verify_simple_max_theorem": verify_simple_max_theorem,
    "verify_general_max_theorem": verify_general_max_theorem,
    "verify_equivalence": verify_equivalence,
    "corollary_floor_check": corollary_floor_check,
}


# ---------------------------------------------------------------- serialization

def sequence_to_json(seq: ProblemSequence) -> dict:
    """Preferences are stored once in a table and referenced by position."""
    from .preference import multi_utility_to_json, preference_to_json

    table: list[Preference] = []

    def ref(p: Preference) -> int:
        for k, q in enumerate(table):
            if q is p or q == p:
                return k
        table.append(p)
        return len(table) - 1

    terms = [{"n": t.n, "preference_ref": ref(t.preference), "feasible": list(t.feasible.members), "x": t.x}
             for t in seq.terms]
    limit = {"preference_ref": ref(seq.limit.preference), "feasible": list(seq.limit.feasible.members),
             "x": seq.limit.x}
    out = {
        "name": seq.name,
        "space": seq.space.to_json(),
        "preferences": [preference_to_json(p) for p in table],
        "terms": terms,
        "limit": limit,
        "horizon": seq.horizon,
        "policy": {"epsilon": seq.policy.epsilon, "tail_window": seq.policy.tail_window,
                   "min_matches": seq.policy.min_matches, "density_slack": seq.policy.density_slack},
    }
    if seq.utility is not None:
        out["utility"] = multi_utility_to_json(seq.utility)
    if seq.distinguished_domains is not None:
        out["distinguished_domains"] = [list(d.members) for d in seq.distinguished_domains]
    return out


def sequence_from_json(data: dict) -> ProblemSequence:
    from .preference import multi_utility_from_json, preference_from_json

    space = GroundSpace.from_json(data["space"])
    table = [preference_from_json(p, space) for p in data["preferences"]]
    terms = tuple(Term(t["n"], table[t["preference_ref"]], FeasibleSet(space, t["feasible"]), t["x"])
                  for t in data["terms"])
    if len(terms) != data.get("horizon", len(terms)):
        raise ValueError("horizon does not match the number of terms")
    lim = data["limit"]
    limit = LimitProblem(table[lim["preference_ref"]], FeasibleSet(space, lim["feasible"]), lim["x"])
    utility = multi_utility_from_json(data["utility"], space) if "utility" in data else None
    dd = data.get("distinguished_domains")
    return ProblemSequence(space, terms, limit, LimitPolicy(**data["policy"]), data.get("name", ""), utility,
                           None if dd is None else tuple(FeasibleSet(space, d) for d in dd))
