"""Preferences as dense boolean matrices over a finite ground space.

``holds[i, j]`` is true iff point i is weakly preferred to point j. A valid
preference is reflexive and transitive; completeness is not assumed. Every
relation on a finite space is closed, so every valid preference here is
continuous in the sense of closedness in X x X.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .space import ATOL, FeasibleSet, GroundSpace, SpaceMismatch, _same_space


def _f32(mask: np.ndarray) -> np.ndarray:
    return mask.astype(np.float32)


def _bool_compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean matrix product via BLAS; exact while counts stay below 2**24."""
    return (_f32(a) @ _f32(b)) > 0.5


@dataclass(frozen=True, eq=False)
class Preference:
    space: GroundSpace
    holds: np.ndarray

    def __post_init__(self):
        h = np.array(self.holds, dtype=bool)
        n = self.space.size
        if h.shape != (n, n):
            raise ValueError(f"relation matrix must be {n}x{n}, got {h.shape}")
        h.setflags(write=False)
        object.__setattr__(self, "holds", h)

    @classmethod
    def identity(cls, space: GroundSpace) -> Preference:
        return cls(space, np.eye(space.size, dtype=bool))

    @classmethod
    def total(cls, space: GroundSpace) -> Preference:
        """Total indifference: every pair related both ways."""
        return cls(space, np.ones((space.size, space.size), dtype=bool))

    @classmethod
    def from_pairs(cls, space: GroundSpace, pairs, reflexive: bool = True) -> Preference:
        h = np.eye(space.size, dtype=bool) if reflexive else np.zeros((space.size,) * 2, dtype=bool)
        for i, j in pairs:
            h[space.check_index(i), space.check_index(j)] = True
        return cls(space, h)

    @classmethod
    def from_predicate(cls, space: GroundSpace, pred: Callable[[np.ndarray, np.ndarray], bool]) -> Preference:
        pts = space.points
        h = np.array([[bool(pred(pts[i], pts[j])) for j in range(space.size)] for i in range(space.size)])
        return cls(space, h)

    @cached_property
    def digest(self) -> str:
        return hashlib.sha1(np.packbits(self.holds).tobytes() + self.space.space_id.encode()).hexdigest()[:16]

    @cached_property
    def strict(self) -> np.ndarray:
        s = self.holds & ~self.holds.T
        s.setflags(write=False)
        return s

    def __eq__(self, other) -> bool:
        if not isinstance(other, Preference):
            return NotImplemented
        return self.space.same_as(other.space) and bool(np.array_equal(self.holds, other.holds))

    def __hash__(self) -> int:
        return hash(self.digest)

    def __repr__(self) -> str:
        return f"Preference(n={self.space.size}, pairs={int(self.holds.sum())})"

    def prefers(self, i: int, j: int) -> bool:
        return bool(self.holds[i, j])

    def strictly_prefers(self, i: int, j: int) -> bool:
        return bool(self.strict[i, j])

    def reverse(self) -> Preference:
        """The dual relation: x relates to y iff y relates to x."""
        return Preference(self.space, self.holds.T)

    def restricted(self, a: FeasibleSet) -> np.ndarray:
        return self.holds[np.ix_(a.index, a.index)]


@dataclass(frozen=True, eq=False)
class MultiUtility:
    """Finite family of utilities tabulated on every ground point.

    ``functions`` optionally evaluates each utility off the grid (needed for
    exact midpoints); it is not serialized.
    """

    space: GroundSpace
    values: np.ndarray
    lipschitz: tuple[float | None, ...] | None = None
    strictly_quasiconcave: tuple[bool, ...] | None = None
    linear: tuple[bool, ...] | None = None
    functions: tuple[Callable, ...] | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.shape[0] == 0:
            raise ValueError("a multi-utility needs at least one utility")
        if v.shape[1] != self.space.size:
            raise ValueError("every utility must be tabulated on every ground point")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        k = v.shape[0]
        for name in ("lipschitz", "strictly_quasiconcave", "linear", "functions"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(val)
                if len(val) != k:
                    raise ValueError(f"{name} must have one entry per utility")
                object.__setattr__(self, name, val)
        if self.strictly_quasiconcave is None:
            object.__setattr__(self, "strictly_quasiconcave", (False,) * k)
        if self.linear is None:
            object.__setattr__(self, "linear", (False,) * k)

    @classmethod
    def from_functions(cls, space: GroundSpace, functions: Sequence[Callable], **kwargs) -> MultiUtility:
        values = [[float(f(p)) for p in space.points] for f in functions]
        return cls(space, np.array(values), functions=tuple(functions), **kwargs)

    def __len__(self) -> int:
        return self.values.shape[0]

    def evaluate(self, coords) -> np.ndarray:
        """Utility values at arbitrary coordinates (exact grid values on-grid)."""
        idx, err = self.space.nearest(coords)
        if err <= 1e-12:
            return self.values[:, idx].copy()
        if self.functions is None:
            raise ValueError("point is off the grid and no utility functions are attached")
        c = np.asarray(coords, dtype=float)
        return np.array([f(c) for f in self.functions], dtype=float)

    def lipschitz_violations(self) -> list[tuple[int, float]]:
        """Utilities whose declared constant is below an observed grid slope."""
        if self.lipschitz is None:
            return []
        dist = self.space.distances
        off = dist > 0
        out = []
        for k, bound in enumerate(self.lipschitz):
            if bound is None:
                continue
            v = self.values[k]
            slope = float((np.abs(v[:, None] - v[None, :])[off] / dist[off]).max()) if off.any() else 0.0
            if slope > bound + 1e-9:
                out.append((k, slope))
        return out

    def flag_spot_check(self, rng: np.random.Generator, trials: int = 200) -> list[tuple[int, str, int, int]]:
        """Random midpoint tests of the declared curvature flags.

        Returns (utility, flag, i, j) for each refuted declaration; midpoints
        are evaluated exactly when functions are attached and skipped when
        they fall off the grid otherwise.
        """
        n = self.space.size
        failures = []
        for _ in range(trials):
            i, j = (int(t) for t in rng.integers(0, n, size=2))
            if i == j:
                continue
            mid = 0.5 * (self.space.points[i] + self.space.points[j])
            try:
                um = self.evaluate(mid)
            except ValueError:
                continue
            for k in range(len(self)):
                ui, uj = self.values[k, i], self.values[k, j]
                if self.strictly_quasiconcave[k] and not um[k] > min(ui, uj):
                    failures.append((k, "strictly_quasiconcave", i, j))
                if self.linear[k] and abs(um[k] - 0.5 * (ui + uj)) > 1e-9:
                    failures.append((k, "linear", i, j))
        return failures


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: tuple[int, ...]


@dataclass(frozen=True)
class IndifferencePartition:
    classes: tuple[FeasibleSet, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)


def from_multi_utility(mu: MultiUtility, tie_tol: float = 0.0) -> Preference:
    """x relates to y iff every utility weakly prefers x to y.

    ``tie_tol`` treats values within the tolerance as ties; a positive value
    can break transitivity and should stay below the smallest genuine gap.
    """
    v = mu.values
    holds = np.ones((mu.space.size,) * 2, dtype=bool)
    for row in v:
        holds &= row[:, None] >= row[None, :] - tie_tol
    return Preference(mu.space, holds)


def validate(p: Preference, limit: int | None = None) -> list[Violation]:
    """Reflexivity and transitivity violations; empty iff ``p`` is a preference."""
    h = p.holds
    out = [Violation("reflexivity", (int(i),)) for i in np.flatnonzero(~np.diag(h))]
    bad = _bool_compose(h, h) & ~h
    for i, k in zip(*np.nonzero(bad)):
        if limit is not None and len(out) >= limit:
            break
        j = int(np.flatnonzero(h[i] & h[:, k])[0])
        out.append(Violation("transitivity", (int(i), j, int(k))))
    return out


def symmetric_part(p: Preference) -> np.ndarray:
    s = p.holds & p.holds.T
    s.setflags(write=False)
    return s


def asymmetric_part(p: Preference) -> np.ndarray:
    return p.strict


def _check_set(p: Preference, a: FeasibleSet) -> None:
    _same_space(p.space, a.space)


def is_complete_on(p: Preference, a: FeasibleSet) -> bool:
    _check_set(p, a)
    sub = p.restricted(a)
    return bool((sub | sub.T).all())


def max_elements(p: Preference, a: FeasibleSet) -> FeasibleSet:
    """Elements of ``a`` that no element of ``a`` strictly dominates."""
    _check_set(p, a)
    strict = p.strict[np.ix_(a.index, a.index)]
    return FeasibleSet(a.space, a.index[~strict.any(axis=0)].tolist())


def min_elements(p: Preference, a: FeasibleSet) -> FeasibleSet:
    """Elements of ``a`` that strictly dominate no element of ``a``."""
    _check_set(p, a)
    strict = p.strict[np.ix_(a.index, a.index)]
    return FeasibleSet(a.space, a.index[~strict.any(axis=1)].tolist())


def _directed_pair_excess(pm: np.ndarray, qm: np.ndarray, dist: np.ndarray, levels: np.ndarray) -> float:
    extra = pm & ~qm
    if not extra.any():
        return 0.0
    rows = np.flatnonzero(extra.any(axis=1))
    extra = extra[rows]
    qf = _f32(qm)

    # (A Q A^T)[i, j] > 0 iff some (k, l) in Q has d(i, k) <= r and d(j, l) <= r.
    def covered(r: float) -> bool:
        near = _f32(dist <= r)
        reach = (near[rows] @ qf) @ near.T > 0.5
        return not (extra & ~reach).any()

    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if covered(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def relation_hausdorff_distance(p: Preference, q: Preference) -> float:
    """Hausdorff distance between the pair sets under the max-product metric.

    The answer is always one of the ground-space distances, so it is found
    exactly by bisecting over the sorted distinct distance values.
    """
    _same_space(p.space, q.space)
    if p is q or np.array_equal(p.holds, q.holds):
        return 0.0
    dist = p.space.distances
    levels = np.unique(dist)
    return max(_directed_pair_excess(p.holds, q.holds, dist, levels),
               _directed_pair_excess(q.holds, p.holds, dist, levels))


def indifference_partition(p: Preference, a: FeasibleSet) -> IndifferencePartition:
    _check_set(p, a)
    sym = symmetric_part(p)[np.ix_(a.index, a.index)]
    unassigned = np.ones(len(a), dtype=bool)
    classes = []
    for k in range(len(a)):
        if not unassigned[k]:
            continue
        members = sym[k] & unassigned
        unassigned &= ~members
        classes.append(FeasibleSet(a.space, a.index[members].tolist()))
    return IndifferencePartition(tuple(classes))


def is_dense(p: Preference, a: FeasibleSet, slack: float = 0.0) -> tuple[bool, tuple[int, int] | None]:
    """Whether every strict pair in ``a`` has a strict intermediate in ``a``.

    Pairs closer than ``slack`` are excused: on a grid, adjacent points can
    never have an intermediate, which is a discretization artifact.
    """
    _check_set(p, a)
    s = p.strict[np.ix_(a.index, a.index)]
    fails = s & ~_bool_compose(s, s)
    if slack > 0:
        fails &= a.space.distances[np.ix_(a.index, a.index)] > slack + ATOL
    bad = np.argwhere(fails)
    if len(bad) == 0:
        return True, None
    i, j = bad[0]
    return False, (int(a.index[i]), int(a.index[j]))


def is_partial_order(p: Preference) -> bool:
    """Antisymmetry: the symmetric part is exactly the diagonal."""
    return bool(np.array_equal(symmetric_part(p), np.eye(p.space.size, dtype=bool)))


def has_exterior_bound(p: Preference, d: FeasibleSet, k: FeasibleSet) -> tuple[bool, int | None]:
    """Look for x in K \\ D lying weakly above all of D or weakly below all of D."""
    _check_set(p, d)
    _check_set(p, k)
    if not d.issubset(k):
        raise ValueError("D must be a subset of K")
    outside = np.array(k.minus(d), dtype=np.intp)
    if outside.size == 0:
        return False, None
    above = p.holds[np.ix_(outside, d.index)].all(axis=1)
    below = p.holds[np.ix_(d.index, outside)].all(axis=0)
    hit = np.flatnonzero(above | below)
    if hit.size == 0:
        return False, None
    return True, int(outside[hit[0]])


def _rle(row: np.ndarray) -> list[int]:
    """Run lengths of a boolean row, starting with a (possibly empty) False run."""
    runs, current, count = [], False, 0
    for bit in row:
        if bool(bit) == current:
            count += 1
        else:
            runs.append(count)
            current, count = not current, 1
    runs.append(count)
    return runs


def _unrle(runs: Sequence[int], n: int) -> np.ndarray:
    row = np.zeros(n, dtype=bool)
    pos, bit = 0, False
    for r in runs:
        row[pos:pos + r] = bit
        pos, bit = pos + r, not bit
    if pos != n:
        raise ValueError("run lengths do not cover the row")
    return row


def preference_to_json(p: Preference) -> dict:
    return {"space_id": p.space.space_id, "pairs": [_rle(row) for row in p.holds]}


def preference_from_json(data: dict, space: GroundSpace) -> Preference:
    if data.get("space_id", space.space_id) != space.space_id:
        raise SpaceMismatch("preference refers to a different ground space")
    return Preference(space, np.array([_unrle(r, space.size) for r in data["pairs"]]))


def multi_utility_to_json(mu: MultiUtility) -> dict:
    utilities = []
    for k in range(len(mu)):
        utilities.append({
            "values": mu.values[k].tolist(),
            "lipschitz": None if mu.lipschitz is None else mu.lipschitz[k],
            "flags": {"strictly_quasiconcave": mu.strictly_quasiconcave[k], "linear": mu.linear[k]},
        })
    return {"space_id": mu.space.space_id, "utilities": utilities}


def multi_utility_from_json(data: dict, space: GroundSpace) -> MultiUtility:
    if data.get("space_id", space.space_id) != space.space_id:
        raise SpaceMismatch("multi-utility refers to a different ground space")
    us = data["utilities"]
    lips = [u.get("lipschitz") for u in us]
    return MultiUtility(
        space,
        np.array([u["values"] for u in us], dtype=float),
        lipschitz=None if all(x is None for x in lips) else tuple(lips),
        strictly_quasiconcave=tuple(bool(u.get("flags", {}).get("strictly_quasiconcave", False)) for u in us),
        linear=tuple(bool(u.get("flags", {}).get("linear", False)) for u in us),
    )
