"""Finite metric geometry: ground spaces, feasible sets and Hausdorff distances.

A ground space is a finite point cloud in R^d with an L-infinity or L2
metric. Every finite set is compact, so feasible sets are simply nonempty
index subsets. Set-sequence limits are decided numerically by a tail-window
test; this is an approximation contract, not a proof of convergence.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

ATOL = 1e-9

_METRIC_ALIASES = {
    "linf": "linf",
    "l-infinity": "linf",
    "l_inf": "linf",
    "inf": "linf",
    "chebyshev": "linf",
    "l2": "l2",
    "euclidean": "l2",
}


class SpaceMismatch(ValueError):
    """Raised when two objects that must share a ground space do not."""


def _norm_metric(metric: str) -> str:
    try:
        return _METRIC_ALIASES[metric.lower()]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; expected 'linf' or 'l2'") from None


def metric_distance(metric: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances between rows of ``a`` and ``b`` (broadcasting on the last axis)."""
    diff = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if metric == "linf":
        return diff.max(axis=-1)
    return np.sqrt((diff * diff).sum(axis=-1))


@dataclass(frozen=True, eq=False)
class GroundSpace:
    """Finite point set with a metric and a connectivity radius.

    Two points are adjacent when their distance is at most ``connect_radius``.
    ``spacing`` is the grid spacing h for generated grids; it drives the
    default tolerances (epsilon = 2h, snap error h/2) and is None for
    scattered point sets.
    """

    points: np.ndarray
    metric: str = "linf"
    connect_radius: float = 0.0
    spacing: float | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must be a nonempty (N, d) array")
        _, counts = np.unique(pts, axis=0, return_counts=True)
        if (counts > 1).any():
            raise ValueError("points must be pairwise distinct")
        if self.connect_radius < 0:
            raise ValueError("connect_radius must be nonnegative")
        if self.spacing is not None and self.spacing <= 0:
            raise ValueError("spacing must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "metric", _norm_metric(self.metric))
        object.__setattr__(self, "connect_radius", float(self.connect_radius))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return (f"GroundSpace(n={self.size}, dim={self.dim}, metric={self.metric!r}, "
                f"connect_radius={self.connect_radius:g}, spacing={self.spacing})")

    @cached_property
    def distances(self) -> np.ndarray:
        kind = "chebyshev" if self.metric == "linf" else "euclidean"
        dist = cdist(self.points, self.points, kind)
        dist.setflags(write=False)
        return dist

    @cached_property
    def space_id(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:16]

    def check_index(self, i) -> int:
        if isinstance(i, (bool, np.bool_)) or not isinstance(i, (int, np.integer)):
            raise IndexError(f"point index {i!r} is not an integer")
        if not 0 <= i < self.size:
            raise IndexError(f"point index {i} out of range for a space of {self.size} points")
        return int(i)

    def distance(self, i: int, j: int) -> float:
        return float(self.distances[self.check_index(i), self.check_index(j)])

    def distances_to(self, coords) -> np.ndarray:
        """Distances from an arbitrary point of R^d to every ground point."""
        c = np.asarray(coords, dtype=float).reshape(1, -1)
        if c.shape[1] != self.dim:
            raise ValueError(f"expected a {self.dim}-dimensional point")
        return metric_distance(self.metric, self.points, c)

    def nearest(self, coords) -> tuple[int, float]:
        """Nearest ground point (lowest index among ties) and the snap error."""
        d = self.distances_to(coords)
        best = float(d.min())
        idx = int(np.flatnonzero(d <= best + 1e-12)[0])
        return idx, float(d[idx])

    def index_of(self, coords, tol: float = 1e-9) -> int:
        idx, err = self.nearest(coords)
        if err > tol:
            raise KeyError(f"no ground point at {tuple(np.ravel(coords))} (nearest is {err:g} away)")
        return idx

    def coords(self, i: int) -> tuple[float, ...]:
        return tuple(float(c) for c in self.points[self.check_index(i)])

    def feasible(self, members: Iterable[int]) -> FeasibleSet:
        return FeasibleSet(self, members)

    def full(self) -> FeasibleSet:
        return FeasibleSet(self, range(self.size))

    def where(self, predicate) -> FeasibleSet:
        """Feasible set of points whose coordinate row satisfies ``predicate``."""
        return FeasibleSet(self, [i for i, row in enumerate(self.points) if predicate(row)])

    def same_as(self, other: GroundSpace) -> bool:
        if self is other:
            return True
        return (self.metric == other.metric
                and self.connect_radius == other.connect_radius
                and self.points.shape == other.points.shape
                and bool(np.array_equal(self.points, other.points)))

    def to_json(self) -> dict:
        out = {
            "dim": self.dim,
            "metric": self.metric,
            "connect_radius": self.connect_radius,
            "points": self.points.tolist(),
        }
        if self.spacing is not None:
            out["spacing"] = self.spacing
        return out

    @classmethod
    def from_json(cls, data: dict) -> GroundSpace:
        pts = np.asarray(data["points"], dtype=float).reshape(-1, int(data["dim"]))
        return cls(pts, data.get("metric", "linf"), data.get("connect_radius", 0.0),
                   data.get("spacing"))

    @classmethod
    def grid(cls, bounds: Sequence[tuple[float, float]], spacing: float,
             metric: str = "linf", connect_radius: float | None = None) -> GroundSpace:
        """Regular grid over a box; the first coordinate varies slowest.

        Each bound span must be an integer multiple of ``spacing``.
        """
        if spacing <= 0:
            raise ValueError("spacing must be positive")
        axes = []
        for lo, hi in bounds:
            if hi < lo:
                raise ValueError(f"bounds ({lo}, {hi}) are not ordered")
            steps = (hi - lo) / spacing
            k = round(steps)
            if abs(steps - k) > 1e-9:
                raise ValueError(f"span {hi - lo} is not a multiple of spacing {spacing}")
            axes.append([round(lo + i * spacing, 12) for i in range(k + 1)])
        pts = np.array(list(itertools.product(*axes)), dtype=float)
        radius = 1.5 * spacing if connect_radius is None else connect_radius
        return cls(pts, metric, radius, spacing)

    @classmethod
    def simplex_grid(cls, vertices: int, denominator: int, metric: str = "linf",
                     connect_radius: float | None = None) -> GroundSpace:
        """Lotteries over ``vertices`` consequences with probabilities k/denominator."""
        if vertices < 1 or denominator < 1:
            raise ValueError("vertices and denominator must be positive")
        pts = [tuple(k / denominator for k in combo)
               for combo in itertools.product(range(denominator + 1), repeat=vertices)
               if sum(combo) == denominator]
        h = 1.0 / denominator
        radius = 1.5 * h if connect_radius is None else connect_radius
        return cls(np.array(sorted(pts, reverse=True)), metric, radius, h)


@dataclass(frozen=True)
class FeasibleSet:
    """Nonempty index subset of a ground space (a compact feasible set)."""

    space: GroundSpace
    members: tuple[int, ...]

    def __init__(self, space: GroundSpace, members: Iterable[int]):
        idx = sorted({space.check_index(i) for i in members})
        if not idx:
            raise ValueError("feasible sets must be nonempty")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "members", tuple(idx))

    @classmethod
    def from_mask(cls, space: GroundSpace, mask: np.ndarray) -> FeasibleSet:
        return cls(space, np.flatnonzero(mask).tolist())

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return i in self._member_set

    def __repr__(self) -> str:
        if len(self.members) <= 8:
            return f"FeasibleSet({list(self.members)})"
        return f"FeasibleSet(<{len(self.members)} points>)"

    @cached_property
    def _member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    @cached_property
    def index(self) -> np.ndarray:
        arr = np.array(self.members, dtype=np.intp)
        arr.setflags(write=False)
        return arr

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.space.size, dtype=bool)
        m[self.index] = True
        m.setflags(write=False)
        return m

    def coords(self) -> np.ndarray:
        return self.space.points[self.index]

    def issubset(self, other: FeasibleSet) -> bool:
        return self._member_set <= other._member_set

    def minus(self, other: FeasibleSet) -> list[int]:
        return [i for i in self.members if i not in other._member_set]

    def intersect(self, other: FeasibleSet) -> FeasibleSet | None:
        common = self._member_set & other._member_set
        return FeasibleSet(self.space, common) if common else None

    def to_json(self) -> dict:
        return {"space_id": self.space.space_id, "members": list(self.members)}

    @classmethod
    def from_json(cls, data: dict, space: GroundSpace) -> FeasibleSet:
        if data.get("space_id", space.space_id) != space.space_id:
            raise SpaceMismatch(f"feasible set refers to space {data['space_id']}, not {space.space_id}")
        return cls(space, data["members"])


@dataclass(frozen=True)
class PairSpacePoint:
    """A point of X x X, addressed by two point indices of one space."""

    space: GroundSpace
    first: int
    second: int

    def __post_init__(self):
        self.space.check_index(self.first)
        self.space.check_index(self.second)


@dataclass(frozen=True)
class LimitPolicy:
    """Tolerance policy for numerical limit detection.

    ``tail_window`` None means the final quarter of the sequence, but never
    fewer than ``min_matches`` indices.
    """

    epsilon: float
    tail_window: int | None = None
    min_matches: int = 5
    density_slack: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.tail_window is not None and self.tail_window < 1:
            raise ValueError("tail_window must be positive")
        if self.min_matches < 1:
            raise ValueError("min_matches must be positive")
        if self.tail_window is not None and self.min_matches > self.tail_window:
            raise ValueError("min_matches cannot exceed tail_window")

    @classmethod
    def for_space(cls, space: GroundSpace, **overrides) -> LimitPolicy:
        if "epsilon" not in overrides:
            if space.spacing is None:
                raise ValueError("space has no spacing; pass epsilon explicitly")
            overrides["epsilon"] = 2 * space.spacing
        return cls(**overrides)

    def window(self, length: int) -> int:
        if self.tail_window is not None:
            return self.tail_window
        return max(self.min_matches, math.ceil(length / 4))

    def within(self, d) -> bool:
        return d <= self.epsilon + ATOL


def _same_space(a: GroundSpace, b: GroundSpace) -> None:
    if not a.same_as(b):
        raise SpaceMismatch("objects live on different ground spaces")


def distance(space: GroundSpace, i: int, j: int) -> float:
    return space.distance(i, j)


def hausdorff_distance(a: FeasibleSet, b: FeasibleSet) -> float:
    """Max of the two directed sup-inf distances between member sets."""
    _same_space(a.space, b.space)
    sub = a.space.distances[np.ix_(a.index, b.index)]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def pair_distance(p: PairSpacePoint, q: PairSpacePoint) -> float:
    """Product metric on X x X: the larger of the two coordinate distances."""
    _same_space(p.space, q.space)
    dist = p.space.distances
    return float(max(dist[p.first, q.first], dist[p.second, q.second]))


def set_sequence_limit(sequence: Sequence[FeasibleSet], policy: LimitPolicy,
                       candidates: Iterable[FeasibleSet] = ()) -> FeasibleSet | None:
    """Return a limit candidate within epsilon of every set in the tail window.

    Declared candidates are tried first, then the last element of the
    sequence. Returns None when no candidate passes.
    """
    if not sequence:
        raise ValueError("sequence must be nonempty")
    w = policy.window(len(sequence))
    if w > len(sequence):
        raise ValueError(f"tail window {w} exceeds sequence length {len(sequence)}")
    space = sequence[0].space
    for s in sequence:
        _same_space(space, s.space)
    tail = sequence[-w:]
    for cand in [*candidates, sequence[-1]]:
        if all(policy.within(hausdorff_distance(s, cand)) for s in tail):
            return cand
    return None


def extract_convergent_subsequence(sequence: Sequence[FeasibleSet], candidates: Iterable[FeasibleSet],
                                   policy: LimitPolicy) -> tuple[list[int], FeasibleSet] | None:
    """Find a candidate matched within epsilon at at least ``min_matches`` indices.

    The returned index list selects a subsequence that ``set_sequence_limit``
    accepts with the returned candidate.
    """
    for cand in candidates:
        hits = [k for k, s in enumerate(sequence) if policy.within(hausdorff_distance(s, cand))]
        if len(hits) >= policy.min_matches and len(hits) >= policy.window(len(hits)):
            return hits, cand
    return None


def is_connected(a: FeasibleSet) -> bool:
    """Whether the connect_radius adjacency graph restricted to ``a`` is connected."""
    if len(a) == 1:
        return True
    sub = a.space.distances[np.ix_(a.index, a.index)] <= a.space.connect_radius + ATOL
    n, _ = connected_components(csr_matrix(sub), directed=False)
    return n == 1


def _as_coords(space: GroundSpace, p) -> np.ndarray:
    if isinstance(p, (int, np.integer)):
        return space.points[space.check_index(p)]
    arr = np.asarray(p, dtype=float).ravel()
    if arr.shape[0] != space.dim:
        raise ValueError(f"expected a {space.dim}-dimensional point")
    return arr


def convex_combination(space: GroundSpace, x, y, alpha: float) -> tuple[int, float]:
    """Snap alpha*x + (1-alpha)*y to the nearest ground point.

    ``x`` and ``y`` are point indices or coordinate vectors. Returns the
    snapped index and the snap error in the space metric.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    exact = alpha * _as_coords(space, x) + (1.0 - alpha) * _as_coords(space, y)
    return space.nearest(exact)
