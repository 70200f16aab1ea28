"""Seeded, reproducible generators for the worked examples and random families.

Membership tests and utility ties are decided in integer grid units
(coordinate / h) so that no boundary case depends on float rounding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .preference import MultiUtility, Preference, from_multi_utility, max_elements
from .sequences import LimitProblem, ProblemSequence, Term, Verdict
from .space import FeasibleSet, GroundSpace, LimitPolicy

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class GridSpec:
    bounds: tuple[tuple[float, float], ...]
    spacing: float
    metric: str = "linf"

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")
        for lo, hi in self.bounds:
            if hi < lo:
                raise ValueError(f"grid bounds ({lo}, {hi}) are not ordered")

    def build(self) -> GroundSpace:
        return GroundSpace.grid(self.bounds, self.spacing, self.metric)

    def to_dict(self) -> dict:
        return {"bounds": [list(b) for b in self.bounds], "spacing": self.spacing, "metric": self.metric}


@dataclass(frozen=True)
class ScenarioSpec:
    """Generator name, grid, horizon, policy overrides and generator parameters."""

    name: str
    generator: str
    grid: GridSpec | None = None
    horizon: int = 50
    policy: Mapping = field(default_factory=dict)
    params: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        unknown = set(self.policy) - {"epsilon", "tail_window", "min_matches", "density_slack"}
        if unknown:
            raise ValueError(f"unknown policy keys: {sorted(unknown)}")

    def with_overrides(self, horizon: int | None = None, seed: int | None = None, **policy) -> ScenarioSpec:
        pol = dict(self.policy)
        pol.update({k: v for k, v in policy.items() if v is not None})
        return replace(self, horizon=self.horizon if horizon is None else horizon,
                       seed=self.seed if seed is None else seed, policy=pol)

    def with_params(self, **params) -> ScenarioSpec:
        return replace(self, params={**self.params, **params})

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "generator": self.generator,
            "grid": None if self.grid is None else self.grid.to_dict(),
            "horizon": self.horizon,
            "policy": dict(self.policy),
            "params": dict(self.params),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ScenarioSpec:
        grid = data.get("grid")
        if grid is not None:
            grid = GridSpec(tuple(tuple(b) for b in grid["bounds"]), grid["spacing"], grid.get("metric", "linf"))
        return cls(data["name"], data.get("generator", data["name"]), grid, int(data.get("horizon", 50)),
                   dict(data.get("policy", {})), dict(data.get("params", {})), int(data.get("seed", 0)))


def load_spec(path: str | Path) -> tuple[ScenarioSpec, dict]:
    """Read a JSON or TOML scenario file; returns the spec and any extra top-level keys."""
    path = Path(path)
    raw = path.read_bytes()
    data = tomllib.loads(raw.decode()) if path.suffix == ".toml" else json.loads(raw)
    extra = {k: data[k] for k in ("verifier", "expected") if k in data}
    return ScenarioSpec.from_dict(data), extra


# ---------------------------------------------------------------- helpers

def _units(space: GroundSpace) -> np.ndarray:
    h = space.spacing
    k = np.rint(space.points / h)
    if np.abs(k * h - space.points).max() > 1e-9:
        raise ValueError("grid points are not integer multiples of the spacing")
    return k.astype(np.int64)


def _policy(space: GroundSpace, spec: ScenarioSpec, **defaults) -> LimitPolicy:
    return LimitPolicy.for_space(space, **{**defaults, **spec.policy})


def _point(space: GroundSpace, coords, what: str) -> int:
    try:
        return space.index_of(coords)
    except KeyError:
        raise ValueError(f"grid too coarse: {what} {tuple(coords)} is not a grid point") from None


def _sequence(spec, space, prefs, feas, xs, limit, **extra) -> ProblemSequence:
    terms = tuple(Term(n, p, k, x) for n, (p, k, x) in enumerate(zip(prefs, feas, xs), start=1))
    return ProblemSequence(space, terms, limit, extra.pop("policy"), spec.name, **extra)


# ---------------------------------------------------------------- linear consumer

def linear_utilities(space: GroundSpace) -> MultiUtility:
    """u1 = qA + qB and u2 = qA + 2 qB, tabulated from integer units."""
    k = _units(space)
    h = space.spacing
    values = np.stack([(k[:, 0] + k[:, 1]) * h, (k[:, 0] + 2 * k[:, 1]) * h])
    return MultiUtility(space, values, lipschitz=(2.0, 3.0), strictly_quasiconcave=(False, False),
                        linear=(True, True),
                        functions=(lambda q: q[0] + q[1], lambda q: q[0] + 2 * q[1]))


def budget_set(space: GroundSpace, n: int | None, wealth: float = 1.0) -> FeasibleSet:
    """Prices (1, 1 + 1/n), or (1, 1) for n None: n*kA + (n+1)*kB <= n*W/h."""
    k = _units(space)
    w = round(wealth / space.spacing)
    if abs(w * space.spacing - wealth) > 1e-9:
        raise ValueError("wealth must be a multiple of the grid spacing")
    if n is None:
        ok = k[:, 0] + k[:, 1] <= w
    else:
        ok = n * k[:, 0] + (n + 1) * k[:, 1] <= n * w
    return FeasibleSet.from_mask(space, ok)


def gen_linear_consumer(spec: ScenarioSpec) -> ProblemSequence:
    space = (spec.grid or GridSpec(((0, 1.2), (0, 1.2)), 0.05)).build()
    mu = linear_utilities(space)
    pref = from_multi_utility(mu)
    x = _point(space, (1.0, 0.0), "bundle")
    _point(space, (0.0, 1.0), "bundle")
    feas = [budget_set(space, n) for n in range(1, spec.horizon + 1)]
    limit = LimitProblem(pref, budget_set(space, None), x)
    return _sequence(spec, space, [pref] * spec.horizon, feas, [x] * spec.horizon, limit,
                     policy=_policy(space, spec), utility=mu)


# ---------------------------------------------------------------- exchange economy

def exchange_utilities(space: GroundSpace, exponent: float = 0.5, offset: float = 0.1,
                       spillover: float = 0.1, weights=(1.0, 1.0)) -> MultiUtility:
    """Two agents, two goods; coordinates are (agent1 A, agent1 B, agent2 A, agent2 B).

    Agent i values sum_g w_i (q_ig + c)^a plus ``spillover`` times the same
    power sum of the other agent's bundle. With spillover 0 each utility is
    strictly quasiconcave on its own bundle only, not on the allocation space.
    """
    if not 0 < exponent < 1 or offset <= 0 or spillover < 0:
        raise ValueError("need 0 < exponent < 1, offset > 0, spillover >= 0")
    a, c, eta = exponent, offset, spillover

    def make(i: int) -> Callable:
        own, other = (0, 1) if i == 0 else (2, 3), (2, 3) if i == 0 else (0, 1)
        w = weights[i]

        def u(q):
            q = np.asarray(q, dtype=float)
            t = lambda j: (q[..., j] + c) ** a
            return w * (t(own[0]) + t(own[1])) + eta * (t(other[0]) + t(other[1]))
        return u

    fns = (make(0), make(1))
    slope = a * c ** (a - 1)
    lips = tuple(2 * slope * (w + eta) for w in weights)
    values = np.stack([f(space.points) for f in fns])
    sqc = eta > 0
    return MultiUtility(space, values, lipschitz=lips, strictly_quasiconcave=(sqc, sqc), linear=(False, False),
                        functions=fns)


def allocation_set(space: GroundSpace, n: int | None, endowment=(1.0, 1.0)) -> FeasibleSet:
    """Allocations with per-good totals at most (1 + 1/n) * endowment (endowment itself for n None)."""
    k = _units(space)
    e = np.array([round(w / space.spacing) for w in endowment], dtype=np.int64)
    totals = np.stack([k[:, 0] + k[:, 2], k[:, 1] + k[:, 3]], axis=1)
    ok = (totals * n <= e * (n + 1)).all(axis=1) if n is not None else (totals <= e).all(axis=1)
    return FeasibleSet.from_mask(space, ok)


def _welfare_argmax(mu: MultiUtility, k: FeasibleSet) -> int:
    total = mu.values[:, k.index].sum(axis=0)
    return int(k.index[int(np.argmax(total))])


def gen_exchange_pareto(spec: ScenarioSpec) -> ProblemSequence:
    space = (spec.grid or GridSpec(((0, 1),) * 4, 0.25)).build()
    if space.dim != 4:
        raise ValueError("the exchange economy needs a 4-dimensional allocation grid")
    p = spec.params
    mu = exchange_utilities(space, p.get("exponent", 0.5), p.get("offset", 0.1), p.get("spillover", 0.1),
                            tuple(p.get("weights", (1.0, 1.0))))
    pref = from_multi_utility(mu)
    endowment = tuple(p.get("endowment", (1.0, 1.0)))
    feas = [allocation_set(space, n, endowment) for n in range(1, spec.horizon + 1)]
    xs = [_welfare_argmax(mu, k) for k in feas]
    lim_k = allocation_set(space, None, endowment)
    limit = LimitProblem(pref, lim_k, _welfare_argmax(mu, lim_k))
    return _sequence(spec, space, [pref] * spec.horizon, feas, xs, limit, policy=_policy(space, spec), utility=mu)


# ---------------------------------------------------------------- shifting vertex

def shifting_vertex_preference(space: GroundSpace, n: int | None) -> Preference:
    """u(x) = x with v_n(x) = (x - (n+1)/(2n))^2; v(x) = (x - 1/2)^2 for n None.

    v_n is compared through the integer (2 n k - (n+1) M)^2 with k = x/h, M = 1/h.
    """
    k = _units(space)[:, 0]
    m = round(1 / space.spacing)
    if abs(m * space.spacing - 1) > 1e-9 or m % 2:
        raise ValueError("spacing must divide 0.5")
    v = (2 * k - m) ** 2 if n is None else (2 * n * k - (n + 1) * m) ** 2
    mu = MultiUtility(space, np.stack([k, v]).astype(float))
    return from_multi_utility(mu)


def gen_shifting_vertex(spec: ScenarioSpec) -> ProblemSequence:
    space = (spec.grid or GridSpec(((0, 1),), 0.005)).build()
    full = space.full()
    x = _point(space, (0.0,), "point")
    prefs = [shifting_vertex_preference(space, n) for n in range(1, spec.horizon + 1)]
    limit = LimitProblem(shifting_vertex_preference(space, None), full, x)
    return _sequence(spec, space, prefs, [full] * spec.horizon, [x] * spec.horizon, limit, policy=_policy(space, spec))


# ---------------------------------------------------------------- fixed partition

def _partition_space(blocks, h: float) -> tuple[GroundSpace, list[np.ndarray]]:
    units = []
    for lo, hi in blocks:
        a, b = round(lo / h), round(hi / h)
        if b < a:
            raise ValueError(f"block ({lo}, {hi}) is not ordered")
        units.append(np.arange(a, b + 1))
    flat = np.concatenate(units)
    if len(np.unique(flat)) != len(flat):
        raise ValueError("partition blocks overlap")
    order = np.argsort(flat, kind="stable")
    space = GroundSpace((flat[order] * h).round(12), "linf", 1.5 * h, h)
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    idx, start = [], 0
    for u in units:
        idx.append(np.sort(inverse[start:start + len(u)]))
        start += len(u)
    return space, idx


def fixed_partition_preference(space: GroundSpace, blocks: list[np.ndarray], centers, drift, n: int | None):
    """Complete within each block (utility -|k - c_b - drift_b/n|), incomparable across blocks."""
    k = _units(space)[:, 0].astype(float)
    holds = np.zeros((space.size, space.size), dtype=bool)
    for b, idx in enumerate(blocks):
        c = centers[b] + (0.0 if n is None else drift[b] / n)
        u = -np.abs(k[idx] - c)
        holds[np.ix_(idx, idx)] = u[:, None] >= u[None, :]
    return Preference(space, holds)


def gen_fixed_partition(spec: ScenarioSpec) -> ProblemSequence:
    p = spec.params
    h = spec.grid.spacing if spec.grid else p.get("spacing", 0.05)
    blocks = p.get("blocks", [[0.0, 0.25], [0.5, 0.8]])
    space, idx = _partition_space(blocks, h)
    # centers sit half a grid step inside each block so the limit has no ties
    centers = p.get("centers") or [float(round(lo / h)) + 0.5 for lo, _ in blocks]
    drift = p.get("drift") or [3.0] * len(blocks)
    shrink = int(p.get("shrink", 2))
    target = int(p.get("target_block", 0)) % len(blocks)

    def feasible(n: int | None) -> FeasibleSet:
        drop = 0 if n is None else shrink // n
        keep = [i for b in idx for i in b[min(drop, len(b) - 1):]]
        return FeasibleSet(space, keep)

    def pick(pref: Preference, k: FeasibleSet) -> int:
        best = max_elements(pref, k).members
        return next(i for i in best if i in set(idx[target].tolist()))

    prefs = [fixed_partition_preference(space, idx, centers, drift, n) for n in range(1, spec.horizon + 1)]
    feas = [feasible(n) for n in range(1, spec.horizon + 1)]
    xs = [pick(q, k) for q, k in zip(prefs, feas)]
    lim_p = fixed_partition_preference(space, idx, centers, drift, None)
    lim_k = feasible(None)
    limit = LimitProblem(lim_p, lim_k, pick(lim_p, lim_k))
    return _sequence(spec, space, prefs, feas, xs, limit, policy=_policy(space, spec))


def random_partition_spec(seed: int, horizon: int = 20) -> ScenarioSpec:
    """Seeded fixed-partition instance; seed 0 is the single-block (complete) case."""
    rng = np.random.default_rng(seed)
    h = 0.05
    nblocks = 1 if seed == 0 else int(rng.integers(1, 5))
    blocks, pos = [], 0
    for _ in range(nblocks):
        length = int(rng.integers(2, 7))
        blocks.append([round(pos * h, 12), round((pos + length - 1) * h, 12)])
        pos += length + int(rng.integers(3, 6))
    centers = [b[0] / h + float(rng.integers(0, round((b[1] - b[0]) / h) + 1)) + 0.5 for b in blocks]
    drift = [float(rng.integers(-4, 5)) for _ in blocks]
    params = {"spacing": h, "blocks": blocks, "centers": centers, "drift": drift,
              "shrink": int(rng.integers(0, 4)), "target_block": int(rng.integers(0, nblocks))}
    return ScenarioSpec(f"fixed-partition-{seed}", "fixed-partition", None, horizon, {}, params, seed)


# ---------------------------------------------------------------- diagonal block

def diagonal_block_preference(space: GroundSpace) -> Preference:
    """Equality below 1/2 plus total indifference on [1/2, 1]."""
    k = _units(space)[:, 0]
    m = round(1 / space.spacing)
    if abs(m * space.spacing - 1) > 1e-9 or m % 2:
        raise ValueError("0.5 must be a grid point")
    top = 2 * k >= m
    return Preference(space, np.eye(space.size, dtype=bool) | (top[:, None] & top[None, :]))


def diagonal_block_feasible(space: GroundSpace, n: int | None) -> FeasibleSet:
    """[0.5 - 0.5/n, 1] with the lower end snapped down to the grid: k >= floor(M (n-1) / (2n))."""
    k = _units(space)[:, 0]
    m = round(1 / space.spacing)
    low = m // 2 if n is None else (m * (n - 1)) // (2 * n)
    return FeasibleSet.from_mask(space, k >= low)


def gen_diagonal_block(spec: ScenarioSpec) -> ProblemSequence:
    space = (spec.grid or GridSpec(((0, 1),), 0.005)).build()
    pref = diagonal_block_preference(space)
    feas = [diagonal_block_feasible(space, n) for n in range(1, spec.horizon + 1)]
    xs = [k.members[0] for k in feas]
    lim_k = diagonal_block_feasible(space, None)
    limit = LimitProblem(pref, lim_k, lim_k.members[0])
    dd = tuple(FeasibleSet(space, [k.members[0]]) for k in feas)
    return _sequence(spec, space, [pref] * spec.horizon, feas, xs, limit, policy=_policy(space, spec),
                     distinguished_domains=dd)


# ---------------------------------------------------------------- shrinking triangle

def vector_order(space: GroundSpace) -> Preference:
    pts = space.points
    return Preference(space, (pts[:, None, :] >= pts[None, :, :]).all(axis=2))


def triangle_feasible(space: GroundSpace, n: int | None) -> FeasibleSet:
    """x2 <= n (1 - x1), i.e. k2 <= n (M - k1); the full square for n None."""
    if n is None:
        return space.full()
    k = _units(space)
    m = round(1 / space.spacing)
    return FeasibleSet.from_mask(space, k[:, 1] <= n * (m - k[:, 0]))


def gen_shrinking_triangle(spec: ScenarioSpec) -> ProblemSequence:
    space = (spec.grid or GridSpec(((0, 1), (0, 1)), 0.05)).build()
    pref = vector_order(space)
    x = _point(space, (1.0, 0.0), "corner")
    feas = [triangle_feasible(space, n) for n in range(1, spec.horizon + 1)]
    limit = LimitProblem(pref, space.full(), x)
    bottom = FeasibleSet.from_mask(space, np.abs(space.points[:, 1]) < 1e-12)
    policy = _policy(space, spec, density_slack=space.spacing)
    return _sequence(spec, space, [pref] * spec.horizon, feas, [x] * spec.horizon, limit, policy=policy,
                     distinguished_domains=(bottom,) * spec.horizon)


# ---------------------------------------------------------------- lotteries

def expected_utility_preference(space: GroundSpace, vectors: np.ndarray, denominator: int) -> Preference:
    """Dot products of integer probability counts with integer utility vectors (exact)."""
    counts = np.rint(space.points * denominator).astype(np.int64)
    mu = MultiUtility(space, (np.asarray(vectors, dtype=np.int64) @ counts.T).astype(float))
    return from_multi_utility(mu)


def gen_lottery_emu(spec: ScenarioSpec) -> ProblemSequence:
    p = spec.params
    vertices = int(p.get("vertices", 3))
    den = int(p.get("denominator", 6))
    if not 1 <= vertices <= 4:
        raise ValueError("at most four consequences")
    space = GroundSpace.simplex_grid(vertices, den)
    base = np.array(p.get("utilities", [[1, 0, 0], [0, 1, 0]]), dtype=np.int64)
    perturb = np.array(p.get("perturbation", [[2, 0, 0], [0, 2, 0]]), dtype=np.int64)
    scale = int(p.get("scale", 4))
    if base.shape[1] != vertices or perturb.shape != base.shape:
        raise ValueError("utility vectors must have one entry per consequence")
    cap_vec = np.array(p.get("constraint", [0, 0, 1]), dtype=np.int64)
    bound, slack = int(p.get("bound", den // 2)), int(p.get("bound_slack", 2))
    counts = np.rint(space.points * den).astype(np.int64)

    def util(n: int | None) -> np.ndarray:
        if n is None:
            return scale * base
        return scale * base + np.trunc(perturb / n).astype(np.int64)

    def feasible(n: int | None) -> FeasibleSet:
        extra = 0 if n is None else slack // n
        return FeasibleSet.from_mask(space, counts @ cap_vec <= bound + extra)

    prefs = [expected_utility_preference(space, util(n), den) for n in range(1, spec.horizon + 1)]
    feas = [feasible(n) for n in range(1, spec.horizon + 1)]
    xs = [max_elements(q, k).members[0] for q, k in zip(prefs, feas)]
    lim_p = expected_utility_preference(space, util(None), den)
    lim_k = feasible(None)
    limit = LimitProblem(lim_p, lim_k, max_elements(lim_p, lim_k).members[0])
    policy = _policy(space, spec, density_slack=space.spacing)
    return _sequence(spec, space, prefs, feas, xs, limit, policy=policy)


# ---------------------------------------------------------------- budget floor

def sqrt_utilities(space: GroundSpace, offset: float = 0.1) -> MultiUtility:
    """sqrt(qA + c) + sqrt(qB + c) and sqrt(qA + c) + 2 sqrt(qB + c): a strictly concave partial order."""
    c = offset
    fns = (lambda q: np.sqrt(np.asarray(q)[..., 0] + c) + np.sqrt(np.asarray(q)[..., 1] + c),
           lambda q: np.sqrt(np.asarray(q)[..., 0] + c) + 2 * np.sqrt(np.asarray(q)[..., 1] + c))
    slope = 0.5 / math.sqrt(c)
    values = np.stack([f(space.points) for f in fns])
    return MultiUtility(space, values, lipschitz=(2 * slope, 3 * slope), strictly_quasiconcave=(True, True),
                        linear=(False, False), functions=fns)


def gen_budget_floor(spec: ScenarioSpec) -> ProblemSequence:
    space = (spec.grid or GridSpec(((0, 1), (0, 1)), 0.25)).build()
    mu = sqrt_utilities(space, spec.params.get("offset", 0.1))
    pref = from_multi_utility(mu)
    feas = [budget_set(space, n) for n in range(1, spec.horizon + 1)]
    xs = [_welfare_argmax(mu, k) for k in feas]
    lim_k = budget_set(space, None)
    limit = LimitProblem(pref, lim_k, _welfare_argmax(mu, lim_k))
    return _sequence(spec, space, [pref] * spec.horizon, feas, xs, limit, policy=_policy(space, spec), utility=mu)


# ---------------------------------------------------------------- random families

def random_preference(rng: np.random.Generator, size: int, density: float | None = None) -> np.ndarray:
    """Reflexive-transitive closure of a random relation (returned as a boolean matrix)."""
    if density is None:
        density = float(rng.uniform(0.02, 0.4))
    h = rng.random((size, size)) < density
    np.fill_diagonal(h, True)
    while True:
        nxt = h | ((h.astype(np.int32) @ h.astype(np.int32)) > 0)
        if np.array_equal(nxt, h):
            return h
        h = nxt


def gen_random(spec: ScenarioSpec, rng_seed: int | None = None) -> ProblemSequence:
    """Random multi-utility family with integer perturbations trunc(P / n) that vanish for n > max|P|.

    Points are distinct lattice points; epsilon defaults to half the smallest
    separation, so tolerance convergence is exact convergence.
    """
    seed = spec.seed if rng_seed is None else rng_seed
    rng = np.random.default_rng(seed)
    p = spec.params
    size = int(p.get("size", 8))
    k = int(p.get("utilities", 2))
    vmax = int(p.get("value_range", 4))
    amp = int(p.get("amplitude", 3))
    decay = p.get("decay", "1/n")
    h = 0.1
    lattice = rng.choice(3 * size, size=size, replace=False)
    space = GroundSpace(np.sort(lattice)[:, None] * h, "linf", 1.5 * h, h)
    base = rng.integers(0, vmax, size=(k, size))
    pert = rng.integers(-amp, amp + 1, size=(k, size))
    core = rng.random(size) < 0.6
    core[int(rng.integers(size))] = True
    extras = rng.random((spec.horizon, size)) < 0.3

    def util(n: int | None) -> np.ndarray:
        if n is None or decay == "0":
            return base
        return base + np.trunc(pert / n).astype(np.int64)

    def feasible(n: int | None) -> FeasibleSet:
        if n is None or n > amp or decay == "0":
            return FeasibleSet.from_mask(space, core)
        return FeasibleSet.from_mask(space, core | extras[n - 1])

    def pref(n):
        return from_multi_utility(MultiUtility(space, util(n).astype(float)))

    prefs = [pref(n) for n in range(1, spec.horizon + 1)]
    feas = [feasible(n) for n in range(1, spec.horizon + 1)]
    rule = p.get("x_rule", "lowest")

    def pick(q, kk) -> int:
        best = max_elements(q, kk).members
        return best[int(rng.integers(len(best)))] if rule == "random" else best[0]

    xs = [pick(q, kk) for q, kk in zip(prefs, feas)]
    lim_p = pref(None)
    lim_k = feasible(None)
    limit = LimitProblem(lim_p, lim_k, max_elements(lim_p, lim_k).members[0])
    sep = float(np.diff(space.points[:, 0]).min())
    policy = LimitPolicy.for_space(space, **{"epsilon": 0.5 * sep, **spec.policy})
    return _sequence(spec, space, prefs, feas, xs, limit, policy=policy)


GENERATORS: dict[str, Callable[[ScenarioSpec], ProblemSequence]] = {
    "linear-consumer": gen_linear_consumer,
    "exchange-pareto": gen_exchange_pareto,
    "shifting-vertex": gen_shifting_vertex,
    "fixed-partition": gen_fixed_partition,
    "diagonal-block": gen_diagonal_block,
    "shrinking-triangle": gen_shrinking_triangle,
    "lottery-emu": gen_lottery_emu,
    "budget-floor": gen_budget_floor,
    "random": gen_random,
}


def generate(spec: ScenarioSpec) -> ProblemSequence:
    try:
        gen = GENERATORS[spec.generator]
    except KeyError:
        raise KeyError(f"unknown generator {spec.generator!r}") from None
    return gen(spec)


# ---------------------------------------------------------------- catalog

@dataclass(frozen=True)
class CatalogEntry:
    spec: ScenarioSpec
    verifier: str
    expected: Verdict
    oracle_spec: ScenarioSpec
    note: str = ""


def _entry(name, generator, verifier, expected, grid=None, horizon=50, params=None, policy=None,
           oracle_grid=None, oracle_params=None, note=""):
    spec = ScenarioSpec(name, generator, grid, horizon, dict(policy or {}), dict(params or {}))
    small_policy = {k: v for k, v in (policy or {}).items() if k != "epsilon"}
    small = ScenarioSpec(name, generator, oracle_grid, 8, {**small_policy, "tail_window": 3, "min_matches": 2},
                         {**(params or {}), **(oracle_params or {})})
    return CatalogEntry(spec, verifier, Verdict(expected), small, note)


CATALOG: dict[str, CatalogEntry] = {e.spec.name: e for e in [
    _entry("linear-consumer", "linear-consumer", "verify_simple_max_theorem", "PREMISE_VIOLATION",
           oracle_grid=GridSpec(((0, 1), (0, 1)), 0.5),
           note="linear utilities give a zero midpoint gap; (0,1) beats (1,0) in the limit"),
    _entry("exchange-pareto", "exchange-pareto", "verify_simple_max_theorem", "PASS", horizon=20,
           params={"spillover": 0.1}, oracle_grid=GridSpec(((0, 1),) * 4, 1.0),
           note="agents with a small consumption spillover; utilities strictly concave on allocations"),
    _entry("exchange-pareto-selfish", "exchange-pareto", "verify_simple_max_theorem", "PREMISE_VIOLATION",
           horizon=20, params={"spillover": 0.0}, oracle_grid=GridSpec(((0, 1),) * 4, 1.0),
           note="own-bundle utilities: midpoint gap is zero when one agent's bundle is unchanged"),
    _entry("shifting-vertex", "shifting-vertex", "verify_general_max_theorem", "PREMISE_VIOLATION", horizon=100,
           policy={"epsilon": 0.015}, oracle_grid=GridSpec(((0, 1),), 0.1), oracle_params={},
           note="relation distance is ceil(1/(n h)) h, within 3h from n = 67; the tail-domain condition fails at {0}"),
    _entry("fixed-partition", "fixed-partition", "verify_general_max_theorem", "PASS", horizon=20,
           oracle_params={"blocks": [[0.0, 0.15], [0.35, 0.5]]}),
    _entry("diagonal-block", "diagonal-block", "verify_equivalence", "NOT_APPLICABLE", horizon=200,
           oracle_grid=GridSpec(((0, 1),), 0.1), note="limit is not a partial order; the tail-domain condition still fails"),
    _entry("shrinking-triangle", "shrinking-triangle", "verify_equivalence", "PASS", horizon=40,
           oracle_grid=GridSpec(((0, 1), (0, 1)), 0.5),
           note="adjacent grid pairs excused from density; bottom-edge domains witness failure of the tail-domain condition"),
    _entry("lottery-emu", "lottery-emu", "verify_equivalence", "PASS", horizon=20,
           oracle_params={"denominator": 3, "bound": 1, "bound_slack": 1},
           note="utility vectors rescale with n; feasible caps converge"),
    _entry("lottery-emu-tilted", "lottery-emu", "verify_equivalence", "NOT_APPLICABLE", horizon=20,
           params={"perturbation": [[0, 0, 2], [2, 0, 0]]},
           oracle_params={"denominator": 3, "bound": 1, "bound_slack": 1},
           note="tilted early utilities: some strict grid pairs have no intermediate lottery on the grid"),
    _entry("budget-floor", "budget-floor", "corollary_floor_check", "PASS", horizon=20,
           oracle_grid=GridSpec(((0, 1), (0, 1)), 0.5)),
    _entry("random", "random", "verify_general_max_theorem", "PASS", horizon=12, params={"size": 8},
           oracle_params={"size": 6}),
]}
