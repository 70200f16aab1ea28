import numpy as np
import pytest
from hypothesis import given, strategies as st

from prefkernel.preference import (MultiUtility, Preference, asymmetric_part, from_multi_utility, has_exterior_bound,
                                   indifference_partition, is_complete_on, is_dense, is_partial_order,
                                   max_elements, min_elements, multi_utility_from_json, multi_utility_to_json,
                                   preference_from_json, preference_to_json, relation_hausdorff_distance,
                                   symmetric_part, validate)
from prefkernel.scenarios import (diagonal_block_preference, linear_utilities, shifting_vertex_preference,
                                  vector_order)
from prefkernel.space import GroundSpace

from conftest import line_space, preference_and_subset, preferences


@pytest.fixture(scope="module")
def consumer():
    space = GroundSpace.grid([(0, 1.2), (0, 1.2)], 0.05)
    mu = linear_utilities(space)
    return space, mu, from_multi_utility(mu)


@pytest.fixture(scope="module")
def block():
    space = GroundSpace.grid([(0, 1)], 0.005)
    return space, diagonal_block_preference(space)


def test_linear_consumer_strict_preference(consumer):
    space, _, p = consumer
    a, b = space.index_of((0, 1)), space.index_of((1, 0))
    assert p.strictly_prefers(a, b) and not p.prefers(b, a)


def test_constant_utility_is_total_indifference():
    space = line_space(4)
    p = from_multi_utility(MultiUtility(space, np.full(4, 2.0)))
    assert p.holds.all()


def test_shifting_vertex_first_term_incomparable_endpoints():
    space = GroundSpace.grid([(0, 1)], 0.5)
    p1 = shifting_vertex_preference(space, 1)
    assert not p1.prefers(0, 2) and not p1.prefers(2, 0)


def test_validate_examples(block):
    space = line_space(3)
    assert validate(Preference.identity(space)) == []
    bad = Preference.from_pairs(space, [(0, 1), (1, 2)])
    (v,) = validate(bad)
    assert v.kind == "transitivity" and v.indices == (0, 1, 2)
    assert validate(block[1]) == []
    broken = Preference(space, np.zeros((3, 3), dtype=bool))
    assert [v.kind for v in validate(broken)] == ["reflexivity"] * 3


def test_parts(block):
    space = line_space(2)
    total = Preference.total(space)
    assert symmetric_part(total).all() and not asymmetric_part(total).any()
    assert not asymmetric_part(block[1]).any()
    sq = GroundSpace(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert vector_order(sq).strictly_prefers(1, 0)


def test_is_complete_on_examples(consumer):
    space, _, p = consumer
    assert is_complete_on(p, space.feasible([5]))
    assert not is_complete_on(p, space.feasible([space.index_of((1, 0)), space.index_of((0.6, 0.3))]))
    assert is_complete_on(p, space.feasible([space.index_of(c) for c in [(1, 0), (0, 1), (0, 0)]]))
    assert is_complete_on(Preference.total(space), space.full())


def test_max_min_examples(block):
    space, p = block
    for n in (1, 7, 200):
        k = space.where(lambda q, n=n: q[0] >= 0.5 - 0.5 / n - 1e-9)
        assert max_elements(p, k) == k == min_elements(p, k)
    total = Preference.total(line_space(3))
    a = total.space.full()
    assert max_elements(total, a) == a == min_elements(total, a)


def test_linear_consumer_maximality(consumer):
    space, _, p = consumer
    from prefkernel.scenarios import budget_set

    x = space.index_of((1, 0))
    assert all(x in max_elements(p, budget_set(space, n)) for n in range(1, 51))
    assert x not in max_elements(p, budget_set(space, None))


@given(preference_and_subset())
def test_max_nonempty_and_duality(pa):
    p, a = pa
    assert len(max_elements(p, a)) >= 1
    assert min_elements(p, a) == max_elements(p.reverse(), a)


@given(preference_and_subset())
def test_complete_sets_have_indifferent_maxima(pa):
    p, a = pa
    if not is_complete_on(p, a):
        return
    top = max_elements(p, a)
    sub = p.holds[np.ix_(top.index, top.index)]
    assert sub.all()
    above = p.holds[np.ix_(top.index, a.index)].all(axis=1)
    assert above.all()


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 9))
def test_multi_utility_relations_validate(seed, k, n):
    rng = np.random.default_rng(seed)
    mu = MultiUtility(line_space(n), rng.integers(0, 4, size=(k, n)).astype(float))
    assert validate(from_multi_utility(mu)) == []


def test_relation_distance_examples():
    space = line_space(2)
    ident = Preference.identity(space)
    assert relation_hausdorff_distance(ident, ident) == 0.0
    assert relation_hausdorff_distance(ident, Preference.from_pairs(space, [(0, 1)])) == 1.0


@given(preferences(max_size=7), preferences(max_size=7))
def test_relation_distance_zero_iff_equal(p, q):
    if p.space.size != q.space.size:
        q = Preference.identity(p.space)
    d = relation_hausdorff_distance(p, q)
    assert (d == 0) == bool(np.array_equal(p.holds, q.holds))
    assert d == relation_hausdorff_distance(q, p)


def _brute_relation_distance(p, q):
    dist = p.space.distances
    pp, qq = np.argwhere(p.holds), np.argwhere(q.holds)

    def directed(a, b):
        return max(min(max(dist[i, k], dist[j, l]) for k, l in b) for i, j in a)

    return max(directed(pp, qq), directed(qq, pp))


@given(preferences(max_size=6), st.integers(0, 2**32 - 1))
def test_relation_distance_matches_pair_scan(p, seed):
    from prefkernel.scenarios import random_preference

    q = Preference(p.space, random_preference(np.random.default_rng(seed), p.space.size))
    assert relation_hausdorff_distance(p, q) == _brute_relation_distance(p, q)


def test_shifting_vertex_relations_converge():
    space = GroundSpace.grid([(0, 1)], 0.01)
    lim = shifting_vertex_preference(space, None)
    d = [relation_hausdorff_distance(shifting_vertex_preference(space, n), lim) for n in (1, 5, 20, 50)]
    assert d == sorted(d, reverse=True) and d[-1] <= 0.02 + 1e-12


def test_indifference_partition_examples(block):
    space = line_space(3)
    assert len(indifference_partition(Preference.identity(space), space.full())) == 3
    assert len(indifference_partition(Preference.total(space), space.full())) == 1
    bspace, p = block
    k = bspace.where(lambda q: q[0] >= 0.5 - 1e-12)
    (cls,) = indifference_partition(p, k)
    assert cls == k


@given(preference_and_subset())
def test_indifference_partition_invariants(pa):
    p, a = pa
    classes = indifference_partition(p, a).classes
    assert sorted(i for c in classes for i in c.members) == list(a.members)
    sym = symmetric_part(p)
    for c in classes:
        assert sym[np.ix_(c.index, c.index)].all()
    for c, d in zip(classes, classes[1:]):
        assert not sym[np.ix_(c.index, d.index)].any()


def test_is_dense_examples(block):
    bspace, p = block
    assert is_dense(p, bspace.full()) == (True, None)
    chain = Preference.from_pairs(line_space(2), [(1, 0)])
    assert is_dense(chain, chain.space.full()) == (False, (1, 0))
    g = GroundSpace.grid([(0, 1), (0, 1)], 0.5)
    ok, witness = is_dense(vector_order(g), g.full())
    assert not ok and witness is not None
    top, bottom = g.index_of((1, 1)), g.index_of((0, 0))
    mid = g.index_of((0.5, 0.5))
    assert vector_order(g).strict[top, mid] and vector_order(g).strict[mid, bottom]


def test_is_partial_order_examples(block):
    assert is_partial_order(vector_order(GroundSpace.grid([(0, 1), (0, 1)], 0.5)))
    assert not is_partial_order(block[1])
    assert is_partial_order(Preference.identity(line_space(3)))


def test_exterior_bound_examples(block):
    g = GroundSpace.grid([(0, 1), (0, 1)], 0.05)
    p = vector_order(g)
    k = g.full()
    assert has_exterior_bound(p, k, k) == (False, None)
    bottom = g.where(lambda q: q[1] == 0)
    found, witness = has_exterior_bound(p, bottom, k)
    assert found and g.coords(witness) == (1.0, 0.05)
    bspace, bp = block
    kb = bspace.where(lambda q: q[0] >= 0.5 - 1e-12)
    found, _ = has_exterior_bound(bp, bspace.feasible([bspace.index_of((0.5,))]), kb)
    assert found
    with pytest.raises(ValueError):
        has_exterior_bound(p, k, bottom)


@given(preferences())
def test_preference_json_round_trip(p):
    assert preference_from_json(preference_to_json(p), p.space) == p


def test_multi_utility_json_and_checks(consumer):
    space, mu, _ = consumer
    back = multi_utility_from_json(multi_utility_to_json(mu), space)
    assert np.array_equal(back.values, mu.values) and back.lipschitz == mu.lipschitz
    assert back.linear == (True, True)
    assert mu.lipschitz_violations() == []
    tight = MultiUtility(space, mu.values, lipschitz=(1.0, 1.0))
    assert [k for k, _ in tight.lipschitz_violations()] == [0, 1]


def test_flag_spot_check_refutes_false_declarations(consumer):
    space, mu, _ = consumer
    rng = np.random.default_rng(0)
    assert mu.flag_spot_check(rng) == []
    lying = MultiUtility(space, mu.values, strictly_quasiconcave=(True, True), functions=mu.functions)
    assert any(f[1] == "strictly_quasiconcave" for f in lying.flag_spot_check(rng))


def test_multi_utility_shape_checks():
    with pytest.raises(ValueError):
        MultiUtility(line_space(3), np.zeros((0, 3)))
    with pytest.raises(ValueError):
        MultiUtility(line_space(3), np.zeros((1, 2)))


def test_monotone_limit_property():
    # x_n >=_n y_n with relations converging and grid-exact limits gives x >= y
    from prefkernel.scenarios import CATALOG, generate

    seq = generate(CATALOG["shifting-vertex"].spec)
    lim = seq.limit.preference
    for x in range(0, seq.space.size, 20):
        for y in range(0, seq.space.size, 20):
            if all(t.preference.prefers(x, y) for t in seq.tail()):
                assert lim.prefers(x, y)
