import numpy as np
import pytest
from hypothesis import given

from prefkernel.domains import (CliqueCapExceeded, DomainCollection, best_elements, characterize_domain,
                                clique_cap, comparability_graph, extend_to_maximal_domain, is_maximal_domain,
                                max_via_domains, maximal_domains)
from prefkernel.preference import Preference, is_complete_on, max_elements
from prefkernel.scenarios import diagonal_block_preference, fixed_partition_preference, vector_order
from prefkernel.space import GroundSpace

from conftest import line_space, preference_and_subset


@pytest.fixture(scope="module")
def block():
    space = GroundSpace.grid([(0, 1)], 0.005)
    return space, diagonal_block_preference(space)


def test_comparability_graph_examples(block):
    space = line_space(3)
    g = comparability_graph(Preference.total(space), space.full())
    assert all(g[i] == set(range(3)) - {i} for i in range(3))
    bspace, p = block
    k = bspace.where(lambda q: q[0] >= 0.4 - 1e-12)
    g = comparability_graph(p, k)
    low = [i for i in k.members if bspace.points[i, 0] < 0.5]
    high = [i for i in k.members if bspace.points[i, 0] >= 0.5]
    assert all(not g[i] for i in low)
    assert all(g[i] == set(high) - {i} for i in high)
    sq = GroundSpace.grid([(0, 1), (0, 1)], 1.0)
    g = comparability_graph(vector_order(sq), sq.full())
    a, b = sq.index_of((0, 1)), sq.index_of((1, 0))
    assert b not in g[a] and sum(len(v) for v in g.values()) == 2 * 5


def test_maximal_domain_examples(block):
    space = line_space(4)
    assert [d.members for d in maximal_domains(Preference.total(space), space.full())] == [(0, 1, 2, 3)]
    assert len(maximal_domains(Preference.identity(space), space.full())) == 4
    bspace, p = block
    for n in (2, 10, 200):
        k = bspace.where(lambda q, n=n: q[0] >= 0.5 - 0.5 / n - 1e-9)
        doms = maximal_domains(p, k)
        singles = [d for d in doms if len(d) == 1]
        blocks = [d for d in doms if len(d) > 1]
        assert all(bspace.points[d.members[0], 0] < 0.5 for d in singles)
        assert len(singles) == sum(bspace.points[i, 0] < 0.5 for i in k.members)
        assert len(blocks) == 1 and all(bspace.points[i, 0] >= 0.5 for i in blocks[0].members)


def test_fixed_partition_domains_are_block_intersections():
    h = 0.05
    pts = np.array([0, 1, 2, 5, 6, 7, 8]) * h
    space = GroundSpace(pts[:, None], "linf", 1.5 * h, h)
    blocks = [np.array([0, 1, 2]), np.array([3, 4, 5, 6])]
    p = fixed_partition_preference(space, blocks, [0.5, 5.5], [1.0, -1.0], 3)
    k = space.feasible([1, 2, 4, 6])
    assert [d.members for d in maximal_domains(p, k)] == [(1, 2), (4, 6)]


def test_best_elements_examples(block):
    space = line_space(3)
    chain = Preference.from_pairs(space, [(1, 0), (2, 1), (2, 0)])
    assert best_elements(chain, space.feasible([1])).members == (1,)
    assert best_elements(chain, space.full()).members == (2,)
    bspace, p = block
    top = bspace.where(lambda q: q[0] >= 0.5 - 1e-12)
    assert best_elements(p, top) == top
    with pytest.raises(ValueError):
        best_elements(Preference.identity(space), space.full())


def test_max_via_domains_examples(block):
    bspace, p = block
    k = bspace.where(lambda q: q[0] >= 0.45 - 1e-12)
    assert max_via_domains(p, k) == max_elements(p, k) == k
    g = GroundSpace.grid([(0, 1), (0, 1)], 0.5)
    vo = vector_order(g)
    doms = maximal_domains(vo, g.full())
    assert len(doms) == 6 and all(is_complete_on(vo, d) for d in doms)
    assert max_via_domains(vo, g.full()).members == (g.index_of((1, 1)),)


@given(preference_and_subset(max_size=9))
def test_domain_collection_invariants(pa):
    p, b = pa
    doms = maximal_domains(p, b)
    covered = set()
    for d in doms:
        assert d.issubset(b) and is_complete_on(p, d)
        assert is_maximal_domain(p, d, b) == (True, None)
        covered |= set(d.members)
    assert covered == set(b.members)
    sets = [set(d.members) for d in doms]
    assert not any(x < y for x in sets for y in sets)


@given(preference_and_subset(max_size=9))
def test_gorno_equivalence(pa):
    p, k = pa
    assert max_via_domains(p, k) == max_elements(p, k)


def test_clique_cap(monkeypatch):
    space = GroundSpace.grid([(0, 1), (0, 1)], 0.25)
    p = vector_order(space)
    with pytest.raises(CliqueCapExceeded):
        maximal_domains(p, space.full(), cap=10)
    monkeypatch.setenv("PREFKERNEL_CLIQUE_CAP", "7")
    assert clique_cap() == 7
    with pytest.raises(CliqueCapExceeded):
        maximal_domains(p, space.full())
    assert clique_cap(3) == 3


def test_one_point_extension_and_greedy_growth():
    g = GroundSpace.grid([(0, 1), (0, 1)], 0.05)
    p = vector_order(g)
    bottom = g.where(lambda q: q[1] == 0)
    ok, ext = is_maximal_domain(p, bottom, g.full())
    assert not ok and g.coords(ext) == (1.0, 0.05)
    assert extend_to_maximal_domain(p, g.index_of((1, 0)), bottom) == bottom
    grown = extend_to_maximal_domain(p, g.index_of((0.5, 0.5)), g.full())
    assert is_maximal_domain(p, grown, g.full())[0]
    with pytest.raises(ValueError):
        extend_to_maximal_domain(p, [g.index_of((0, 1)), g.index_of((1, 0))], g.full())


def test_characterize_domain_examples(block):
    bspace, p = block
    k = bspace.where(lambda q: q[0] >= 0.5 - 1e-12)
    rep = characterize_domain(p, k, k)
    assert rep.verdict == "maximal" and rep.agrees is True and rep.enumeration_member
    single = characterize_domain(p, k, bspace.feasible([bspace.index_of((0.5,))]))
    assert single.has_exterior_bound and single.verdict == "not maximal" and single.agrees
    space = line_space(4)
    total = Preference.total(space)
    assert characterize_domain(total, space.full(), space.full()).verdict == "maximal"
    g = GroundSpace.grid([(0, 1), (0, 1)], 0.5)
    diag = characterize_domain(vector_order(g), g.full(), g.full())
    assert diag.hypotheses["dense"] is False and diag.agrees is None


def test_domain_collection_json():
    space = line_space(3)
    doms = maximal_domains(Preference.from_pairs(space, [(1, 0)]), space.full())
    back = DomainCollection.from_json(doms.to_json(), space)
    assert [d.members for d in back] == [d.members for d in doms]
    assert doms.containing(1)[0].members == (0, 1)


@given(preference_and_subset(max_size=12))
def test_cliques_match_networkx(pa):
    nx = pytest.importorskip("networkx")
    p, b = pa
    graph = nx.Graph()
    graph.add_nodes_from(b.members)
    graph.add_edges_from((i, j) for i, nbrs in comparability_graph(p, b).items() for j in nbrs)
    expected = sorted(tuple(sorted(c)) for c in nx.find_cliques(graph))
    assert [d.members for d in maximal_domains(p, b)] == expected
