import numpy as np
import pytest
from hypothesis import given, settings

from prefkernel import oracle
from prefkernel.domains import maximal_domains
from prefkernel.preference import Preference
from prefkernel.scenarios import CATALOG, generate
from prefkernel.space import FeasibleSet, hausdorff_distance

from conftest import line_space, preference_and_subset


def test_preorder_counts():
    assert sum(1 for _ in oracle.all_preorders(1)) == 1
    assert sum(1 for _ in oracle.all_preorders(2)) == 4
    assert sum(1 for _ in oracle.all_preorders(3)) == 29
    with pytest.raises(oracle.OracleGuard):
        next(oracle.all_preorders(5))


def test_trivial_oracle_cases():
    space = line_space(3)
    ident = Preference.identity(space)
    total = Preference.total(space)
    full = space.full()
    assert oracle.oracle_maximal_domains(ident, full) == [(0,), (1,), (2,)]
    assert oracle.oracle_maximal_domains(total, full) == [(0, 1, 2)]
    assert oracle.oracle_max(ident, full) == [0, 1, 2]
    chain = Preference(space, np.tril(np.ones((3, 3), dtype=bool)))
    assert oracle.oracle_max(chain, full) == [2] and oracle.oracle_min(chain, full) == [0]


def test_subset_guard():
    space = line_space(oracle.SUBSET_LIMIT + 1)
    with pytest.raises(oracle.OracleGuard):
        oracle.oracle_maximal_domains(Preference.identity(space), space.full())


@given(preference_and_subset(max_size=10))
@settings(max_examples=80)
def test_kernel_matches_oracle(pa):
    p, b = pa
    for cmp in (oracle.compare_maximal_domains, oracle.compare_max, oracle.compare_min,
                oracle.compare_max_via_domains):
        rep = cmp(p, b)
        assert rep.agree, rep.to_json_line()


@given(preference_and_subset(max_size=8))
def test_oracle_hausdorff_matches_kernel(pa):
    p, b = pa
    full = p.space.full()
    assert oracle.oracle_hausdorff(p.space, b.members, full.members) == pytest.approx(hausdorff_distance(b, full))


def test_exhaustive_three_point_campaign():
    reps = list(oracle.exhaustive_campaign(3))
    assert len(reps) == 29 * 7 and all(r.agree for r in reps)


def test_diagonal_block_oracle_ls_contains_half():
    seq = generate(CATALOG["diagonal-block"].oracle_spec.with_overrides(tail_window=6))
    found = oracle.oracle_ls(seq)
    half = seq.space.index_of((0.5,))
    eps = seq.policy.epsilon
    assert any(len(c) == 1 and seq.space.distance(c[0], half) <= eps for c in found)
    assert oracle.compare_ls(seq).agree


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_ls_within_oracle(name):
    rep = oracle.compare_ls(generate(CATALOG[name].oracle_spec))
    assert rep.agree, rep.to_json_line()


def test_mutated_kernel_is_caught(monkeypatch):
    from prefkernel import preference

    real = preference.max_elements
    monkeypatch.setattr(preference, "max_elements", lambda p, a: real(p.reverse(), a))
    reps = list(oracle.random_campaign(30, seed=3))
    assert any(not r.agree for r in reps)
