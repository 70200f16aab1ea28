import json
import time

import numpy as np
import pytest

from prefkernel.preference import (is_partial_order, max_elements, relation_hausdorff_distance, validate)
from prefkernel.scenarios import (CATALOG, GridSpec, ScenarioSpec, budget_set, generate, load_spec,
                                  random_partition_spec, shifting_vertex_preference)
from prefkernel.sequences import sequence_to_json, verify_general_max_theorem
from prefkernel.space import GroundSpace, hausdorff_distance


def small(name, horizon=10):
    spec = CATALOG[name].spec
    return generate(spec.with_overrides(horizon=min(spec.horizon, horizon)))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_every_term_is_a_valid_preorder(name):
    seq = small(name)
    for t in seq.terms:
        assert not validate(t.preference)
        assert len(t.feasible) > 0
        if t.x is not None:
            assert t.x in t.feasible
    assert not validate(seq.limit.preference)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_generation_is_deterministic(name):
    a = json.dumps(sequence_to_json(small(name)), sort_keys=True)
    b = json.dumps(sequence_to_json(small(name)), sort_keys=True)
    assert a == b


def test_random_seed_changes_instance():
    spec = CATALOG["random"].spec
    a = sequence_to_json(generate(spec.with_overrides(seed=1)))
    b = sequence_to_json(generate(spec.with_overrides(seed=2)))
    assert a != b


def test_linear_consumer_terms():
    seq = generate(CATALOG["linear-consumer"].spec)
    space = seq.space
    x = space.index_of((1.0, 0.0))
    y = space.index_of((0.0, 1.0))
    for t in seq.terms:
        assert t.x == x and x in max_elements(t.preference, t.feasible)
        assert y not in t.feasible
    assert y in seq.limit.feasible
    assert x not in max_elements(seq.limit.preference, seq.limit.feasible)
    assert seq.limit.preference.strict[y, x]


def test_budget_set_shrinks_to_limit():
    space = GroundSpace.grid([(0, 1.2), (0, 1.2)], 0.05)
    lim = budget_set(space, None)
    for n in (1, 5, 20):
        assert budget_set(space, n).issubset(lim)


def test_shifting_vertex_distance_bound():
    space = GroundSpace.grid([(0, 1)], 0.01)
    lim = shifting_vertex_preference(space, None)
    h = space.spacing
    for n in (1, 2, 5, 10, 40, 100):
        d = relation_hausdorff_distance(shifting_vertex_preference(space, n), lim)
        assert d <= 3 / n + 2 * h + 1e-9
        assert d == pytest.approx(min(0.5, np.ceil(1 / (n * h) - 1e-9) * h))


def test_shifting_vertex_needs_fine_grid():
    with pytest.raises(ValueError, match="spacing"):
        generate(ScenarioSpec("sv", "shifting-vertex", GridSpec(((0, 1),), 0.3), 5))


def test_diagonal_block_limit_is_not_a_partial_order():
    seq = small("diagonal-block")
    assert not is_partial_order(seq.limit.preference)
    for t in seq.terms:
        assert seq.limit.feasible.issubset(t.feasible)


def test_shrinking_triangle_facts():
    seq = small("shrinking-triangle", 20)
    assert is_partial_order(seq.limit.preference)
    sizes = [len(t.feasible) for t in seq.terms]
    assert sizes == sorted(sizes)
    assert all(t.feasible.issubset(seq.limit.feasible) for t in seq.terms)
    d = [hausdorff_distance(t.feasible, seq.limit.feasible) for t in seq.terms]
    assert d[-1] < d[0]
    assert len(seq.distinguished_domains) == seq.horizon


def test_lottery_default_is_ordinally_constant():
    seq = small("lottery-emu")
    assert seq.fixed_preference
    tilted = small("lottery-emu-tilted")
    assert not tilted.fixed_preference


def test_budget_floor_contains_origin():
    seq = generate(CATALOG["budget-floor"].spec)
    origin = seq.space.index_of((0.0, 0.0))
    assert all(origin in t.feasible for t in seq.terms)


def test_fixed_partition_blocks_must_not_overlap():
    spec = CATALOG["fixed-partition"].spec.with_params(blocks=[[0.0, 0.3], [0.2, 0.5]])
    with pytest.raises(ValueError, match="overlap"):
        generate(spec)


def test_unknown_generator_and_policy_key():
    with pytest.raises(KeyError):
        generate(ScenarioSpec("x", "no-such-generator"))
    with pytest.raises(ValueError, match="policy"):
        ScenarioSpec("x", "random", policy={"bogus": 1})


def test_random_partition_specs_run_quickly():
    start = time.perf_counter()
    for seed in range(20):
        spec = random_partition_spec(seed)
        generate(spec)
    assert time.perf_counter() - start < 30
    assert len(random_partition_spec(0).params["blocks"]) == 1


def test_load_spec_json_and_toml(tmp_path):
    spec = CATALOG["fixed-partition"].spec.with_overrides(horizon=7, epsilon=0.1)
    doc = {**spec.to_dict(), "verifier": "verify_general_max_theorem", "expected": "PASS"}
    jpath = tmp_path / "s.json"
    jpath.write_text(json.dumps(doc))
    loaded, extra = load_spec(jpath)
    assert loaded == spec and extra == {"verifier": "verify_general_max_theorem", "expected": "PASS"}
    tpath = tmp_path / "s.toml"
    tpath.write_text('name = "rnd"\ngenerator = "random"\nhorizon = 6\nseed = 3\n'
                     '[policy]\nmin_matches = 2\n[params]\nsize = 5\n')
    loaded, extra = load_spec(tpath)
    assert loaded.horizon == 6 and loaded.seed == 3 and loaded.params == {"size": 5} and extra == {}
    seq = generate(loaded)
    assert seq.policy.min_matches == 2
    assert verify_general_max_theorem(seq).verdict.value != "COUNTEREXAMPLE"


def test_spec_round_trip():
    for entry in CATALOG.values():
        assert ScenarioSpec.from_dict(json.loads(json.dumps(entry.spec.to_dict()))) == entry.spec
