import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from prefkernel.preference import Preference
from prefkernel.scenarios import random_preference
from prefkernel.space import GroundSpace

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def line_space(size: int, h: float = 1.0) -> GroundSpace:
    return GroundSpace(np.arange(size, dtype=float)[:, None] * h, "linf", 1.5 * h, h)


@st.composite
def preferences(draw, min_size=1, max_size=10):
    size = draw(st.integers(min_size, max_size))
    seed = draw(st.integers(0, 2**32 - 1))
    space = line_space(size)
    return Preference(space, random_preference(np.random.default_rng(seed), size))


@st.composite
def preference_and_subset(draw, min_size=1, max_size=10):
    p = draw(preferences(min_size, max_size))
    n = p.space.size
    members = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n))
    return p, p.space.feasible(members)


@pytest.fixture
def grid_1d():
    return GroundSpace.grid([(0, 1)], 0.01)



_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by the test")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    results = item.config.stash[_RESULTS]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        results[mark.args[0]] = (rep.passed, item.name, f"{rep.duration:.1f}s")


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, name, took = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {name}  ({took})")
