import functools
import itertools
import sys
from pathlib import Path

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from predtopos.core import catalog, enumerate_presheaves, free_category, preorder_category  # noqa: E402

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@st.composite
def dag_categories(draw, max_objects=4):
    n = draw(st.integers(1, max_objects))
    objs = [f"o{i}" for i in range(n)]
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2)]
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=4)) if pairs else []
    edges = {f"e{k}": (objs[i], objs[j]) for k, (i, j) in enumerate(chosen)}
    return free_category(objs, edges)


@st.composite
def preorders(draw, max_objects=4):
    n = draw(st.integers(1, max_objects))
    objs = [f"p{i}" for i in range(n)]
    pairs = [(objs[i], objs[j]) for i, j in itertools.combinations(range(n), 2)]
    leq = draw(st.lists(st.sampled_from(pairs), max_size=4, unique=True)) if pairs else []
    return preorder_category(objs, leq)


def small_categories(max_objects=4):
    return st.one_of(st.sampled_from(catalog.all_small()), dag_categories(max_objects), preorders(max_objects))


@functools.lru_cache(maxsize=None)
def presheaves_on(cat, max_stalk=2):
    return tuple(enumerate_presheaves(cat, max_stalk))


def presheaves(cat, max_stalk=2):
    return st.sampled_from(presheaves_on(cat, max_stalk))


# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
