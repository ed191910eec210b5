import numpy as np
import pytest

from multimatch.datasets import example1_graph, pathological_bipartite
from multimatch.graph import Clique, EntityRef, from_dense


def random_graph(rng, sizes, density=1.0, scale=1.0):
    """Dense-ish random graph with uniform scores; ``density`` < 1 drops edges."""
    mats = {}
    m = len(sizes)
    for s in range(m):
        for t in range(s + 1, m):
            w = rng.random((sizes[s], sizes[t])) * scale
            if density < 1:
                w = np.where(rng.random(w.shape) < density, w, 0.0)
            mats[(s, t)] = w
    return from_dense(mats, sizes)


def true_cliques(g):
    """Example 1's intended cliques {a1,a2,a3}, {b1,b2,b3}, {c1,c2,c3}."""
    out = set()
    for letter in "abc":
        out.add(frozenset(
            EntityRef(s, g.entity_index(s, f"{letter}{s + 1}")) for s in range(3)
        ))
    return out


def ref(g, label):
    """EntityRef for an Example 1 label such as 'a1'."""
    s = int(label[1]) - 1
    return EntityRef(s, g.entity_index(s, label))


@pytest.fixture
def ex1():
    return example1_graph()


@pytest.fixture
def patho():
    return pathological_bipartite()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def clique(g, *labels):
    return Clique(tuple(ref(g, x) for x in labels))


# -- acceptance summary ------------------------------------------------------

_criteria: dict[int, tuple[bool, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        detail = dict(item.user_properties).get("detail", "")
        _criteria[mark.args[0]] = (rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
