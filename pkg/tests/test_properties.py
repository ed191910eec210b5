import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import random_graph
from multimatch.baselines import (
    exact_bipartite,
    exact_multipartite_bruteforce,
    many_many,
    sequential_bipartite,
)
from multimatch.graph import (
    Clique,
    EntityRef,
    Matching,
    apply_threshold,
    clique_weight,
    from_dense,
    load_graph,
    matching_weight,
    validate_one_to_one,
)
from multimatch.greedy import greedy_match
from multimatch.mp import AlphaStore, MpConfig, solve_mp, stepwise_search, update_round

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def graphs(draw, max_sources=4, max_n=4):
    m = draw(st.integers(2, max_sources))
    sizes = tuple(draw(st.lists(st.integers(1, max_n), min_size=m, max_size=m)))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from([0.3, 0.7, 1.0]))
    g = random_graph(np.random.default_rng(seed), sizes, density)
    if draw(st.booleans()):
        # coarse scores produce plenty of ties
        g = from_dense({k: np.round(g.dense(*k), 1) for k in g.blocks}, sizes)
    return g


def small_graphs():
    return graphs(max_sources=3, max_n=3)


@SETTINGS
@given(graphs())
def test_score_symmetry(g):
    for a, b in itertools.combinations(g.entities(), 2):
        if a.source != b.source:
            assert g.score(a, b) == g.score(b, a)


@SETTINGS
@given(graphs(), st.randoms(use_true_random=False))
def test_weight_ignores_order(g, rnd):
    m = greedy_match(g)
    cliques = list(m)
    rnd.shuffle(cliques)
    shuffled = Matching([Clique(tuple(rnd.sample(c.members, len(c)))) for c in cliques])
    assert matching_weight(g, shuffled) == pytest.approx(matching_weight(g, m), abs=1e-12)


@SETTINGS
@given(graphs(), st.randoms(use_true_random=False))
def test_load_order_does_not_change_scores(g, rnd):
    recs = [(str(a.source), str(a.entity), str(b.source), str(b.entity), g.score(a, b))
            for a, b in itertools.combinations(g.entities(), 2)
            if a.source != b.source and g.score(a, b) > 0]
    rnd.shuffle(recs)
    h = load_graph(recs)
    for sa, ea, sb, eb, v in recs:
        a = EntityRef(h.source_index(sa), h.entity_index(h.source_index(sa), ea))
        b = EntityRef(h.source_index(sb), h.entity_index(h.source_index(sb), eb))
        assert h.score(a, b) == v


@SETTINGS
@given(graphs(), st.floats(0, 1), st.floats(0, 1))
def test_threshold_composition(g, a, b):
    twice = apply_threshold(apply_threshold(g, a), b)
    once = apply_threshold(g, max(a, b))
    for key in set(twice.blocks) | set(once.blocks):
        np.testing.assert_array_equal(twice.dense(*key), once.dense(*key))


@SETTINGS
@given(graphs())
def test_clique_weight_sums_real_pairs(g):
    slots = [0 if n else -1 for n in g.sizes]
    slots[-1] = -1
    c = Clique.from_slots(slots)
    want = sum(g.score(x, y) for x, y in itertools.combinations(c.members, 2))
    assert clique_weight(g, c) == pytest.approx(want)


@SETTINGS
@given(small_graphs(), st.floats(0, 0.9))
def test_solvers_are_one_to_one(g, theta):
    outputs = [
        greedy_match(g, theta),
        solve_mp(g, theta, MpConfig(max_iters=30))[0],
        sequential_bipartite(g, list(range(g.m)), theta),
        exact_bipartite(g, 0, 1, theta),
        exact_multipartite_bruteforce(g, theta),
    ]
    for m in outputs:
        assert validate_one_to_one(m) == []


@SETTINGS
@given(graphs(), st.floats(0, 1), st.floats(0, 1))
def test_many_many_monotone(g, a, b):
    lo, hi = min(a, b), max(a, b)
    assert many_many(g, hi).pairs <= many_many(g, lo).pairs


@SETTINGS
@given(small_graphs())
def test_greedy_half_of_optimum(g):
    opt = matching_weight(g, exact_multipartite_bruteforce(g))
    gw = matching_weight(g, greedy_match(g))
    mw = matching_weight(g, solve_mp(g, 0.0, MpConfig(max_iters=30))[0])
    assert gw >= 0.5 * opt - 1e-9
    assert gw <= opt + 1e-9 and mw <= opt + 1e-9


@SETTINGS
@given(graphs(), st.integers(0, 4), st.data())
def test_stepwise_ascent_is_monotone(g, rounds, data):
    alphas = AlphaStore.zeros(g.sizes)
    cfg = MpConfig(damping=0.5)
    for _ in range(rounds):
        alphas, _ = update_round(g, alphas, cfg)
    s = data.draw(st.integers(0, g.m - 1))
    i = data.draw(st.integers(0, g.sizes[s] - 1))
    res = stepwise_search(g, alphas, s, i, cfg)
    for path in res.trajectory:
        assert all(y >= x - 1e-12 for x, y in zip(path, path[1:]))
    assert res.best_val >= res.second_val
    assert res.best_val >= 0.0
