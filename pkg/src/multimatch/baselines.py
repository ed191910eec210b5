"""Reference matchers: unconstrained thresholding, exact bipartite assignment,
order-dependent sequential matching, and exhaustive search for tiny instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import Clique, EntityRef, Matching, MultipartiteGraph

BRUTE_FORCE_LIMIT = 10**7


class InstanceTooLarge(RuntimeError):
    pass


@dataclass
class ManyManyResolution:
    """Every cross-source pair scoring at least the threshold; not one-to-one."""

    pairs: set[frozenset[EntityRef]] = field(default_factory=set)
    threshold: float = 0.0

    def __len__(self):
        return len(self.pairs)


def many_many(g: MultipartiteGraph, theta: float) -> ManyManyResolution:
    if theta < 0:
        raise ValueError("threshold must be nonnegative")
    pairs = set()
    for s, i, t, j, v in g.edges():
        if v >= theta:
            pairs.add(frozenset((EntityRef(s, i), EntityRef(t, j))))
    return ManyManyResolution(pairs, theta)


def _assign(scores: np.ndarray) -> list[tuple[int, int]]:
    """Max-weight assignment on a nonnegative matrix, dropping zero-score pairs."""
    if scores.size == 0:
        return []
    rows, cols = linear_sum_assignment(scores, maximize=True)
    return [(r, c) for r, c in zip(rows.tolist(), cols.tolist()) if scores[r, c] > 0]


def exact_bipartite(g: MultipartiteGraph, s1: int, s2: int, theta: float = 0.0) -> Matching:
    """Maximum-weight one-to-one matching between two sources over edges >= theta."""
    if s1 == s2:
        raise ValueError("exact_bipartite needs two distinct sources")
    w = g.dense(s1, s2)
    w = np.where(w >= theta, w, 0.0)
    return Matching([
        Clique((EntityRef(s1, i), EntityRef(s2, j))) for i, j in _assign(w)
    ]).canonical()


def sequential_bipartite(
    g: MultipartiteGraph, order: Sequence[int], theta: float = 0.0
) -> Matching:
    """Match sources one at a time in ``order``, never revisiting earlier choices.

    Each new source is assigned to the cliques built so far (singletons
    included); an entity's score against a clique is its summed score to all
    clique members.
    """
    order = list(order)
    if sorted(order) != list(range(g.m)):
        raise ValueError(f"order must be a permutation of 0..{g.m - 1}")
    if g.m == 0:
        return Matching()
    cliques: list[list[EntityRef]] = [[EntityRef(order[0], i)] for i in range(g.sizes[order[0]])]
    for t in order[1:]:
        n_t = g.sizes[t]
        scores = np.zeros((len(cliques), n_t))
        for k, members in enumerate(cliques):
            for r in members:
                row = g.dense(r.source, t)[r.entity]
                scores[k] += np.where(row >= theta, row, 0.0)
        taken = set()
        for k, j in _assign(scores):
            cliques[k].append(EntityRef(t, j))
            taken.add(j)
        cliques.extend([EntityRef(t, j)] for j in range(n_t) if j not in taken)
    return Matching([Clique(tuple(c)) for c in cliques if len(c) >= 2]).canonical()


def brute_force_states(sizes: Sequence[int]) -> int:
    """Upper bound on the memo states times branching of the exhaustive search."""
    if not sizes:
        return 0
    total = sum(sizes)
    branch = max(math.prod(n + 1 for k, n in enumerate(sizes) if k != s) for s in range(len(sizes)))
    return (2**total) * branch


def exact_multipartite_bruteforce(
    g: MultipartiteGraph, theta: float = 0.0, limit: int = BRUTE_FORCE_LIMIT
) -> Matching:
    """Exhaustive maximum-weight one-to-one matching.

    Memoised search over the set of still-unassigned entities: the first
    unassigned entity either stays alone or joins at most one unassigned
    entity from each later source.
    """
    states = brute_force_states(g.sizes)
    if states > limit:
        raise InstanceTooLarge(
            f"exhaustive search needs ~{states:.3g} states, above the limit of {limit:.3g}"
        )
    refs = list(g.entities())
    n = len(refs)
    if n == 0:
        return Matching()
    w = np.zeros((n, n))
    offsets = np.cumsum((0,) + g.sizes)
    for s, t in itertools.combinations(range(g.m), 2):
        block = g.dense(s, t)
        block = np.where(block >= theta, block, 0.0)
        w[offsets[s]:offsets[s + 1], offsets[t]:offsets[t + 1]] = block
        w[offsets[t]:offsets[t + 1], offsets[s]:offsets[s + 1]] = block.T
    src = [r.source for r in refs]
    W = w.tolist()

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[float, tuple[tuple[int, ...], ...]]:
        if mask == 0:
            return 0.0, ()
        first = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << first)
        # options per later source: None or any unassigned entity of it
        options = []
        for t in range(src[first] + 1, g.m):
            opts = [None] + [k for k in range(offsets[t], offsets[t + 1]) if rest >> k & 1]
            options.append(opts)
        top_val, top_groups = -1.0, ()
        for combo in itertools.product(*options):
            members = [first] + [k for k in combo if k is not None]
            val = 0.0
            for a in range(len(members)):
                row = W[members[a]]
                for b in range(a + 1, len(members)):
                    val += row[members[b]]
            sub = rest
            for k in members[1:]:
                sub &= ~(1 << k)
            sub_val, sub_groups = best(sub)
            if val + sub_val > top_val:
                top_val = val + sub_val
                top_groups = ((tuple(members),) if len(members) > 1 else ()) + sub_groups
        return top_val, top_groups

    _, groups = best((1 << n) - 1)
    best.cache_clear()
    return Matching([Clique(tuple(refs[k] for k in grp)) for grp in groups]).canonical()
