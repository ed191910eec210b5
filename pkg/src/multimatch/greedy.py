"""Greedy multi-partite matching.

Pairs are visited in descending score order; each pair merges the cliques of
its two endpoints whenever the union still holds at most one entity per
source. The result weighs at least half the optimum on any instance.
"""

from __future__ import annotations

import enum

import numpy as np

from .graph import Clique, EntityRef, Matching, MultipartiteGraph


class MergeOutcome(enum.Enum):
    MERGED = "merged"
    SOURCE_CONFLICT = "source-conflict"
    ALREADY_JOINED = "already-joined"

    def __bool__(self):
        return self is MergeOutcome.MERGED


class CliqueForest:
    """Union-find over entities; each root keeps a ``source -> entity`` slot map."""

    def __init__(self):
        self._parent: dict[EntityRef, EntityRef] = {}
        self._slots: dict[EntityRef, dict[int, int]] = {}

    def find(self, a: EntityRef) -> EntityRef:
        parent = self._parent
        if a not in parent:
            parent[a] = a
            self._slots[a] = {a.source: a.entity}
            return a
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def clique_of(self, a: EntityRef) -> dict[int, int]:
        return self._slots[self.find(a)]

    def try_merge(self, a: EntityRef, b: EntityRef) -> MergeOutcome:
        if a.is_null or b.is_null or a.source == b.source:
            raise ValueError("try_merge needs two non-null entities of different sources")
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return MergeOutcome.ALREADY_JOINED
        sa, sb = self._slots[ra], self._slots[rb]
        if len(sa) < len(sb):
            ra, rb, sa, sb = rb, ra, sb, sa
        if any(s in sa for s in sb):
            return MergeOutcome.SOURCE_CONFLICT
        sa.update(sb)
        del self._slots[rb]
        self._parent[rb] = ra
        return MergeOutcome.MERGED

    def cliques(self) -> list[Clique]:
        """All current cliques, singletons included, in canonical order."""
        out = [
            Clique(tuple(EntityRef(s, e) for s, e in slots.items()))
            for slots in self._slots.values()
        ]
        return sorted(out, key=lambda c: c.members)


def candidate_pairs(g: MultipartiteGraph, theta: float) -> tuple[np.ndarray, ...]:
    """Edges with score >= theta, sorted by descending score then by
    ``(source_a, entity_a, source_b, entity_b)``."""
    sa, ea, sb, eb, v = g.edge_arrays()
    keep = v >= theta
    sa, ea, sb, eb, v = sa[keep], ea[keep], sb[keep], eb[keep], v[keep]
    order = np.lexsort((eb, sb, ea, sa, -v))
    return sa[order], ea[order], sb[order], eb[order], v[order]


def greedy_match(g: MultipartiteGraph, theta: float = 0.0) -> Matching:
    """Greedy matching over the pairs scoring at least ``theta``.

    Only cliques with two or more members are returned; use
    :meth:`Matching.unmatched` for the leftover singletons.
    """
    if theta < 0:
        raise ValueError("threshold must be nonnegative")
    forest = CliqueForest()
    sa, ea, sb, eb, v = candidate_pairs(g, theta)
    for s, i, t, j, score in zip(sa.tolist(), ea.tolist(), sb.tolist(), eb.tolist(), v.tolist()):
        if score <= 0:
            # zero-score pairs add no weight; merging on them is arbitrary
            continue
        forest.try_merge(EntityRef(s, i), EntityRef(t, j))
    return Matching([c for c in forest.cliques() if len(c) >= 2])
