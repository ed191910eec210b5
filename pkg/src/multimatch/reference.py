"""Uncompressed max-sum on tiny graphs, for checking the compressed solver.

Stores one alpha per (entity, tuple containing it) and performs the textbook
difference-message updates:

    beta_s,i(Y)  = sum_{t != s} alpha_t,Y[t](Y) + S(Y)
    alpha_s,i(X) = -max_{Y != X, Y[s] = i} beta_s,i(Y)

Everything is enumerated, so this is only usable for a handful of entities.
"""

from __future__ import annotations

import itertools

from .graph import NULL_ENTITY, EntityRef, MultipartiteGraph

Combo = tuple[int, ...]


class FullAlphaTables:
    def __init__(self, g: MultipartiteGraph):
        self.g = g
        self.m = g.m
        self.planes: dict[tuple[int, int], list[Combo]] = {}
        for s in range(g.m):
            choices = [range(-1, n) for n in g.sizes]
            for i in range(g.sizes[s]):
                choices[s] = (i,)
                self.planes[(s, i)] = list(itertools.product(*choices))
        self.alpha = {key: {X: 0.0 for X in plane} for key, plane in self.planes.items()}

    def similarity(self, X: Combo) -> float:
        members = [EntityRef(u, x) for u, x in enumerate(X) if x != NULL_ENTITY]
        return sum(self.g.score(a, b) for a, b in itertools.combinations(members, 2))

    def beta(self, s: int, i: int, Y: Combo) -> float:
        total = self.similarity(Y)
        for t in range(self.m):
            if t != s and Y[t] != NULL_ENTITY:
                total += self.alpha[(t, Y[t])][Y]
        return total

    def step(self) -> None:
        new = {}
        for (s, i), plane in self.planes.items():
            betas = {Y: self.beta(s, i, Y) for Y in plane}
            new[(s, i)] = {
                X: -max(b for Y, b in betas.items() if Y != X) for X in plane
            }
        self.alpha = new
