"""Small hand-built graphs used by tests, demos and the ``example1`` command."""

from __future__ import annotations

import itertools

from .graph import MultipartiteGraph, load_graph


def example1_records() -> list[tuple[str, str, str, str, float]]:
    """Three sources holding entities a, b, c, fully connected.

    Between sources 1 and 2 every pair scores 0.6, except a1-a2 (0.5) and
    c1-c2 (1.0). Pairs involving source 3 score 1.0 for the same letter and
    0.1 otherwise.
    """
    recs = []
    for s, t in itertools.combinations((1, 2, 3), 2):
        for x, y in itertools.product("abc", repeat=2):
            if (s, t) == (1, 2):
                w = {"aa": 0.5, "cc": 1.0}.get(x + y, 0.6)
            else:
                w = 1.0 if x == y else 0.1
            recs.append((str(s), f"{x}{s}", str(t), f"{y}{t}", w))
    return recs


def example1_graph() -> MultipartiteGraph:
    return load_graph(example1_records())


def pathological_bipartite() -> MultipartiteGraph:
    """Greedy takes a1-b1 (1.1) and then nothing fits; the optimum is 2.0."""
    return load_graph([
        ("A", "a1", "B", "b1", 1.1),
        ("A", "a1", "B", "b2", 1.0),
        ("A", "a2", "B", "b1", 1.0),
        ("A", "a2", "B", "b2", 0.0),
    ])
