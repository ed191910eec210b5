"""Synthetic multi-source worlds with Gaussian feature noise.

Each latent entity gets ``k`` features drawn uniformly from [0, 1]; every
source observes a noisy copy (normal noise with standard deviation
``sigma``, no truncation). Cross-source similarity is the cosine of the
observed feature vectors, clamped below at 0 and rounded to 12 decimals.

Random stream (numpy PCG64 seeded with ``seed``): first the ``n x k``
latent features in row-major order, then the ``m x n x k`` noise, source by
source.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .graph import EntityRef, MultipartiteGraph, TruthSet, from_dense

SCORE_DECIMALS = 12


@dataclass(frozen=True)
class SynthConfig:
    n: int = 100
    m: int = 3
    k: int = 5
    sigma: float = 0.06
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.k < 1:
            raise ValueError("n, m and k must be >= 1")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")


@dataclass
class SynthWorld:
    config: SynthConfig
    true_features: np.ndarray  # (n, k)
    observed: np.ndarray  # (m, n, k)
    graph: MultipartiteGraph

    def is_true_pair(self, a: EntityRef, b: EntityRef) -> bool:
        return a.source != b.source and a.entity == b.entity

    def truth(self) -> TruthSet:
        """Positive pairs: entity i of every source with entity i of every other."""
        n, m = self.config.n, self.config.m
        return TruthSet({
            frozenset((EntityRef(s, i), EntityRef(t, i)))
            for s in range(m) for t in range(s + 1, m) for i in range(n)
        })

    def metadata(self) -> dict:
        return {
            "config": asdict(self.config),
            "sources": list(self.graph.source_names),
            "edges": self.graph.n_edges,
            "true_pairs": self.config.n * self.config.m * (self.config.m - 1) // 2,
        }

    def write_metadata(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def cosine_scores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    def unit(x):
        norm = np.linalg.norm(x, axis=1, keepdims=True)
        return np.divide(x, norm, out=np.zeros_like(x), where=norm > 0)

    sim = unit(a) @ unit(b).T
    return np.round(np.clip(sim, 0.0, 1.0), SCORE_DECIMALS)


def generate(cfg: SynthConfig) -> SynthWorld:
    rng = np.random.default_rng(cfg.seed)
    true = rng.random((cfg.n, cfg.k))
    observed = rng.normal(true, cfg.sigma, size=(cfg.m, cfg.n, cfg.k))
    mats = {
        (s, t): cosine_scores(observed[s], observed[t])
        for s in range(cfg.m) for t in range(s + 1, cfg.m)
    }
    g = from_dense(
        mats,
        [cfg.n] * cfg.m,
        source_names=[f"s{s}" for s in range(cfg.m)],
        entity_names=[[f"e{i}" for i in range(cfg.n)]] * cfg.m,
        keep_zeros=True,
    )
    return SynthWorld(cfg, true, observed, g)
