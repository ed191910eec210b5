"""Precision/recall metrics, threshold sweeps and weight comparisons."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .baselines import exact_bipartite, many_many, sequential_bipartite
from .graph import (
    EntityRef,
    GraphError,
    Matching,
    MultipartiteGraph,
    TruthSet,
    format_score,
    matching_weight,
)
from .greedy import greedy_match
from .mp import MpConfig, solve_mp
from .synth import SynthWorld

ALGORITHMS = ("greedy", "mp", "many_many", "sequential", "exact_bipartite")
PR_HEADER = ("threshold", "precision", "recall", "f1", "total_weight", "algorithm", "sources")


@dataclass(frozen=True)
class PrPoint:
    threshold: float
    precision: float
    recall: float
    f1: float
    total_weight: float


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def default_thresholds(start: float = 0.51, stop: float = 0.96, step: float = 0.03) -> list[float]:
    """Inclusive grid; values are rounded so 0.51 + 5 * 0.03 prints as 0.66."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(max(count, 0))]


# -- pair projections --------------------------------------------------------


def _oriented(pairs, s1: int, s2: int) -> set[tuple[EntityRef, EntityRef]]:
    """Keep pairs between s1 and s2, as (s1 member, s2 member) tuples."""
    out = set()
    for pair in pairs:
        a, b = tuple(pair)
        if a.source == s2 and b.source == s1:
            a, b = b, a
        if a.source == s1 and b.source == s2:
            out.add((a, b))
    return out


def project(matching, s1: int, s2: int) -> set[tuple[EntityRef, EntityRef]]:
    """Pairs between two sources implied by a matching (or a many-many resolution)."""
    pairs = matching.pairs if not isinstance(matching, Matching) else matching.pairs()
    return _oriented((frozenset(p) for p in pairs), s1, s2)


def _check_truth(truth: TruthSet, g: MultipartiteGraph | None) -> None:
    if g is None:
        return
    for pair in truth.positives | truth.negatives:
        for r in pair:
            if r.is_null:
                continue
            if not (0 <= r.source < g.m and 0 <= r.entity < g.sizes[r.source]):
                raise GraphError(f"truth references unknown entity {r}")


def pr_counts(
    matching,
    truth: TruthSet,
    s1: int,
    s2: int,
    g: MultipartiteGraph | None = None,
) -> tuple[int, int, int]:
    """(TP, FP, FN) between two sources against a labelled truth set.

    False positives are predicted pairs labelled negative, plus predicted
    pairs that contradict a positive label on either side. A negative
    ``(x, null)`` marks every predicted pair involving x as wrong.
    """
    _check_truth(truth, g)
    pred = project(matching, s1, s2)
    pos = _oriented(truth.positives, s1, s2)
    neg = set()
    no_match = set()  # entities labelled as having no counterpart on the other side
    for pair in truth.negatives:
        a, b = tuple(pair)
        if a.is_null or b.is_null:
            x, nul = (b, a) if a.is_null else (a, b)
            if {x.source, nul.source} == {s1, s2}:
                no_match.add(x)
            continue
        neg |= _oriented([pair], s1, s2)
    pos_left = {x: y for x, y in pos}
    pos_right = {y: x for x, y in pos}
    fp = 0
    for x, y in pred:
        if (x, y) in neg or x in no_match or y in no_match:
            fp += 1
        if x in pos_left and pos_left[x] != y:
            fp += 1
        if y in pos_right and pos_right[y] != x:
            fp += 1
    return len(pred & pos), fp, len(pos - pred)


def precision_recall(tp: int, fp: int, fn: int) -> tuple[float, float]:
    """0/0 gives precision 1 (nothing predicted) and recall 1 (nothing to find)."""
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return precision, recall


def pr_real(
    matching,
    truth: TruthSet,
    s1: int,
    s2: int,
    g: MultipartiteGraph | None = None,
) -> tuple[float, float]:
    return precision_recall(*pr_counts(matching, truth, s1, s2, g))


def pr_synth(matching, world: SynthWorld) -> tuple[float, float, float]:
    """Pair-counting precision/recall against the identity alignment."""
    n, m = world.config.n, world.config.m
    if isinstance(matching, Matching):
        pairs = list(matching.pairs())
    else:
        pairs = [tuple(p) for p in matching.pairs]
    total = len(pairs)
    correct = sum(1 for a, b in pairs if world.is_true_pair(a, b))
    precision = correct / total if total else 1.0
    denom = n * m * (m - 1)
    recall = 2 * correct / denom if denom else 1.0
    return precision, recall, f1_score(precision, recall)


# -- sweeps ------------------------------------------------------------------


def run_algorithm(
    g: MultipartiteGraph,
    algorithm: str,
    theta: float,
    mp_config: MpConfig | None = None,
    order: Sequence[int] | None = None,
    sources: tuple[int, int] = (0, 1),
):
    """Run one solver at one threshold; returns (resolution, weight)."""
    if algorithm == "greedy":
        res = greedy_match(g, theta)
    elif algorithm == "mp":
        res, _ = solve_mp(g, theta, mp_config)
    elif algorithm == "many_many":
        res = many_many(g, theta)
        weight = sum(g.score(*tuple(p)) for p in res.pairs)
        return res, weight
    elif algorithm == "sequential":
        res = sequential_bipartite(g, order if order is not None else range(g.m), theta)
    elif algorithm == "exact_bipartite":
        res = exact_bipartite(g, sources[0], sources[1], theta)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    return res, matching_weight(g, res)


def _point(args) -> PrPoint:
    g, algorithm, theta, target, mp_config, order, sources = args
    res, weight = run_algorithm(g, algorithm, theta, mp_config, order, sources)
    if isinstance(target, SynthWorld):
        p, r, f = pr_synth(res, target)
    else:
        p, r = pr_real(res, target, *sources, g=g)
        f = f1_score(p, r)
    return PrPoint(theta, p, r, f, weight)


def pr_curve(
    g: MultipartiteGraph,
    algorithm: str,
    thresholds: Sequence[float] | None = None,
    target: TruthSet | SynthWorld | None = None,
    mp_config: MpConfig | None = None,
    order: Sequence[int] | None = None,
    sources: tuple[int, int] = (0, 1),
    jobs: int = 1,
) -> list[PrPoint]:
    """One PR point per threshold, each from an independent solve.

    ``target`` is either a labelled truth set (evaluated between ``sources``)
    or a synthetic world (evaluated over all source pairs).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if target is None:
        raise ValueError("pr_curve needs a truth set or a synthetic world")
    if isinstance(target, TruthSet):
        _check_truth(target, g)
    thresholds = default_thresholds() if thresholds is None else list(thresholds)
    tasks = [(g, algorithm, th, target, mp_config, order, sources) for th in thresholds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_point, tasks))
    return [_point(t) for t in tasks]


def best_f1(points: Sequence[PrPoint]) -> float:
    return max((p.f1 for p in points), default=0.0)


def pr_csv(rows: Sequence[tuple[PrPoint, str, str]]) -> str:
    """Render ``(point, algorithm, sources)`` rows in the PR CSV format."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PR_HEADER)
    for pt, algorithm, sources in rows:
        writer.writerow([
            format_score(pt.threshold), format_score(pt.precision), format_score(pt.recall),
            format_score(pt.f1), format_score(pt.total_weight), algorithm, sources,
        ])
    return buf.getvalue()


# -- weight comparison -------------------------------------------------------


@dataclass(frozen=True)
class WeightRow:
    name: str
    weight: float
    relative: float


def weight_report(
    g: MultipartiteGraph | None,
    matchings: Sequence[tuple[str, Matching | float]],
    reference: str = "mp",
) -> list[WeightRow]:
    """Weights relative to the ``reference`` entry (the first entry if absent).

    Entries may be matchings (weighed on ``g``) or precomputed weights.
    """
    if not matchings:
        return []
    weigh: Callable = lambda v: float(v) if isinstance(v, (int, float)) else matching_weight(g, v)
    weights = [(name, weigh(v)) for name, v in matchings]
    ref = dict(weights).get(reference, weights[0][1])
    return [
        WeightRow(name, w, w / ref if ref else (1.0 if w == 0 else float("inf")))
        for name, w in weights
    ]
