"""Max-sum message passing for multi-partite matching.

Every entity ``i`` of source ``s`` owns one constraint factor ("i is matched
exactly once") over all tuples that contain it. The message from that
factor to the tuple ``X`` is

    alpha_s,i(X) = -max_{Y != X} [ sum_{t != s} alpha_t,Y[t](Y) + S(Y) ]

where ``S(Y)`` is the summed pairwise score of the non-null members of
``Y`` and null slots carry alpha = 0. The right-hand side only depends on
``X`` through the exclusion ``Y != X``, so per entity alpha takes just two
values: the negated best (for every tuple but the maximiser) and the negated
second best (at the maximiser). :class:`AlphaStore` keeps exactly that.

The inner maximisation is done by coordinate ascent over partner slots from
a few starts seeded by each entity's top-2 neighbours per source. After the
messages settle, tuples with ``sum_j alpha_j(X) + S(X) >= 0`` are admitted
greedily by that margin.

Public tuples are full length-``m`` integer tuples with ``X[s] == i`` for
the owning entity and ``-1`` in null slots. Internally the null entity of
source ``t`` is the padding index ``n_t`` so that score and message lookups
are plain array gathers.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .graph import (
    NULL_ENTITY,
    Clique,
    Matching,
    MultipartiteGraph,
    apply_threshold,
    matching_weight,
    validate_one_to_one,
)

log = logging.getLogger(__name__)

Combo = tuple[int, ...]

# admission slack for the selection margin; absorbs summation rounding only
SELECTION_TOL = 1e-9
# a coordinate move must improve by more than this
ASCENT_TOL = 1e-12
# key row for padded null entities; never equals a real tuple
_NO_KEY = -2


@dataclass
class MpConfig:
    max_iters: int = 200
    convergence_fraction: float = 0.01
    change_epsilon: float = 1e-6
    starts: int = 4
    step_cap: int = 20
    # synchronous rounds oscillate undamped and are unstable below ~1/3
    damping: float = 0.4
    # "stepwise" (coordinate ascent) or "exhaustive" (every tuple; tiny graphs only)
    search: str = "stepwise"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.convergence_fraction <= 1:
            raise ValueError("convergence_fraction must lie in (0, 1]")
        if self.change_epsilon < 0:
            raise ValueError("change_epsilon must be >= 0")
        if self.starts < 1 or self.step_cap < 1:
            raise ValueError("starts and step_cap must be >= 1")
        if not 0 <= self.damping < 1:
            raise ValueError("damping must lie in [0, 1)")
        if self.search not in ("stepwise", "exhaustive"):
            raise ValueError(f"unknown search mode {self.search!r}")


@dataclass
class MpDiagnostics:
    iterations_run: int = 0
    changed_fraction: list[float] = field(default_factory=list)
    total_weight: list[float] = field(default_factory=list)
    converged: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "changed_fraction", "total_weight"])
        for k, (c, tw) in enumerate(zip(self.changed_fraction, self.total_weight), start=1):
            w.writerow([k, repr(c), repr(tw)])
        return buf.getvalue()


@dataclass
class AlphaStore:
    """Compressed alpha messages: per entity a normal value, an exception
    tuple and the value taken at that tuple."""

    normal: list[np.ndarray]
    exc_value: list[np.ndarray]
    exc_key: list[np.ndarray]  # per source, (n_s, m) int64, -1 for null slots
    # per source, (k, m) tuples reached during the last round's searches
    visited: list[np.ndarray] | None = None

    @classmethod
    def zeros(cls, sizes: Sequence[int]) -> AlphaStore:
        m = len(sizes)
        keys = []
        for s, n in enumerate(sizes):
            k = np.full((n, m), NULL_ENTITY, dtype=np.int64)
            k[:, s] = np.arange(n)
            keys.append(k)
        return cls([np.zeros(n) for n in sizes], [np.zeros(n) for n in sizes], keys)

    @property
    def m(self) -> int:
        return len(self.normal)

    def value(self, s: int, i: int, combo: Sequence[int]) -> float:
        """alpha of entity ``i`` in source ``s`` towards tuple ``combo``."""
        if i == NULL_ENTITY:
            return 0.0
        key = self.exc_key[s][i]
        if all(int(key[t]) == combo[t] for t in range(self.m)):
            return float(self.exc_value[s][i])
        return float(self.normal[s][i])

    def materialize(self, s: int, i: int, combos: Sequence[Combo]) -> dict[Combo, float]:
        return {c: self.value(s, i, c) for c in combos}

    def copy(self) -> AlphaStore:
        return AlphaStore(
            [a.copy() for a in self.normal],
            [a.copy() for a in self.exc_value],
            [a.copy() for a in self.exc_key],
            self.visited,
        )


class _Problem:
    """Zero-padded dense score matrices for one (thresholded) graph."""

    def __init__(self, g: MultipartiteGraph):
        self.g = g
        self.m = g.m
        self.sizes = g.sizes
        self.pad = np.asarray(self.sizes, dtype=np.int64)
        self.W = [[None] * g.m for _ in range(g.m)]
        for s in range(g.m):
            for t in range(s + 1, g.m):
                w = np.zeros((self.sizes[s] + 1, self.sizes[t] + 1))
                w[:-1, :-1] = g.dense(s, t)
                self.W[s][t] = w
                self.W[t][s] = w.T
        self.others = [[t for t in range(g.m) if t != s] for s in range(g.m)]
        # mixed-radix codes of a tuple's slots other than t, used to find the
        # source-t entities whose exception key agrees with a tuple there
        self.radix: list[np.ndarray | None] = []
        for t in range(g.m):
            bases = [self.sizes[u] + 1 for u in self.others[t]]
            if math.prod(bases) < 2**62:
                self.radix.append(np.cumprod([1] + bases[:-1]).astype(np.int64))
            else:
                self.radix.append(None)
        self._starts: dict[tuple[int, int], list[np.ndarray]] = {}

    def to_padded(self, X: np.ndarray) -> np.ndarray:
        return np.where(X < 0, self.pad, X)

    def to_public(self, X: np.ndarray) -> np.ndarray:
        return np.where(X >= self.pad, NULL_ENTITY, X)

    def similarity(self, X: np.ndarray) -> np.ndarray:
        """S for a batch of padded tuples ``(B, m)``."""
        total = np.zeros(len(X))
        for u in range(self.m):
            for v in range(u + 1, self.m):
                total += self.W[u][v][X[:, u], X[:, v]]
        return total


class _Messages:
    """Alpha store re-laid out on padded indices for one round."""

    def __init__(self, prob: _Problem, alphas: AlphaStore):
        self.normal, self.exc, self.key = [], [], []
        for s in range(prob.m):
            self.normal.append(np.append(alphas.normal[s], 0.0))
            self.exc.append(np.append(alphas.exc_value[s], 0.0))
            key = prob.to_padded(alphas.exc_key[s]) if len(alphas.exc_key[s]) else (
                np.zeros((0, prob.m), dtype=np.int64))
            self.key.append(np.vstack([key, np.full((1, prob.m), _NO_KEY)]))
        self.prob = prob
        self.sorted_codes, self.code_order = [], []
        for t in range(prob.m):
            if prob.radix[t] is None:
                self.sorted_codes.append(None)
                self.code_order.append(None)
                continue
            codes = self.key[t][:prob.sizes[t], prob.others[t]] @ prob.radix[t]
            order = np.argsort(codes, kind="stable")
            self.sorted_codes.append(codes[order])
            self.code_order.append(order)

    def alpha(self, u: int, X: np.ndarray) -> np.ndarray:
        """alpha of member in slot u towards each padded tuple of X."""
        x = X[:, u]
        hit = np.all(self.key[u][x] == X, axis=1)
        return np.where(hit, self.exc[u][x], self.normal[u][x])

    def key_hits(self, t: int, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(row, entity) pairs where a source-t entity's exception key agrees
        with tuple X[row] on every slot except t."""
        prob = self.prob
        members = prob.others[t]
        n_t = prob.sizes[t]
        if prob.radix[t] is None:
            keys = self.key[t][:n_t]
            return np.nonzero(np.all(keys[None, :, members] == X[:, None, members], axis=2))
        codes = X[:, members] @ prob.radix[t]
        lo = np.searchsorted(self.sorted_codes[t], codes, side="left")
        cnt = np.searchsorted(self.sorted_codes[t], codes, side="right") - lo
        rows = np.repeat(np.arange(len(X)), cnt)
        offs = np.arange(len(rows)) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        return rows, self.code_order[t][np.repeat(lo, cnt) + offs]


def _tuple_values(prob: _Problem, msg: _Messages, s: int, X: np.ndarray) -> np.ndarray:
    val = prob.similarity(X)
    for u in prob.others[s]:
        val += msg.alpha(u, X)
    return val


def _slot_values(prob: _Problem, msg: _Messages, s: int, X: np.ndarray, t: int) -> np.ndarray:
    """Objective (seen from the source-s member) of every tuple in X with slot
    t replaced by each entity of source t; the last column is null."""
    n_t = prob.sizes[t]
    members = prob.others[t]
    rows = np.arange(len(X))
    vals = np.zeros((len(X), n_t + 1))
    fixed = np.zeros(len(X))
    for a, u in enumerate(members):
        vals += prob.W[u][t][X[:, u]]
        for v in members[a + 1:]:
            fixed += prob.W[u][v][X[:, u], X[:, v]]
    for u in members:
        if u == s:
            continue
        x = X[:, u]
        normal = msg.normal[u][x]
        fixed += normal
        key = msg.key[u][x]
        match = np.all(key[:, members] == X[:, members], axis=1)
        if match.any():
            r = rows[match]
            vals[r, key[r, t]] += msg.exc[u][x[r]] - normal[r]
    if n_t:
        block = np.tile(msg.normal[t][:n_t], (len(X), 1))
        r, j = msg.key_hits(t, X)
        block[r, j] = msg.exc[t][j]
        vals[:, :n_t] += block
    return vals + fixed[:, None]


def _starts(prob: _Problem, s: int, ids: np.ndarray, n_starts: int) -> list[np.ndarray]:
    """Up to ``n_starts`` padded start tuples per entity, built from its top-2
    neighbours in each other source and ranked by similarity."""
    # starts depend on the graph only, so compute them once per source
    full = prob._starts.get((s, n_starts))
    if full is None:
        full = _build_starts(prob, s, np.arange(prob.sizes[s]), n_starts)
        prob._starts[(s, n_starts)] = full
    return [X[ids] for X in full]


def _build_starts(prob: _Problem, s: int, ids: np.ndarray, n_starts: int) -> list[np.ndarray]:
    B = len(ids)
    per_source = []
    for t in prob.others[s]:
        rows = prob.W[s][t][ids, :-1]
        null = prob.sizes[t]
        if rows.shape[1] == 0:
            per_source.append((np.full(B, null), None))
            continue
        order = np.argsort(-rows, axis=1, kind="stable")[:, :2]
        top = np.take_along_axis(rows, order, axis=1)
        first = np.where(top[:, 0] > 0, order[:, 0], null)
        second = None
        if order.shape[1] > 1:
            second = np.where(top[:, 1] > 0, order[:, 1], -1)
        per_source.append((first, second))
    combos, valid = [], []
    for pick in itertools.product((0, 1), repeat=len(per_source)):
        X = np.empty((B, prob.m), dtype=np.int64)
        X[:, s] = ids
        ok = np.ones(B, dtype=bool)
        for (t, (first, second)), p in zip(zip(prob.others[s], per_source), pick):
            if p == 0:
                X[:, t] = first
            elif second is None:
                ok[:] = False
                X[:, t] = first
            else:
                ok &= second >= 0
                X[:, t] = np.where(second >= 0, second, first)
        combos.append(X)
        valid.append(ok)
    sims = np.stack([np.where(ok, prob.similarity(X), -np.inf) for X, ok in zip(combos, valid)], axis=1)
    rank = np.argsort(-sims, axis=1, kind="stable")
    out = []
    for k in range(min(n_starts, len(combos))):
        pick = rank[:, k]
        usable = np.isfinite(sims[np.arange(B), pick])
        # entities with fewer distinct starts repeat their best one
        pick = np.where(usable, pick, rank[:, 0])
        X = np.stack([combos[c][b] for b, c in enumerate(pick)]) if B else np.zeros((0, prob.m), dtype=np.int64)
        out.append(X)
    return out


class _Batch(NamedTuple):
    best: np.ndarray  # padded (B, m)
    best_val: np.ndarray
    second_val: np.ndarray
    snapshots: list[np.ndarray]  # padded (B, m) states after each move
    trace: list[tuple[int, np.ndarray]]  # (start index, current values) per step


def _fold(X, cur, best, best_val, second_val):
    """Merge candidate tuples into running best/second over distinct tuples."""
    same = np.all(X == best, axis=1)
    better = ~same & (cur > best_val)
    second_val = np.where(better, best_val, np.where(same, second_val, np.maximum(second_val, cur)))
    best = np.where(better[:, None], X, best)
    best_val = np.where(better, cur, best_val)
    return best, best_val, second_val


def _proposals(prob: _Problem, msg: _Messages, s: int, ids: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tuples that partners currently hold as their exception key.

    Only at these tuples does any partner's alpha differ from its normal
    value, so they are where a search over normal values is most likely to
    be wrong. Returned in layers of (batch rows, tuples) with at most one
    tuple per row per layer.
    """
    pos = np.full(prob.sizes[s] + 1, -1)
    pos[ids] = np.arange(len(ids))
    rows, tuples = [], []
    for t in prob.others[s]:
        keys = msg.key[t][:prob.sizes[t]]
        owner = keys[:, s]
        mine = pos[owner] >= 0 if len(keys) else np.zeros(0, dtype=bool)
        rows.append(pos[owner[mine]])
        tuples.append(keys[mine])
    if not rows:
        return []
    rows = np.concatenate(rows)
    tuples = np.concatenate(tuples)
    order = np.argsort(rows, kind="stable")
    rows, tuples = rows[order], tuples[order]
    rank = np.arange(len(rows)) - np.searchsorted(rows, rows, side="left")
    return [(rows[rank == r], tuples[rank == r]) for r in range(int(rank.max(initial=-1)) + 1)]


def _ascend(prob: _Problem, msg: _Messages, s: int, ids: np.ndarray, cfg: MpConfig) -> _Batch:
    B = len(ids)
    others = prob.others[s]
    # the unmatched tuple (i, null, ..., null) is always a candidate, value 0
    best = np.tile(prob.pad, (B, 1))
    best[:, s] = ids
    best_val = np.zeros(B)
    second_val = np.full(B, -np.inf)
    snapshots, trace = [], []
    for r, X in _proposals(prob, msg, s, ids):
        cur = _tuple_values(prob, msg, s, X)
        best[r], best_val[r], second_val[r] = _fold(X, cur, best[r], best_val[r], second_val[r])
    starts = _starts(prob, s, ids, cfg.starts)
    # warm start from last round's best tuple
    starts.append(np.where(msg.key[s][ids] >= 0, msg.key[s][ids], best))
    # all starts ascend together as lanes of one batch; each lane keeps its
    # own best and second, merged once the ascent is over
    L = len(starts)
    X = np.vstack(starts)
    best = np.tile(best, (L, 1))
    best_val = np.tile(best_val, L)
    second_val = np.tile(second_val, L)
    cur = _tuple_values(prob, msg, s, X)
    best, best_val, second_val = _fold(X, cur, best, best_val, second_val)
    snapshots.append(X.copy())

    def log_lanes():
        for k in range(L):
            trace.append((k, cur[k * B:(k + 1) * B].copy()))

    log_lanes()
    fixed_cols = {t: [u for u in range(prob.m) if u != t] for t in others}
    stale = np.zeros(L * B, dtype=np.int64)
    for step in range(cfg.step_cap if others else 0):
        t = others[step % len(others)]
        # a row idle for a full rotation has already scanned every slot
        # around its current tuple, so it is left out
        act = np.nonzero(stale < len(others))[0]
        if not len(act):
            break
        Xa = X[act]
        vals = _slot_values(prob, msg, s, Xa, t)
        rows_a = np.arange(len(act))
        # best/second over distinct tuples: hide the incumbent best if present
        v = vals.copy()
        ba = best[act]
        in_best = np.all((ba == Xa)[:, fixed_cols[t]], axis=1)
        v[rows_a[in_best], ba[in_best, t]] = -np.inf
        idx1 = np.argmax(v, axis=1)
        c1 = v[rows_a, idx1]
        v[rows_a, idx1] = -np.inf
        c2 = v.max(axis=1)
        bv, sv = best_val[act], second_val[act]
        improved = c1 > bv
        second_val[act] = np.where(improved, np.maximum(bv, c2), np.maximum(sv, c1))
        best_val[act] = np.where(improved, c1, bv)
        up = act[improved]
        best[up] = Xa[improved]
        best[up, t] = idx1[improved]
        # coordinate move
        here = vals[rows_a, Xa[:, t]]
        b = np.argmax(vals, axis=1)
        moved = vals[rows_a, b] > here + ASCENT_TOL
        if moved.any():
            X[act[moved], t] = b[moved]
            snapshots.append(X[act[moved]].copy())
        cur[act] = np.where(moved, vals[rows_a, b], here)
        log_lanes()
        stale[act] = np.where(moved, 0, stale[act] + 1)
    best, best_val, second_val = _merge_lanes(best, best_val, second_val, L, B)
    second_val = np.where(np.isfinite(second_val), second_val, 0.0)
    return _Batch(best, best_val, second_val, snapshots, trace)


def _merge_lanes(best, best_val, second_val, L, B):
    """Combine per-lane best/second into best/second over distinct tuples.

    A lane's second can only coincide with another lane's best tuple when
    the two values tie, so taking maxima is exact.
    """
    bt = best.reshape(L, B, -1)
    bv = best_val.reshape(L, B)
    sv = second_val.reshape(L, B)
    cols = np.arange(B)
    win = np.argmax(bv, axis=0)
    top, top_val = bt[win, cols], bv[win, cols]
    other = np.where(np.all(bt == top[None], axis=2), -np.inf, bv)
    return top, top_val, np.maximum(sv.max(axis=0), other.max(axis=0))


def _exhaustive(prob: _Problem, msg: _Messages, s: int, ids: np.ndarray) -> _Batch:
    choices = [range(prob.sizes[t] + 1) for t in range(prob.m) if t != s]
    combos = list(itertools.product(*choices))
    best, best_val, second_val = [], [], []
    for i in ids.tolist():
        X = np.array([c[:s] + (i,) + c[s:] for c in combos], dtype=np.int64).reshape(-1, prob.m)
        vals = _tuple_values(prob, msg, s, X)
        order = np.argsort(-vals, kind="stable")
        best.append(X[order[0]])
        best_val.append(vals[order[0]])
        second_val.append(vals[order[1]] if len(order) > 1 else 0.0)
    best = np.array(best, dtype=np.int64).reshape(-1, prob.m)
    return _Batch(best, np.array(best_val), np.array(second_val), [best], [])


def _search(prob, msg, s, ids, cfg) -> _Batch:
    if cfg.search == "exhaustive":
        return _exhaustive(prob, msg, s, ids)
    return _ascend(prob, msg, s, ids, cfg)


class SearchResult(NamedTuple):
    best_combo: Combo
    best_val: float
    second_val: float
    # objective of the current tuple after each step, one list per start
    trajectory: list[list[float]]


def stepwise_search(
    g: MultipartiteGraph, alphas: AlphaStore, s: int, i: int, cfg: MpConfig | None = None
) -> SearchResult:
    """Approximate best and second-best partner tuples for entity ``i`` of source ``s``."""
    if i == NULL_ENTITY or not 0 <= i < g.sizes[s]:
        raise ValueError("stepwise_search needs a non-null entity")
    prob = _Problem(g)
    res = _search(prob, _Messages(prob, alphas), s, np.array([i]), cfg or MpConfig())
    traj: list[list[float]] = []
    for k, cur in res.trace:
        if k == len(traj):
            traj.append([])
        traj[k].append(float(cur[0]))
    best = tuple(int(x) for x in prob.to_public(res.best[0]))
    return SearchResult(best, float(res.best_val[0]), float(res.second_val[0]), traj)


def _round(prob: _Problem, alphas: AlphaStore, cfg: MpConfig) -> tuple[AlphaStore, float]:
    msg = _Messages(prob, alphas)
    new = alphas.copy()
    visited = []
    changed = total = 0
    lam = cfg.damping
    for s in range(prob.m):
        n = prob.sizes[s]
        if n == 0:
            visited.append(np.zeros((0, prob.m), dtype=np.int64))
            continue
        res = _search(prob, msg, s, np.arange(n), cfg)
        key = prob.to_public(res.best)
        normal, exc = -res.best_val, -res.second_val
        if lam > 0:
            # the previous message evaluated at the new exception tuple
            old_at_key = msg.alpha(s, res.best)
            normal = lam * alphas.normal[s] + (1 - lam) * normal
            exc = lam * old_at_key + (1 - lam) * exc
        moved = (
            (np.abs(normal - alphas.normal[s]) > cfg.change_epsilon)
            | (np.abs(exc - alphas.exc_value[s]) > cfg.change_epsilon)
            | np.any(key != alphas.exc_key[s], axis=1)
        )
        changed += int(moved.sum())
        total += n
        new.normal[s] = normal
        new.exc_value[s] = exc
        new.exc_key[s] = key
        visited.append(_unique_rows(prob, prob.to_public(np.vstack(res.snapshots))))
    new.visited = visited
    return new, (changed / total if total else 0.0)


def update_round(
    g: MultipartiteGraph, alphas: AlphaStore, cfg: MpConfig | None = None
) -> tuple[AlphaStore, float]:
    """One synchronous round: every entity re-solves against the previous
    round's messages. Returns the new store and the fraction of entities whose
    messages moved by more than ``cfg.change_epsilon`` (or whose exception
    tuple changed)."""
    return _round(_Problem(g), alphas, cfg or MpConfig())


def selection_margins(g: MultipartiteGraph, alphas: AlphaStore, tuples) -> np.ndarray:
    """``sum_j alpha_j(X) + S(X)`` for each tuple; >= 0 marks a tuple for selection."""
    prob = _Problem(g)
    X = prob.to_padded(np.asarray(tuples, dtype=np.int64).reshape(-1, g.m))
    return _margins(prob, _Messages(prob, alphas), X)[0]


def _margins(prob: _Problem, msg: _Messages, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sim = prob.similarity(X)
    q = sim.copy()
    for u in range(prob.m):
        q += msg.alpha(u, X)
    return q, sim


def _unique_rows(prob: _Problem, X: np.ndarray) -> np.ndarray:
    """Distinct public tuples in lexicographic order (``np.unique(axis=0)``)."""
    bases = [n + 1 for n in prob.sizes]
    if not len(X) or math.prod(bases) >= 2**62:
        return np.unique(X, axis=0)
    mult = np.cumprod([1] + bases[::-1][:-1])[::-1].astype(np.int64)
    codes = (X + 1) @ mult
    _, first = np.unique(codes, return_index=True)
    return X[first]


def _select(prob: _Problem, alphas: AlphaStore) -> tuple[Matching, float]:
    parts = [k for k in alphas.exc_key if len(k)]
    if alphas.visited is not None:
        parts += [v for v in alphas.visited if len(v)]
    if not parts:
        return Matching(), 0.0
    pool = _unique_rows(prob, np.vstack(parts))
    pool = pool[np.sum(pool != NULL_ENTITY, axis=1) >= 2]
    X = prob.to_padded(pool)
    q, sim = _margins(prob, _Messages(prob, alphas), X)
    keep = (q >= -SELECTION_TOL) & (sim > 0)
    pool, q, sim = pool[keep], q[keep], sim[keep]
    # margin desc, then similarity desc, then tuple order
    order = np.lexsort(tuple(pool[:, u] for u in reversed(range(prob.m))) + (-sim, -q))
    used: set[tuple[int, int]] = set()
    cliques, weight = [], 0.0
    for k in order.tolist():
        members = [(u, x) for u, x in enumerate(pool[k].tolist()) if x != NULL_ENTITY]
        if any(r in used for r in members):
            continue
        used.update(members)
        cliques.append(Clique.of(*members))
        weight += float(sim[k])
    return Matching(cliques).canonical(), weight


def final_selection(
    g: MultipartiteGraph, alphas: AlphaStore, theta: float = 0.0
) -> Matching:
    """Admit candidate tuples with nonnegative selection margin, largest margin
    first, skipping any that reuse an already-admitted entity."""
    return _select(_Problem(apply_threshold(g, theta)), alphas)[0]


def objective_value(g: MultipartiteGraph, matching: Matching) -> float:
    """Total weight of a one-to-one matching; ``-inf`` if it breaks the constraint."""
    if validate_one_to_one(matching):
        return float("-inf")
    return matching_weight(g, matching)


def solve_mp(
    g: MultipartiteGraph, theta: float = 0.0, cfg: MpConfig | None = None
) -> tuple[Matching, MpDiagnostics]:
    cfg = cfg or MpConfig()
    prob = _Problem(apply_threshold(g, theta))
    alphas = AlphaStore.zeros(prob.sizes)
    diag = MpDiagnostics()
    matching = Matching()
    for it in range(cfg.max_iters):
        alphas, frac = _round(prob, alphas, cfg)
        matching, weight = _select(prob, alphas)
        diag.iterations_run = it + 1
        diag.changed_fraction.append(frac)
        diag.total_weight.append(weight)
        log.debug("round %d: changed %.4f weight %.6g", it + 1, frac, weight)
        if frac < cfg.convergence_fraction:
            diag.converged = True
            break
    return matching, diag
