"""Multi-partite similarity graphs, cliques, matchings and their file formats.

Entities are interned to dense ``(source, entity)`` integer pairs. Scores are
stored sparsely, one sorted edge block per unordered source pair, and any
pair without a stored score (or involving the null entity) scores 0.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

log = logging.getLogger(__name__)

NULL_ENTITY = -1
NULL_TOKEN = "__NULL__"

EDGE_HEADER = ("source_a", "entity_a", "source_b", "entity_b", "score")
TRUTH_HEADER = ("source_a", "entity_a", "source_b", "entity_b", "label")


class GraphError(ValueError):
    """Bad input data (exit code 2 at the command line)."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractViolation(ValueError):
    pass


class EntityRef(NamedTuple):
    source: int
    entity: int

    @property
    def is_null(self) -> bool:
        return self.entity == NULL_ENTITY


def null_ref(source: int) -> EntityRef:
    return EntityRef(source, NULL_ENTITY)


@dataclass(frozen=True)
class EdgeBlock:
    """Edges between source ``s`` (rows) and source ``t`` (cols), ``s < t``.

    Sorted by ``row * n_cols + col`` so lookups are a binary search.
    """

    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    n_cols: int

    @property
    def keys(self) -> np.ndarray:
        return self.rows.astype(np.int64) * self.n_cols + self.cols

    def __len__(self) -> int:
        return len(self.vals)


def _make_block(rows, cols, vals, n_cols: int) -> EdgeBlock:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    order = np.argsort(rows * n_cols + cols, kind="stable")
    return EdgeBlock(rows[order], cols[order], vals[order], n_cols)


class MultipartiteGraph:
    """Immutable m-partite graph with sparse nonnegative cross-source scores.

    ``blocks`` maps ``(s, t)`` with ``s < t`` to an :class:`EdgeBlock`.
    """

    def __init__(
        self,
        source_names: Sequence[str],
        entity_names: Sequence[Sequence[str]],
        blocks: dict[tuple[int, int], EdgeBlock] | None = None,
    ):
        if len(source_names) != len(entity_names):
            raise ValueError("one entity list per source is required")
        self.source_names = tuple(source_names)
        self.entity_names = tuple(tuple(names) for names in entity_names)
        self.blocks: dict[tuple[int, int], EdgeBlock] = {}
        for (s, t), block in (blocks or {}).items():
            if s == t:
                raise GraphError(f"same-source edges in source {self.source_names[s]!r}")
            if s > t:
                block = _make_block(block.cols, block.rows, block.vals, len(self.entity_names[s]))
                s, t = t, s
            if len(block) and not np.all(np.isfinite(block.vals)):
                raise GraphError("scores must be finite")
            if len(block) and block.vals.min() < 0:
                raise GraphError("scores must be nonnegative")
            if len(block):
                self.blocks[(s, t)] = block
        self._dense: dict[tuple[int, int], np.ndarray] = {}
        self._source_index = {name: k for k, name in enumerate(self.source_names)}
        self._entity_index: list[dict[str, int]] | None = None

    # -- shape -------------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.source_names)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(names) for names in self.entity_names)

    @property
    def n_edges(self) -> int:
        return sum(len(b) for b in self.blocks.values())

    def entities(self) -> Iterator[EntityRef]:
        for s, names in enumerate(self.entity_names):
            for i in range(len(names)):
                yield EntityRef(s, i)

    def source_index(self, name: str) -> int:
        try:
            return self._source_index[name]
        except KeyError:
            raise GraphError(f"unknown source {name!r}") from None

    def entity_index(self, source: int, name: str) -> int:
        if self._entity_index is None:
            self._entity_index = [
                {n: i for i, n in enumerate(names)} for names in self.entity_names
            ]
        try:
            return self._entity_index[source][name]
        except KeyError:
            raise GraphError(
                f"unknown entity {name!r} in source {self.source_names[source]!r}"
            ) from None

    def label(self, ref: EntityRef) -> str:
        if ref.is_null:
            return f"{self.source_names[ref.source]}:{NULL_TOKEN}"
        return f"{self.source_names[ref.source]}:{self.entity_names[ref.source][ref.entity]}"

    # -- scores ------------------------------------------------------------

    def score(self, a: EntityRef, b: EntityRef) -> float:
        if a.source == b.source:
            raise ContractViolation(
                f"score requested for same-source pair in source {a.source}"
            )
        if a.is_null or b.is_null:
            return 0.0
        if a.source > b.source:
            a, b = b, a
        block = self.blocks.get((a.source, b.source))
        if block is None:
            return 0.0
        key = a.entity * block.n_cols + b.entity
        keys = block.keys
        pos = int(np.searchsorted(keys, key))
        if pos < len(keys) and keys[pos] == key:
            return float(block.vals[pos])
        return 0.0

    def dense(self, s: int, t: int) -> np.ndarray:
        """Dense ``n_s x n_t`` score matrix (zeros where absent). Cached, read-only."""
        if s == t:
            raise ContractViolation("no scores within a source")
        if s > t:
            return self.dense(t, s).T
        mat = self._dense.get((s, t))
        if mat is None:
            mat = np.zeros((self.sizes[s], self.sizes[t]))
            block = self.blocks.get((s, t))
            if block is not None:
                mat[block.rows, block.cols] = block.vals
            mat.setflags(write=False)
            self._dense[(s, t)] = mat
        return mat

    def edges(self) -> Iterator[tuple[int, int, int, int, float]]:
        """Yield ``(s, i, t, j, score)`` with ``s < t``, by source pair then entity."""
        for (s, t) in sorted(self.blocks):
            block = self.blocks[(s, t)]
            for i, j, v in zip(block.rows.tolist(), block.cols.tolist(), block.vals.tolist()):
                yield s, i, t, j, v

    def edge_arrays(self) -> tuple[np.ndarray, ...]:
        """All edges as parallel arrays ``(sa, ea, sb, eb, score)``."""
        parts = []
        for (s, t) in sorted(self.blocks):
            b = self.blocks[(s, t)]
            parts.append((np.full(len(b), s), b.rows, np.full(len(b), t), b.cols, b.vals))
        if not parts:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, empty, empty, np.zeros(0)
        return tuple(np.concatenate(col) for col in zip(*parts))

    def max_score(self) -> float:
        return max((float(b.vals.max()) for b in self.blocks.values()), default=0.0)

    def restrict(self, sources: Sequence[int]) -> MultipartiteGraph:
        """Subgraph on the given sources (renumbered in the given order)."""
        sources = list(sources)
        new_blocks = {}
        for a, s in enumerate(sources):
            for b, t in enumerate(sources):
                if a < b:
                    block = self.blocks.get((min(s, t), max(s, t)))
                    if block is None:
                        continue
                    if s < t:
                        new_blocks[(a, b)] = block
                    else:
                        new_blocks[(a, b)] = _make_block(
                            block.cols, block.rows, block.vals, self.sizes[s]
                        )
        return MultipartiteGraph(
            [self.source_names[s] for s in sources],
            [self.entity_names[s] for s in sources],
            new_blocks,
        )

    def __repr__(self) -> str:
        return f"MultipartiteGraph(m={self.m}, sizes={self.sizes}, edges={self.n_edges})"


def from_dense(
    matrices: dict[tuple[int, int], np.ndarray],
    sizes: Sequence[int],
    source_names: Sequence[str] | None = None,
    entity_names: Sequence[Sequence[str]] | None = None,
    keep_zeros: bool = False,
) -> MultipartiteGraph:
    """Build a graph from dense ``n_s x n_t`` score matrices keyed by ``(s, t)``."""
    m = len(sizes)
    if source_names is None:
        source_names = [str(s) for s in range(m)]
    if entity_names is None:
        entity_names = [[f"e{i}" for i in range(n)] for n in sizes]
    blocks = {}
    for (s, t), mat in matrices.items():
        mat = np.asarray(mat, dtype=np.float64)
        if s > t:
            s, t, mat = t, s, mat.T
        if mat.shape != (sizes[s], sizes[t]):
            raise ValueError(f"matrix for {(s, t)} has shape {mat.shape}")
        rows, cols = np.nonzero(np.ones_like(mat, dtype=bool) if keep_zeros else mat)
        blocks[(s, t)] = _make_block(rows, cols, mat[rows, cols], sizes[t])
    return MultipartiteGraph(source_names, entity_names, blocks)


# -- cliques and matchings -------------------------------------------------


@dataclass(frozen=True)
class Clique:
    """A matched tuple, at most one entity per source. Null members are dropped."""

    members: tuple[EntityRef, ...]

    def __post_init__(self):
        kept = tuple(sorted(r for r in self.members if not r.is_null))
        object.__setattr__(self, "members", kept)

    @classmethod
    def of(cls, *members: tuple[int, int]) -> Clique:
        return cls(tuple(EntityRef(*r) for r in members))

    @classmethod
    def from_slots(cls, slots: Sequence[int]) -> Clique:
        return cls(tuple(EntityRef(s, e) for s, e in enumerate(slots) if e != NULL_ENTITY))

    def slots(self, m: int) -> tuple[int, ...]:
        out = [NULL_ENTITY] * m
        for r in self.members:
            out[r.source] = r.entity
        return tuple(out)

    def pairs(self) -> Iterator[tuple[EntityRef, EntityRef]]:
        ms = self.members
        for x in range(len(ms)):
            for y in range(x + 1, len(ms)):
                yield ms[x], ms[y]

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class Matching:
    cliques: list[Clique] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cliques)

    def __iter__(self) -> Iterator[Clique]:
        return iter(self.cliques)

    def canonical(self) -> Matching:
        """Drop trivial cliques and sort, for comparisons and stable output."""
        return Matching(sorted((c for c in self.cliques if len(c) >= 2), key=lambda c: c.members))

    def as_sets(self) -> set[frozenset[EntityRef]]:
        return {frozenset(c.members) for c in self.cliques if len(c) >= 2}

    def pairs(self) -> Iterator[tuple[EntityRef, EntityRef]]:
        for c in self.cliques:
            yield from c.pairs()

    def matched_entities(self) -> set[EntityRef]:
        return {r for c in self.cliques if len(c) >= 2 for r in c.members}

    def unmatched(self, g: MultipartiteGraph) -> list[EntityRef]:
        seen = self.matched_entities()
        return [r for r in g.entities() if r not in seen]


def pair_score(g: MultipartiteGraph, a: EntityRef, b: EntityRef) -> float:
    return g.score(a, b)


def clique_weight(g: MultipartiteGraph, c: Clique) -> float:
    return sum(g.score(a, b) for a, b in c.pairs())


def matching_weight(g: MultipartiteGraph, matching: Matching) -> float:
    return sum(clique_weight(g, c) for c in matching.cliques)


class Violation(NamedTuple):
    kind: str  # "duplicate-entity" or "source-clash"
    entity: EntityRef
    detail: str


def validate_one_to_one(matching: Matching) -> list[Violation]:
    """List every one-to-one violation; an empty list means the matching is valid."""
    out = []
    owner: dict[EntityRef, int] = {}
    for k, c in enumerate(matching.cliques):
        taken: dict[int, EntityRef] = {}
        for r in c.members:
            if r.source in taken:
                out.append(Violation(
                    "source-clash", r,
                    f"clique {k} holds {taken[r.source]} and {r} from source {r.source}",
                ))
            else:
                taken[r.source] = r
            if r in owner and owner[r] != k:
                out.append(Violation(
                    "duplicate-entity", r, f"{r} appears in cliques {owner[r]} and {k}"
                ))
            else:
                owner.setdefault(r, k)
    return out


def apply_threshold(g: MultipartiteGraph, theta: float) -> MultipartiteGraph:
    """Copy of ``g`` keeping only edges with score >= theta."""
    if theta < 0:
        raise ValueError("threshold must be nonnegative")
    blocks = {}
    for key, b in g.blocks.items():
        keep = b.vals >= theta
        blocks[key] = EdgeBlock(b.rows[keep], b.cols[keep], b.vals[keep], b.n_cols)
    return MultipartiteGraph(g.source_names, g.entity_names, blocks)


# -- truth sets ------------------------------------------------------------


@dataclass
class TruthSet:
    """Labelled cross-source pairs.

    Pairs are stored as frozensets of two :class:`EntityRef`. A negative of
    the form ``{x, null_ref(t)}`` says x has no counterpart in source t.
    """

    positives: set[frozenset[EntityRef]] = field(default_factory=set)
    negatives: set[frozenset[EntityRef]] = field(default_factory=set)

    def __post_init__(self):
        clash = self.positives & self.negatives
        if clash:
            raise GraphError(f"{len(clash)} pairs labelled both positive and negative")


# -- file I/O --------------------------------------------------------------


def load_graph(
    records: Iterable[Sequence[str]] | Iterable[tuple],
    stats: dict | None = None,
    first_line: int = 1,
) -> MultipartiteGraph:
    """Build a graph from ``(source_a, id_a, source_b, id_b, score)`` records.

    Sources and entities are interned in order of first appearance. A pair
    seen more than once keeps its largest score; the number of such
    duplicates is logged and stored in ``stats["duplicates"]``.
    """
    source_ids: dict[str, int] = {}
    entity_ids: list[dict[str, int]] = []
    best: dict[tuple[int, int, int, int], float] = {}
    duplicates = 0

    def intern(source, name):
        s = source_ids.setdefault(source, len(source_ids))
        if s == len(entity_ids):
            entity_ids.append({})
        ids = entity_ids[s]
        return s, ids.setdefault(name, len(ids))

    for lineno, rec in enumerate(records, start=first_line):
        if len(rec) != 5:
            raise ParseError(f"expected 5 fields, got {len(rec)}", lineno)
        sa, ea, sb, eb, raw = rec
        sa, ea, sb, eb = str(sa), str(ea), str(sb), str(eb)
        try:
            score = float(raw)
        except (TypeError, ValueError):
            raise ParseError(f"score {raw!r} is not a number", lineno) from None
        if not math.isfinite(score):
            raise ParseError(f"score {raw!r} is not finite", lineno)
        if score < 0:
            raise GraphError(f"line {lineno}: negative score {score}")
        if sa == sb:
            raise GraphError(f"line {lineno}: same-source pair in source {sa!r}")
        s, i = intern(sa, ea)
        t, j = intern(sb, eb)
        if s > t:
            s, i, t, j = t, j, s, i
        key = (s, i, t, j)
        if key in best:
            duplicates += 1
            best[key] = max(best[key], score)
        else:
            best[key] = score

    if duplicates:
        log.warning("%d duplicate edge records; kept the maximum score", duplicates)
    if stats is not None:
        stats["duplicates"] = duplicates

    sizes = [len(ids) for ids in entity_ids]
    grouped: dict[tuple[int, int], list] = {}
    for (s, i, t, j), v in best.items():
        grouped.setdefault((s, t), []).append((i, j, v))
    blocks = {}
    for (s, t), items in grouped.items():
        rows, cols, vals = zip(*items)
        blocks[(s, t)] = _make_block(rows, cols, vals, sizes[t])
    names = [list(ids) for ids in entity_ids]
    return MultipartiteGraph(list(source_ids), names, blocks)


def _csv_rows(fh, header: Sequence[str]) -> Iterator[list[str]]:
    reader = csv.reader(fh)
    first = next(reader, None)
    if first is None:
        return
    if [c.strip() for c in first] != list(header):
        raise ParseError(f"expected header {','.join(header)}", 1)
    for row in reader:
        if row:
            yield row


def read_edges(path, stats: dict | None = None) -> MultipartiteGraph:
    with open(path, newline="", encoding="utf-8") as fh:
        return load_graph(_csv_rows(fh, EDGE_HEADER), stats, first_line=2)


def format_score(v: float) -> str:
    return repr(float(v))


def write_edges(g: MultipartiteGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for s, i, t, j, v in g.edges():
            w.writerow([
                g.source_names[s], g.entity_names[s][i],
                g.source_names[t], g.entity_names[t][j],
                format_score(v),
            ])


def read_truth(path, g: MultipartiteGraph) -> TruthSet:
    truth = TruthSet()
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(_csv_rows(fh, TRUTH_HEADER), start=2):
            if len(row) != 5:
                raise ParseError(f"expected 5 fields, got {len(row)}", lineno)
            sa, ea, sb, eb, label = (c.strip() for c in row)
            if label not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {label!r}", lineno)
            s, t = g.source_index(sa), g.source_index(sb)
            if s == t:
                raise GraphError(f"line {lineno}: same-source truth pair")
            a = EntityRef(s, g.entity_index(s, ea))
            if eb == NULL_TOKEN:
                if label == "1":
                    raise GraphError(f"line {lineno}: {NULL_TOKEN} only allowed with label 0")
                b = null_ref(t)
            else:
                b = EntityRef(t, g.entity_index(t, eb))
            (truth.positives if label == "1" else truth.negatives).add(frozenset((a, b)))
    truth.__post_init__()
    return truth


def write_truth(truth: TruthSet, g: MultipartiteGraph, path) -> None:
    rows = []
    for label, pairs in (("1", truth.positives), ("0", truth.negatives)):
        for pair in pairs:
            a, b = sorted(pair, key=lambda r: (r.is_null, r))
            rows.append((a, b, label))
    rows.sort(key=lambda r: (r[2] == "0", r[0], r[1]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_HEADER)
        for a, b, label in rows:
            w.writerow([
                g.source_names[a.source], g.entity_names[a.source][a.entity],
                g.source_names[b.source],
                NULL_TOKEN if b.is_null else g.entity_names[b.source][b.entity],
                label,
            ])


def matching_to_jsonl(g: MultipartiteGraph, matching: Matching, weights_from=None) -> str:
    """One JSON object per clique; weights use ``weights_from`` (default ``g``)."""
    wg = weights_from if weights_from is not None else g
    buf = io.StringIO()
    for c in matching.canonical().cliques:
        rec = {
            "members": [
                {"source": g.source_names[r.source], "entity": g.entity_names[r.source][r.entity]}
                for r in c.members
            ],
            "weight": clique_weight(wg, c),
        }
        buf.write(json.dumps(rec, sort_keys=False) + "\n")
    return buf.getvalue()


def read_matching(path, g: MultipartiteGraph) -> Matching:
    cliques = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                members = [
                    EntityRef(s, g.entity_index(s, mem["entity"]))
                    for mem in rec["members"]
                    for s in [g.source_index(mem["source"])]
                ]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"bad matching record: {exc}", lineno) from None
            cliques.append(Clique(tuple(members)))
    return Matching(cliques)
