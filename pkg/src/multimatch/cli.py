"""Command-line front end: ``multimatch {generate,solve,sweep,bench,example1}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 resource guard.
Logging verbosity comes from ``MULTIMATCH_LOG`` (error, info or debug).
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .baselines import (
    InstanceTooLarge,
    exact_bipartite,
    exact_multipartite_bruteforce,
    many_many,
    sequential_bipartite,
)
from .datasets import example1_graph
from .evaluation import (
    ALGORITHMS,
    PrPoint,
    default_thresholds,
    f1_score,
    pr_counts,
    pr_csv,
    precision_recall,
    run_algorithm,
)
from .graph import (
    Clique,
    GraphError,
    Matching,
    matching_to_jsonl,
    matching_weight,
    read_edges,
    read_truth,
    write_edges,
    write_truth,
)
from .greedy import greedy_match
from .mp import MpConfig, solve_mp
from .synth import SynthConfig, generate

log = logging.getLogger("multimatch")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 0, 1, 2, 3

# CLI spelling -> evaluation spelling
SOLVERS = {
    "greedy": "greedy",
    "mp": "mp",
    "manymany": "many_many",
    "sequential": "sequential",
    "exact-bipartite": "exact_bipartite",
    "exact-brute": "exact_brute",
}
SWEEP_ALGORITHMS = [a for a in SOLVERS if SOLVERS[a] in ALGORITHMS]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- helpers -----------------------------------------------------------------


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a finite number >= 0, got {text}")
    return v


def _int_list(text):
    if not text.strip():
        return []
    return [_positive_int(x) for x in text.split(",")]


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _manifest(out: Path, command: str, config: dict, inputs, outputs, started, diagnostics=None):
    record = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "duration_seconds": round(time.perf_counter() - started, 6),
        "diagnostics": diagnostics or {},
    }
    _write_atomic(out / "manifest.json", json.dumps(record, indent=2, sort_keys=True) + "\n")


def _mp_config(args) -> MpConfig:
    try:
        return MpConfig(
            max_iters=args.max_iters,
            starts=args.starts,
            step_cap=args.step_cap,
            damping=args.damping,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _source_list(g, text) -> list[int]:
    return [g.source_index(name.strip()) for name in text.split(",")]


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


# -- commands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    try:
        cfg = SynthConfig(args.entities, args.sources, args.features, args.sigma, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    world = generate(cfg)
    write_edges(world.graph, out / "edges.csv")
    write_truth(world.truth(), world.graph, out / "truth.csv")
    world.write_metadata(out / "world.json")
    log.info("wrote %d edges to %s", world.graph.n_edges, out)
    return EXIT_OK


def cmd_solve(args) -> int:
    started = time.perf_counter()
    algorithm = SOLVERS[args.algorithm]
    cfg = _mp_config(args)
    g = read_edges(args.edges)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = [out / "matching.jsonl"]
    diagnostics = {}
    if algorithm == "mp":
        matching, diag = solve_mp(g, args.threshold, cfg)
        diagnostics = {
            "iterations": diag.iterations_run,
            "converged": diag.converged,
            "final_changed_fraction": diag.changed_fraction[-1] if diag.changed_fraction else 0.0,
        }
        (out / "diagnostics.csv").write_text(diag.to_csv(), encoding="utf-8")
        outputs.append(out / "diagnostics.csv")
    elif algorithm == "exact_brute":
        matching = exact_multipartite_bruteforce(g, args.threshold)
    elif algorithm == "many_many":
        # not one-to-one: each accepted pair is written as its own record
        res = many_many(g, args.threshold)
        matching = Matching([Clique(tuple(p)) for p in res.pairs])
    elif algorithm == "sequential":
        order = _source_list(g, args.order) if args.order else list(range(g.m))
        try:
            matching = sequential_bipartite(g, order, args.threshold)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif algorithm == "exact_bipartite":
        pair = _source_list(g, args.pair) if args.pair else [0, 1]
        if len(pair) != 2 or g.m < 2:
            raise UsageError("exact-bipartite needs exactly two sources (--pair A,B)")
        matching = exact_bipartite(g, pair[0], pair[1], args.threshold)
    else:
        matching = greedy_match(g, args.threshold)
    (out / "matching.jsonl").write_text(matching_to_jsonl(g, matching), encoding="utf-8")
    diagnostics["weight"] = matching_weight(g, matching)
    diagnostics["cliques"] = len(matching.canonical())
    _manifest(out, "solve", _config_echo(args), [args.edges], outputs, started, diagnostics)
    print(f"{args.algorithm}: {diagnostics['cliques']} cliques, weight {diagnostics['weight']:.6g}")
    return EXIT_OK


def _sweep_point(task):
    """Rows for one threshold: every source pair plus a pooled row."""
    g, truth, algorithm, th, cfg, order, pairs = task
    rows = []
    per_pair = pairs if algorithm == "exact_bipartite" else [None]
    for solved_for in per_pair:
        res, weight = run_algorithm(g, algorithm, th, cfg, order, solved_for if solved_for else (0, 1))
        scored = [solved_for] if solved_for else pairs
        totals = [0, 0, 0]
        for s1, s2 in scored:
            counts = pr_counts(res, truth, s1, s2, g)
            totals = [a + b for a, b in zip(totals, counts)]
            p, r = precision_recall(*counts)
            label = f"{g.source_names[s1]}-{g.source_names[s2]}"
            rows.append((PrPoint(th, p, r, f1_score(p, r), weight), algorithm, label))
        if len(scored) > 1:
            p, r = precision_recall(*totals)
            rows.append((PrPoint(th, p, r, f1_score(p, r), weight), algorithm, "all"))
    return rows


def _sweep_rows(g, truth, algorithm, thresholds, cfg, order, pairs, jobs=1):
    """Solve once per threshold, in threshold order."""
    tasks = [(g, truth, algorithm, th, cfg, order, pairs) for th in thresholds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_sweep_point, tasks))
    else:
        parts = [_sweep_point(t) for t in tasks]
    return [row for part in parts for row in part]


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    if args.step <= 0:
        raise UsageError("--step must be positive")
    if args.to < args.start:
        raise UsageError("--to must be >= --from")
    cfg = _mp_config(args)
    g = read_edges(args.edges)
    truth = read_truth(args.truth, g)
    thresholds = default_thresholds(args.start, args.to, args.step)
    pairs = list(itertools.combinations(range(g.m), 2))
    order = _source_list(g, args.order) if args.order else list(range(g.m))
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for a in algorithms:
        if a not in SWEEP_ALGORITHMS:
            raise UsageError(f"unknown sweep algorithm {a!r}; choose from {SWEEP_ALGORITHMS}")
    rows = []
    for a in algorithms:
        rows += _sweep_rows(g, truth, SOLVERS[a], thresholds, cfg, order, pairs, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "pr.csv").write_text(pr_csv(rows), encoding="utf-8")
    _manifest(
        out, "sweep", _config_echo(args), [args.edges, args.truth], [out / "pr.csv"], started,
        {"thresholds": len(thresholds), "rows": len(rows)},
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    started = time.perf_counter()
    cfg = _mp_config(args)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for a in algorithms:
        if a not in ("greedy", "mp"):
            raise UsageError(f"bench supports greedy and mp, not {a!r}")
    lines = ["algorithm,m,n,seconds,iterations"]
    for m in args.sources_grid:
        for n in args.entities_grid:
            world = generate(SynthConfig(n=n, m=m, k=args.features, sigma=args.sigma, seed=args.seed))
            for a in algorithms:
                t0 = time.perf_counter()
                if a == "mp":
                    _, diag = solve_mp(world.graph, args.threshold, cfg)
                    iters = diag.iterations_run
                else:
                    greedy_match(world.graph, args.threshold)
                    iters = 1
                lines.append(f"{a},{m},{n},{time.perf_counter() - t0:.6f},{iters}")
                log.info("%s m=%d n=%d done", a, m, n)
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(text, encoding="utf-8")
        _manifest(out, "bench", _config_echo(args), [], [out / "bench.csv"], started)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_example1(args) -> int:
    g = example1_graph()
    cfg = _mp_config(args)
    results = [
        ("exact-brute", exact_multipartite_bruteforce(g)),
        ("mp", solve_mp(g, 0.0, cfg)[0]),
        ("greedy", greedy_match(g, 0.0)),
        ("sequential 1,2,3", sequential_bipartite(g, [0, 1, 2])),
    ]
    for name, matching in results:
        cliques = " ".join(
            "{" + ",".join(g.label(r) for r in c.members) + "}" for c in matching.canonical()
        )
        print(f"{name:>16}: weight {matching_weight(g, matching):.4g}  {cliques}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_edges(g, out / "edges.csv")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_mp_flags(p):
    d = MpConfig()
    p.add_argument("--max-iters", type=_positive_int, default=d.max_iters)
    p.add_argument("--starts", type=_positive_int, default=d.starts)
    p.add_argument("--step-cap", type=_positive_int, default=d.step_cap)
    p.add_argument("--damping", type=float, default=d.damping)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multimatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic world (edges, truth, metadata)")
    p.add_argument("--entities", type=_positive_int, default=100)
    p.add_argument("--sources", type=_positive_int, default=3)
    p.add_argument("--features", type=_positive_int, default=5)
    p.add_argument("--sigma", type=_nonneg_float, default=0.06)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="match an edge file with one algorithm")
    p.add_argument("--algorithm", required=True, choices=list(SOLVERS))
    p.add_argument("--edges", required=True)
    p.add_argument("--threshold", type=_nonneg_float, default=0.0)
    p.add_argument("--order", help="source names for sequential, e.g. 1,2,3")
    p.add_argument("--pair", help="two source names for exact-bipartite")
    p.add_argument("--out", required=True)
    _add_mp_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="precision/recall over a threshold grid")
    p.add_argument("--edges", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--algorithms", default="greedy,mp")
    p.add_argument("--from", dest="start", type=_nonneg_float, default=0.51)
    p.add_argument("--to", type=_nonneg_float, default=0.96)
    p.add_argument("--step", type=float, default=0.03)
    p.add_argument("--order", help="source names for sequential")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes, one threshold each")
    p.add_argument("--out", required=True)
    _add_mp_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="time solvers on synthetic worlds")
    p.add_argument("--entities-grid", type=_int_list, default=[200, 400, 600, 800, 1000])
    p.add_argument("--sources-grid", type=_int_list, default=[6])
    p.add_argument("--algorithms", default="greedy,mp")
    p.add_argument("--features", type=_positive_int, default=5)
    p.add_argument("--sigma", type=_nonneg_float, default=0.06)
    p.add_argument("--threshold", type=_nonneg_float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_mp_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("example1", help="the three-source sequential-vs-global example")
    p.add_argument("--out", help="also write its edge file here")
    _add_mp_flags(p)
    p.set_defaults(func=cmd_example1)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("MULTIMATCH_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"multimatch: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceTooLarge as exc:
        print(f"multimatch: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (GraphError, OSError, UnicodeDecodeError) as exc:
        print(f"multimatch: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
