"""Wall-clock time of greedy and message passing as the number of entities
and the number of sources grow.

Run: python demos/bench.py
Sizes are kept modest; `multimatch bench` takes larger grids.
"""

import time

from multimatch import SynthConfig, generate, greedy_match, solve_mp


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return time.perf_counter() - t0, out


print("algorithm  m     n   seconds  rounds")
for m, n in [(3, 50), (3, 100), (3, 200), (4, 50), (5, 50)]:
    g = generate(SynthConfig(n=n, m=m, k=5, sigma=0.06, seed=0)).graph
    secs, _ = timed(lambda: greedy_match(g, 0.5))
    print(f"greedy    {m:2d} {n:5d} {secs:9.3f}       1")
    secs, (_, diag) = timed(lambda: solve_mp(g, 0.5))
    print(f"mp        {m:2d} {n:5d} {secs:9.3f}  {diag.iterations_run:6d}")
