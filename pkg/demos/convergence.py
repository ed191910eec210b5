"""Rounds of message passing until fewer than 1% of the messages move, for a
range of thresholds, plus the provisional weight along the way.

Run: python demos/convergence.py [n] [seed] [out.csv]
The optional CSV holds one row per (threshold, round).
"""

import csv
import sys

from multimatch import SynthConfig, generate, solve_mp

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
out = sys.argv[3] if len(sys.argv) > 3 else None

world = generate(SynthConfig(n=n, m=3, k=5, sigma=0.06, seed=seed))
rows = []
for theta in (0.3, 0.4, 0.5, 0.6, 0.7, 0.8):
    _, diag = solve_mp(world.graph, theta)
    status = "converged" if diag.converged else "stopped"
    print(f"theta {theta:.1f}: {status} after {diag.iterations_run} rounds, "
          f"weight {diag.total_weight[-1]:.2f}")
    for k, (frac, w) in enumerate(zip(diag.changed_fraction, diag.total_weight), start=1):
        rows.append((theta, k, frac, w))

if out:
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "iteration", "changed_fraction", "total_weight"])
        writer.writerows(rows)
    print("wrote", out)
