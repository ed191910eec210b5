"""Best F1 of greedy and message passing on synthetic worlds as the feature
noise grows.

Run: python demos/noise_robustness.py [n] [seeds]
Defaults are small (n=60, 3 seeds) so it finishes in a minute or two.
"""

import sys

import numpy as np

from multimatch import SynthConfig, generate, pr_curve
from multimatch.evaluation import best_f1

n = int(sys.argv[1]) if len(sys.argv) > 1 else 60
seeds = range(1, 1 + (int(sys.argv[2]) if len(sys.argv) > 2 else 3))

print(f"n={n}, m=3, k=5, seeds {list(seeds)}")
print(" sigma   greedy       mp")
for sigma in (0.0, 0.02, 0.04, 0.06, 0.1, 0.2):
    f1 = {"greedy": [], "mp": []}
    for seed in seeds:
        world = generate(SynthConfig(n=n, m=3, k=5, sigma=sigma, seed=seed))
        for algo in f1:
            f1[algo].append(best_f1(pr_curve(world.graph, algo, target=world)))
    print(f"{sigma:6.2f}   {np.mean(f1['greedy']):.3f}    {np.mean(f1['mp']):.3f}")
