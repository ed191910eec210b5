"""Three sources, three true entities, and why matching pairs one at a time
falls short.

Run: python demos/example1.py
"""

from multimatch import (
    exact_bipartite,
    exact_multipartite_bruteforce,
    greedy_match,
    many_many,
    matching_weight,
    sequential_bipartite,
    solve_mp,
    weight_report,
)
from multimatch.datasets import example1_graph

g = example1_graph()


def show(name, matching):
    groups = []
    for c in matching:
        groups.append("{" + ", ".join(g.entity_names[r.source][r.entity] for r in c.members) + "}")
    print(f"{name:>16}: {matching_weight(g, matching):.2f}  " + " ".join(groups))


brute = exact_multipartite_bruteforce(g)
mp, diag = solve_mp(g, 0.05)
greedy = greedy_match(g, 0.05)
seq = sequential_bipartite(g, [0, 1, 2])

print("edges with score >= 0.7:", sum(1 for *_, v in g.edges() if v >= 0.7))
show("exhaustive", brute)
show("message passing", mp)
show("greedy", greedy)
show("sequential 1,2,3", seq)
show("bipartite 1-2", exact_bipartite(g, 0, 1))
print(f"message passing converged after {diag.iterations_run} rounds")

# on their own, sources 1 and 2 prefer the crossed pairs a1-b2 and b1-a2,
# and matching the third source afterwards cannot undo them
print()
for row in weight_report(g, [("exhaustive", brute), ("mp", mp), ("sequential", seq)]):
    print(f"{row.name:>16}: {row.weight:.2f} ({row.relative:.3f} of mp)")

print()
print("many-many at 0.99 keeps", len(many_many(g, 0.99)), "pairs, ignoring one-to-one")
