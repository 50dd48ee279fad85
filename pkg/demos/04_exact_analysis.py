"""Exact expected cut counts of cuts-only strategies under the uniform law on J.

The analyzer walks the whole decision tree, branching on every adversary
answer with its exact probability, and checks at every node that the
remaining expected cuts are at least log_3 of the number of surviving
permutations.
"""

from rwcake import STRATEGIES, exact_expected_depth, lower_bound

for n in (2, 3, 4):
    print(f"n = {n}: log_3(n!) + 1 = {float(lower_bound(n)):.4f}")
    for name, spec in sorted(STRATEGIES.items()):
        r = exact_expected_depth(spec, n)
        print(f"  {name:16s} expected cuts {str(r.expected_cuts):7s} "
              f"({float(r.expected_cuts):.3f})  nodes {r.nodes:5d}  fair {r.fair}  bound met {r.meets_bound}")
