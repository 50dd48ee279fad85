"""Seeded query-count experiments on sampled hard instances."""

import math

from rwcake import emit_report, lower_bound, run_experiment

print(f"{'n':>3} {'bound':>8} {'evenpaz':>9} {'lastdim':>9} {'evenpaz/(n log2 n)':>19}")
for n in (4, 8, 16):
    ep = run_experiment("evenpaz", n, 20, seed=1)
    ld = run_experiment("lastdim", n, 20, seed=1)
    ratio = float(ep.mean_queries) / (n * math.log2(n))
    print(f"{n:>3} {float(lower_bound(n)):8.2f} {float(ep.mean_queries):9.1f} {float(ld.mean_queries):9.1f} {ratio:19.3f}")

report = run_experiment("evenpaz", 4, 3, seed=0)
print(emit_report(report, "csv").decode())
