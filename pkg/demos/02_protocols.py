"""Classic proportional protocols on random valuations, with query accounting."""

import random
from fractions import Fraction as F

from rwcake import Engine, Interval, Mode, PiecewiseMeasure, check_proportional, get_protocol, run_protocol


def random_measure(rng, pieces=4):
    edges = sorted({F(rng.randint(1, 99), 100) for _ in range(pieces - 1)} | {F(0), F(1)})
    weights = [rng.randint(1, 9) for _ in edges[1:]]
    total = sum(weights)
    return PiecewiseMeasure((Interval(a, b), F(w, total)) for a, b, w in zip(edges, edges[1:], weights))


rng = random.Random(5)
n = 6
measures = [random_measure(rng) for _ in range(n)]

for name in ("lastdim", "evenpaz"):
    engine = Engine(measures, Mode.WOEGINGER_SGALL)
    alloc, transcript = run_protocol(get_protocol(name), engine)
    report = check_proportional(alloc, measures)
    print(f"{name}: {transcript.cuts} cuts, {transcript.evals} evals, proportional={report.passed}")
    for interval, player in alloc.ordered():
        print(f"  player {player} gets [{interval.lo}, {interval.hi}] worth {report.values[player]}")

# The transcript is a replayable JSON-lines log.
print(transcript.to_jsonl().splitlines()[0])
