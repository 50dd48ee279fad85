from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from rwcake.valuation import Interval, PiecewiseMeasure


def random_measure(rng: random.Random, max_segments: int = 6, denominator: int = 997) -> PiecewiseMeasure:
    """Sorted random segments with gaps between them and some zero masses."""
    k = rng.randint(1, max_segments)
    cuts = sorted(set(rng.randint(0, denominator) for _ in range(2 * k + 2)) | {0, denominator})
    # pair consecutive breakpoints into segments, dropping every other gap
    segs = []
    for a, b in zip(cuts, cuts[1:]):
        if rng.random() < 0.7 or not segs:
            segs.append(Interval(Fraction(a, denominator), Fraction(b, denominator)))
    weights = [rng.choice([0, 0, 1, 2, 3, 5, 8]) for _ in segs]
    if sum(weights) == 0:
        weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    return PiecewiseMeasure((iv, Fraction(w, total)) for iv, w in zip(segs, weights))


@pytest.fixture
def rng():
    return random.Random(20240611)


unit_rationals = st.fractions(min_value=0, max_value=1, max_denominator=10**4)


@st.composite
def measures(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32))
    return random_measure(random.Random(seed))
