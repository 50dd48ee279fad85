"""Exact piecewise-constant valuations on the unit cake [0, 1].

Every number is a :class:`fractions.Fraction`.  A measure is a sorted list of
disjoint segments, each carrying a mass spread uniformly over its length, so
additivity and divisibility hold by construction.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use Fraction or 'p/q'")
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _check_unit(value: Fraction, what: str) -> None:
    if not ZERO <= value <= ONE:
        raise ValueError(f"{what} must lie in [0, 1], got {value}")


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not ZERO <= lo <= hi <= ONE:
            raise ValueError(f"invalid interval [{lo}, {hi}]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class Segment:
    interval: Interval
    mass: Fraction


class PiecewiseMeasure:
    """A normalized, atomless measure with constant density on each segment.

    Segments must be sorted, have positive length, non-negative mass and
    pairwise disjoint interiors; the masses must sum to exactly one.
    """

    __slots__ = ("segments", "_los", "_his", "_cum")

    def __init__(self, segments: Iterable[tuple[Interval, RationalLike] | Segment]):
        segs = []
        for seg in segments:
            if isinstance(seg, Segment):
                interval, mass = seg.interval, seg.mass
            else:
                interval, mass = seg
            if not isinstance(interval, Interval):
                interval = Interval(*interval)
            segs.append(Segment(interval, as_rational(mass)))
        if not segs:
            raise ValueError("a measure needs at least one segment")

        prev_hi = ZERO
        total = ZERO
        for seg in segs:
            if seg.interval.length <= 0:
                raise ValueError(f"zero-length segment at {seg.interval.lo}")
            if seg.mass < 0:
                raise ValueError(f"negative mass {seg.mass}")
            if seg.interval.lo < prev_hi:
                raise ValueError("segments must be sorted with disjoint interiors")
            prev_hi = seg.interval.hi
            total += seg.mass
        if total != ONE:
            raise ValueError(f"masses sum to {total}, not 1")

        self.segments: tuple[Segment, ...] = tuple(segs)
        self._los = [s.interval.lo for s in segs]
        self._his = [s.interval.hi for s in segs]
        # _cum[k] is the total mass strictly before segment k
        cum = [ZERO]
        for s in segs:
            cum.append(cum[-1] + s.mass)
        self._cum = cum

    @classmethod
    def uniform(cls) -> PiecewiseMeasure:
        return cls([(Interval(ZERO, ONE), ONE)])

    @classmethod
    def from_density(cls, breakpoints: Sequence[RationalLike], masses: Sequence[RationalLike]) -> PiecewiseMeasure:
        """Contiguous segments between consecutive breakpoints."""
        pts = [as_rational(b) for b in breakpoints]
        if len(pts) != len(masses) + 1:
            raise ValueError("need exactly one more breakpoint than masses")
        return cls((Interval(a, b), m) for a, b, m in zip(pts, pts[1:], masses))

    def __eq__(self, other):
        if not isinstance(other, PiecewiseMeasure):
            return NotImplemented
        return self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def __repr__(self):
        body = ", ".join(f"[{s.interval.lo}, {s.interval.hi}]:{s.mass}" for s in self.segments)
        return f"PiecewiseMeasure({body})"

    def to_json(self) -> str:
        return json.dumps([
            {"lo": format_rational(s.interval.lo), "hi": format_rational(s.interval.hi),
             "mass": format_rational(s.mass)}
            for s in self.segments
        ])

    @classmethod
    def from_json(cls, text: str) -> PiecewiseMeasure:
        rows = json.loads(text)
        return cls((Interval(Fraction(r["lo"]), Fraction(r["hi"])), Fraction(r["mass"])) for r in rows)


def prefix_value(m: PiecewiseMeasure, x: RationalLike) -> Fraction:
    """Return the value of ``[0, x]`` under ``m``."""
    x = as_rational(x)
    _check_unit(x, "x")
    k = bisect_right(m._los, x) - 1
    if k < 0:
        return ZERO
    seg = m.segments[k]
    if x >= seg.interval.hi:
        return m._cum[k + 1]
    return m._cum[k] + seg.mass * (x - seg.interval.lo) / seg.interval.length


def interval_value(m: PiecewiseMeasure, interval: Interval) -> Fraction:
    return prefix_value(m, interval.hi) - prefix_value(m, interval.lo)


def alpha_point(m: PiecewiseMeasure, alpha: RationalLike) -> Fraction:
    """Smallest ``x`` with ``prefix_value(m, x) == alpha``.

    On zero-density stretches the left end wins, so the answer is the infimum
    of all solutions.
    """
    alpha = as_rational(alpha)
    _check_unit(alpha, "alpha")
    if alpha == 0:
        return ZERO
    # first segment whose cumulative end reaches alpha; it must carry mass
    k = bisect_left(m._cum, alpha, 1) - 1
    seg = m.segments[k]
    before = m._cum[k]
    return seg.interval.lo + (alpha - before) / seg.mass * seg.interval.length
