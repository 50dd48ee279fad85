"""Exact piecewise-constant valuations and Robertson-Webb answers.

A valuation is a list of (interval, mass) segments.  Cut queries return the
leftmost point reaching a value; Eval queries return the value of a prefix.
"""

from fractions import Fraction as F

from rwcake import Interval, PiecewiseMeasure, alpha_point, interval_value, prefix_value

# A player who only cares about the two ends of the cake.
ends = PiecewiseMeasure([
    (Interval(0, F(1, 4)), F(1, 2)),
    (Interval(F(3, 4), 1), F(1, 2)),
])

print("value of [0, 1/8]:       ", prefix_value(ends, F(1, 8)))
print("value of the middle half:", interval_value(ends, Interval(F(1, 4), F(3, 4))))

# Half the value is reached anywhere on [1/4, 3/4]; Cut answers the leftmost such point.
print("1/2-point:               ", alpha_point(ends, F(1, 2)))
print("3/4-point:               ", alpha_point(ends, F(3, 4)))

# Everything stays rational; JSON keeps numbers as "p/q" strings.
print(ends.to_json())
assert PiecewiseMeasure.from_json(ends.to_json()) == ends
