"""Proportional division protocols written purely in terms of referee queries.

A protocol is a callable ``protocol(engine, n)`` that issues cuts, evals and
assignments on ``engine`` and returns nothing; the referee holds the result.
All protocols hand out one connected piece per player.

``cut_and_choose``, ``last_diminisher`` and ``even_paz`` work on any
measures.  The remaining strategies are primitive protocols tailored to the
hard instance family (they cut only at ``i/n`` and read the grid), used for
the exact decision-tree analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .adversary import default_epsilon, family_epsilon, locate_grid_point, transform_eval_to_cut
from .engine import Allocation, Kind, ProtocolFault, Referee, Transcript
from .valuation import ONE, ZERO, RationalLike, as_rational


def _prefix(engine: Referee, player: int, x: Fraction) -> Fraction:
    # prefix values at the cake ends are known without asking
    if x == ZERO:
        return ZERO
    if x == ONE:
        return ONE
    return engine.eval(player, x)


def cut_and_choose(engine: Referee, n: int = 2) -> None:
    if n != 2:
        raise ValueError("cut and choose needs exactly two players")
    x = engine.cut(1, Fraction(1, 2))
    if engine.eval(2, x) <= Fraction(1, 2):
        engine.assign(1, ZERO, x)
        engine.assign(2, x, ONE)
    else:
        engine.assign(2, ZERO, x)
        engine.assign(1, x, ONE)


def last_diminisher(engine: Referee, n: int) -> None:
    """Each round every remaining player marks a 1/n share of the remainder's left end.

    The smallest mark (lowest index on ties) takes that share.  Total cuts are
    ``n + (n-1) + ... + 2``.
    """
    share = Fraction(1, n)
    left = ZERO
    remaining = list(range(1, n + 1))
    while len(remaining) > 1:
        marks = []
        for p in remaining:
            marks.append((engine.cut(p, _prefix(engine, p, left) + share), p))
        mark, winner = min(marks)
        engine.assign(winner, left, mark)
        remaining.remove(winner)
        left = mark
    engine.assign(remaining[0], left, ONE)


def even_paz(engine: Referee, n: int) -> None:
    """Divide and conquer: halve the player set at the median mark and recurse.

    On subcake ``[a, b)`` with players ``S`` each player marks the point worth
    ``ceil(|S|/2)/|S|`` of its value of the subcake; the ``ceil(|S|/2)``
    leftmost marks go left of the median mark.
    """

    def divide(a: Fraction, b: Fraction, players: list[int]) -> None:
        if len(players) == 1:
            engine.assign(players[0], a, b)
            return
        size = len(players)
        k = -(-size // 2)
        marks = []
        for p in players:
            va = _prefix(engine, p, a)
            vb = _prefix(engine, p, b)
            marks.append((engine.cut(p, va + k * (vb - va) / size), p))
        marks.sort()
        median = marks[k - 1][0]
        divide(a, median, sorted(p for _, p in marks[:k]))
        divide(median, b, sorted(p for _, p in marks[k:]))

    divide(ZERO, ONE, list(range(1, n + 1)))


# -- primitive strategies for the hard family ------------------------------


def eval_tournament(engine: Referee, n: int) -> None:
    """Primitive protocol that finds each chunk's slot holder by pairwise evals.

    For chunk ``i`` (in order) the still-unserved players are exactly those
    with ``pi(p) >= i``; the one with ``pi(p) == i`` has the leftmost
    ``i/n``-point.  A running champion is compared with each challenger by
    ``Eval(challenger, champion_point)``; a challenger whose value exceeds
    ``i/n`` lies to the left and is cut to become champion.
    """
    remaining = list(range(1, n + 1))
    left = ZERO
    for i in range(1, n):
        alpha = Fraction(i, n)
        champ = remaining[0]
        x = engine.cut(champ, alpha)
        for q in remaining[1:]:
            if engine.eval(q, x) > alpha:
                champ = q
                x = engine.cut(q, alpha)
        engine.assign(champ, left, x)
        remaining.remove(champ)
        left = x
    engine.assign(remaining[0], left, ONE)


def leftmost_scan(engine: Referee, n: int) -> None:
    """Cuts-only primitive: cut every unserved player at ``i/n`` and serve the leftmost."""
    remaining = list(range(1, n + 1))
    left = ZERO
    for i in range(1, n):
        alpha = Fraction(i, n)
        x, champ = min((engine.cut(p, alpha), p) for p in remaining)
        engine.assign(champ, left, x)
        remaining.remove(champ)
        left = x
    engine.assign(remaining[0], left, ONE)


def sequential_scan(engine: Referee, n: int, epsilon: Optional[RationalLike] = None) -> None:
    """Cuts-only primitive that stops as soon as slot ``i`` of chunk ``i`` is found.

    Knows the grid (spacing from the referee unless given), so one cut tells
    whether the player sits on slot ``i``.  In the final contested chunk (two
    candidates) one cut always suffices: if the first candidate is on slot
    ``n`` its point is a safe boundary and the other candidate takes the
    piece to its left.
    """
    eps = family_epsilon(engine, n, epsilon)
    remaining = list(range(1, n + 1))
    left = ZERO
    for i in range(1, n):
        alpha = Fraction(i, n)
        if len(remaining) == 2:
            first, second = remaining
            x = engine.cut(first, alpha)
            if locate_grid_point(n, eps, x) == (i, i):
                engine.assign(first, left, x)
                engine.assign(second, x, ONE)
            else:
                engine.assign(second, left, x)
                engine.assign(first, x, ONE)
            return
        for p in remaining[:-1]:
            x = engine.cut(p, alpha)
            if locate_grid_point(n, eps, x) == (i, i):
                champ = p
                break
        else:
            champ = remaining[-1]
            x = engine.cut(champ, alpha)
        engine.assign(champ, left, x)
        remaining.remove(champ)
        left = x
    engine.assign(remaining[0], left, ONE)


tournament_cuts_only = transform_eval_to_cut(eval_tournament)


# -- registry and runner ---------------------------------------------------


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    strategy: Callable[..., None]
    supported_n: Callable[[int], bool] = lambda n: n >= 1
    # True when the protocol only cuts at i/n and never evals
    cuts_only_primitive: bool = False


PROTOCOLS: dict[str, ProtocolSpec] = {
    "cutchoose": ProtocolSpec("cutchoose", cut_and_choose, lambda n: n == 2),
    "lastdim": ProtocolSpec("lastdim", last_diminisher),
    "evenpaz": ProtocolSpec("evenpaz", even_paz),
    "tournament": ProtocolSpec("tournament", eval_tournament),
}

STRATEGIES: dict[str, ProtocolSpec] = {
    "scan": ProtocolSpec("scan", sequential_scan, cuts_only_primitive=True),
    "leftmost": ProtocolSpec("leftmost", leftmost_scan, cuts_only_primitive=True),
    "tournament-cuts": ProtocolSpec("tournament-cuts", tournament_cuts_only, cuts_only_primitive=True),
}


def get_protocol(name: str) -> ProtocolSpec:
    try:
        return PROTOCOLS[name] if name in PROTOCOLS else STRATEGIES[name]
    except KeyError:
        known = ", ".join(sorted({**PROTOCOLS, **STRATEGIES}))
        raise ValueError(f"unknown protocol {name!r}; known: {known}") from None


def run_protocol(spec: ProtocolSpec, engine: Referee, n: Optional[int] = None) -> tuple[Allocation, Transcript]:
    n = engine.n if n is None else n
    if n != engine.n:
        raise ValueError(f"engine has {engine.n} players, protocol asked for {n}")
    if not spec.supported_n(n):
        raise ValueError(f"{spec.name} does not support n={n}")
    try:
        spec.strategy(engine, n)
        alloc = engine.finalize()
    except ProtocolFault as exc:
        raise ProtocolFault(f"{spec.name} (n={n}): {exc}") from exc
    return alloc, engine.transcript


def is_primitive(transcript: Transcript, n: int, epsilon: Optional[RationalLike] = None) -> bool:
    """Cuts only at ``i/n`` for ``i`` in ``1..n``; evals only at grid points."""
    eps = default_epsilon(n) if epsilon is None else as_rational(epsilon)
    for rec in transcript:
        if rec.kind is Kind.CUT:
            i = rec.args[0] * n
            if i.denominator != 1 or not 1 <= i <= n:
                return False
        elif rec.kind is Kind.EVAL:
            if locate_grid_point(n, eps, rec.args[0]) is None:
                return False
    return True


def even_paz_cut_bound(n: int) -> int:
    """Cuts made by :func:`even_paz`: ``C(n) = n + C(ceil(n/2)) + C(floor(n/2))``."""
    if n <= 1:
        return 0
    k = math.ceil(n / 2)
    return n + even_paz_cut_bound(k) + even_paz_cut_bound(n - k)
