"""Hard instance family for proportional cake cutting and its lazy adversary.

Chunk ``i`` holds the grid points ``X_i = {i/(n+1) + k*eps : k = 1..n}``.
Every player's ``i/n``-point is one of these, and no two players share a
point within a chunk, so an instance is a string of ``n`` permutations
(:class:`ChunkString`).  Slots are 1-based positions inside a chunk.

The J-subfamily fixes a hidden permutation ``pi``: in chunk ``i`` the player
with ``pi(p) == i`` sits on slot ``i``, players with ``pi(p) < i`` fill slots
``1..i-1`` and the rest fill ``i+1..n``.  Distribution D is uniform on it.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .engine import Allocation, Engine, Mode, ProtocolFault, Referee, validate_partition
from .valuation import (
    Interval,
    PiecewiseMeasure,
    RationalLike,
    as_rational,
    format_rational,
)

ENUMERATION_LIMIT = 5


def default_epsilon(n: int) -> Fraction:
    return Fraction(1, 2 * n**4)


def family_epsilon(engine, n: int, epsilon: Optional[RationalLike] = None) -> Fraction:
    """Grid spacing a strategy should assume: explicit, else the referee's, else the default."""
    if epsilon is not None:
        return as_rational(epsilon)
    known = getattr(engine, "epsilon", None)
    return default_epsilon(n) if known is None else known


def _check_epsilon(n: int, epsilon: Fraction) -> None:
    if not 0 < epsilon < Fraction(1, n**4):
        raise ValueError(f"epsilon must lie in (0, 1/n^4), got {epsilon}")


def grid_point(n: int, epsilon: RationalLike, i: int, k: int) -> Fraction:
    epsilon = as_rational(epsilon)
    _check_epsilon(n, epsilon)
    if not (1 <= i <= n and 1 <= k <= n):
        raise ValueError(f"grid indices (i={i}, k={k}) out of range 1..{n}")
    return Fraction(i, n + 1) + k * epsilon


def locate_grid_point(n: int, epsilon: Fraction, x: Fraction) -> Optional[tuple[int, int]]:
    """Inverse of :func:`grid_point`: ``(i, k)`` or ``None`` off the grid."""
    top = math.floor(x * (n + 1))
    # with n = 1 the spacing may push the point onto the next multiple of 1/(n+1)
    for i in (top, top - 1):
        if not 1 <= i <= n:
            continue
        k = (x - Fraction(i, n + 1)) / epsilon
        if k.denominator == 1 and 1 <= k <= n:
            return i, int(k)
    return None


def relation(pi_p: int, i: int) -> int:
    """-1, 0 or +1 as ``pi(p)`` is below, equal to or above chunk ``i``."""
    return (pi_p > i) - (pi_p < i)


def region(n: int, i: int, rel: int) -> range:
    """Slots of chunk ``i`` available to a player in relation ``rel``."""
    if rel < 0:
        return range(1, i)
    if rel == 0:
        return range(i, i + 1)
    return range(i + 1, n + 1)


def slot_relation(i: int, slot: int) -> int:
    return (slot > i) - (slot < i)


@dataclass(frozen=True)
class ChunkString:
    """``chunks[i-1][k-1]`` is the player on slot ``k`` of chunk ``i``."""

    n: int
    chunks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        chunks = tuple(tuple(c) for c in self.chunks)
        object.__setattr__(self, "chunks", chunks)
        if len(chunks) != self.n:
            raise ValueError(f"need {self.n} chunks, got {len(chunks)}")
        players = list(range(1, self.n + 1))
        for c in chunks:
            if sorted(c) != players:
                raise ValueError(f"chunk {c} is not a permutation of 1..{self.n}")

    def flat(self) -> tuple[int, ...]:
        return tuple(itertools.chain.from_iterable(self.chunks))


@dataclass(frozen=True)
class WSInstance:
    n: int
    epsilon: Fraction
    chunks: ChunkString

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_rational(self.epsilon))
        _check_epsilon(self.n, self.epsilon)
        if not isinstance(self.chunks, ChunkString):
            object.__setattr__(self, "chunks", ChunkString(self.n, self.chunks))
        if self.chunks.n != self.n:
            raise ValueError("chunk string size does not match n")

    def slot(self, player: int, i: int) -> int:
        return self.chunks.chunks[i - 1].index(player) + 1

    def point(self, player: int, i: int) -> Fraction:
        """The player's ``i/n``-point."""
        return grid_point(self.n, self.epsilon, i, self.slot(player, i))

    @property
    def points(self) -> dict[tuple[int, int], Fraction]:
        return {(p, i): self.point(p, i) for p in range(1, self.n + 1) for i in range(1, self.n + 1)}

    def with_epsilon(self, epsilon: RationalLike) -> WSInstance:
        return WSInstance(self.n, as_rational(epsilon), self.chunks)

    def measures(self) -> list[PiecewiseMeasure]:
        return [build_measure(self, p) for p in range(1, self.n + 1)]


@dataclass(frozen=True)
class JInstance:
    base: WSInstance
    pi: tuple[int, ...]

    def __post_init__(self):
        n = self.base.n
        pi = tuple(self.pi)
        object.__setattr__(self, "pi", pi)
        if sorted(pi) != list(range(1, n + 1)):
            raise ValueError(f"pi {pi} is not a permutation of 1..{n}")
        for i in range(1, n + 1):
            for p in range(1, n + 1):
                if self.base.slot(p, i) not in region(n, i, relation(pi[p - 1], i)):
                    raise ValueError(f"player {p} misplaced in chunk {i} for pi={pi}")

    @property
    def n(self) -> int:
        return self.base.n

    def pi_inverse(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for p, v in enumerate(self.pi, start=1):
            inv[v - 1] = p
        return tuple(inv)

    def measures(self) -> list[PiecewiseMeasure]:
        return self.base.measures()

    def engine(self, mode: Mode = Mode.WOEGINGER_SGALL) -> Engine:
        """A referee over this instance's measures that publishes the grid spacing."""
        return Engine(self.measures(), mode, self.base.epsilon)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "epsilon": format_rational(self.base.epsilon),
            "pi": list(self.pi),
            "chunks": [list(c) for c in self.base.chunks.chunks],
        })

    @classmethod
    def from_json(cls, text: str) -> JInstance:
        d = json.loads(text)
        n = int(d["n"])
        base = WSInstance(n, Fraction(d["epsilon"]), ChunkString(n, tuple(tuple(c) for c in d["chunks"])))
        return cls(base, tuple(d["pi"]))


def build_measure(inst: WSInstance, player: int) -> PiecewiseMeasure:
    """The player's valuation: mass packed into width-eps windows around its grid points.

    Around the ``i/n``-point ``x`` sits mass ``i/(n^2+n)`` on ``[x - eps/2, x]``
    and ``(n-i)/(n^2+n)`` on ``[x, x + eps/2]``.  Those windows only carry
    ``n/(n+1)`` in total, so the remaining ``1/(n+1)`` is spread uniformly on
    ``[0, 1/(n+1)]``, left of every window; this keeps each ``i/n``-point
    exactly where the grid says.
    """
    n, eps = inst.n, inst.epsilon
    half = eps / 2
    denom = n * n + n
    segs = [(Interval(Fraction(0), Fraction(1, n + 1)), Fraction(1, n + 1))]
    for i in range(1, n + 1):
        x = inst.point(player, i)
        segs.append((Interval(x - half, x), Fraction(i, denom)))
        if i < n:
            segs.append((Interval(x, x + half), Fraction(n - i, denom)))
    for (a, _), (b, _) in zip(segs, segs[1:]):
        assert a.hi <= b.lo, "windows of one player overlap"
    return PiecewiseMeasure(segs)


def uniform_instance_measures(n: int) -> list[PiecewiseMeasure]:
    return [PiecewiseMeasure.uniform() for _ in range(n)]


# -- distribution D --------------------------------------------------------


def random_permutation(n: int, rng: random.Random) -> tuple[int, ...]:
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    return tuple(perm)


def sample_J(n: int, rng: random.Random, epsilon: Optional[RationalLike] = None) -> JInstance:
    """Draw one J-instance from D: a uniform ``pi``, then uniform fillings of every chunk."""
    if n < 1:
        raise ValueError("n must be positive")
    eps = default_epsilon(n) if epsilon is None else as_rational(epsilon)
    pi = random_permutation(n, rng)
    by_rank = {v: p for p, v in enumerate(pi, start=1)}
    chunks = []
    for i in range(1, n + 1):
        low = [by_rank[v] for v in range(1, i)]
        high = [by_rank[v] for v in range(i + 1, n + 1)]
        rng.shuffle(low)
        rng.shuffle(high)
        chunks.append(tuple(low) + (by_rank[i],) + tuple(high))
    return JInstance(WSInstance(n, eps, ChunkString(n, tuple(chunks))), pi)


def count_J(n: int) -> int:
    """``|J| = n! * prod_i (i-1)! (n-i)!``."""
    return math.factorial(n) * math.prod(math.factorial(i - 1) * math.factorial(n - i) for i in range(1, n + 1))


def _chunk_fillings(n: int, i: int, pi: Sequence[int], fixed: Mapping[int, int]) -> list[tuple[int, ...]]:
    """Every chunk-``i`` arrangement consistent with ``pi`` and the fixed ``player -> slot`` map."""
    by_rank = {v: p for p, v in enumerate(pi, start=1)}
    low = [by_rank[v] for v in range(1, i)]
    high = [by_rank[v] for v in range(i + 1, n + 1)]

    def fill(players, slots):
        taken = {fixed[p]: p for p in players if p in fixed}
        if any(s not in slots for s in taken):
            return []
        free_players = [p for p in players if p not in fixed]
        free_slots = [s for s in slots if s not in taken]
        out = []
        for perm in itertools.permutations(free_players):
            row = dict(taken)
            row.update(zip(free_slots, perm))
            out.append(tuple(row[s] for s in slots))
        return out

    me = by_rank[i]
    if me in fixed and fixed[me] != i:
        return []
    lows = fill(low, list(range(1, i)))
    highs = fill(high, list(range(i + 1, n + 1)))
    return [lo + (me,) + hi for lo in lows for hi in highs]


def completions(n: int, pi: Sequence[int], placed: Mapping[tuple[int, int], int],
                epsilon: Optional[RationalLike] = None) -> Iterator[JInstance]:
    """All J-instances with hidden permutation ``pi`` agreeing with ``placed[(p, i)] = slot``."""
    eps = default_epsilon(n) if epsilon is None else as_rational(epsilon)
    per_chunk = []
    for i in range(1, n + 1):
        fixed = {p: s for (p, j), s in placed.items() if j == i}
        per_chunk.append(_chunk_fillings(n, i, pi, fixed))
    for chunks in itertools.product(*per_chunk):
        yield JInstance(WSInstance(n, eps, ChunkString(n, chunks)), tuple(pi))


def count_completions(n: int, pi: Sequence[int], placed: Mapping[tuple[int, int], int]) -> int:
    """Number of :func:`completions`, computed without listing them."""
    total = 1
    for i in range(1, n + 1):
        used = {-1: 0, 0: 0, 1: 0}
        for (p, j), s in placed.items():
            if j != i:
                continue
            rel = relation(pi[p - 1], i)
            if slot_relation(i, s) != rel:
                return 0
            used[rel] += 1
        slots_in_chunk = [s for (p, j), s in placed.items() if j == i]
        if len(set(slots_in_chunk)) != len(slots_in_chunk):
            return 0
        total *= math.factorial(i - 1 - used[-1]) * math.factorial(n - i - used[1])
    return total


def enumerate_J(n: int, limit: int = ENUMERATION_LIMIT,
                epsilon: Optional[RationalLike] = None) -> Iterator[JInstance]:
    """Every J-instance exactly once (lazily).  Refuses ``n > limit``."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > limit:
        raise ValueError(f"enumeration refused for n={n} > {limit}: {count_J(n)} instances")
    for pi in itertools.permutations(range(1, n + 1)):
        yield from completions(n, pi, {}, epsilon)


# -- lazy adversary --------------------------------------------------------


@dataclass
class AdversaryState:
    """Online placement state.  ``pi`` is drawn once, points are placed on demand."""

    n: int
    epsilon: Fraction
    pi: tuple[int, ...]
    placed: dict[tuple[int, int], int] = field(default_factory=dict)
    occupied: dict[int, set[int]] = field(default_factory=dict)
    rng: Optional[random.Random] = None

    @classmethod
    def start(cls, n: int, rng: random.Random, epsilon: Optional[RationalLike] = None) -> AdversaryState:
        eps = default_epsilon(n) if epsilon is None else as_rational(epsilon)
        _check_epsilon(n, eps)
        return cls(n, eps, random_permutation(n, rng), rng=rng)

    def copy(self) -> AdversaryState:
        return AdversaryState(self.n, self.epsilon, self.pi, dict(self.placed),
                              {i: set(s) for i, s in self.occupied.items()}, self.rng)

    def valid_slots(self, player: int, i: int) -> list[int]:
        """Free slots of chunk ``i`` that ``player`` may still take."""
        taken = self.occupied.get(i, set())
        return [s for s in region(self.n, i, relation(self.pi[player - 1], i)) if s not in taken]

    def place(self, player: int, i: int, slot: int) -> None:
        if (player, i) in self.placed:
            raise ValueError(f"({player}, {i}) already placed")
        if slot not in self.valid_slots(player, i):
            raise ValueError(f"slot {slot} invalid for player {player} in chunk {i}")
        self.placed[(player, i)] = slot
        self.occupied.setdefault(i, set()).add(slot)

    def point(self, player: int, i: int) -> Fraction:
        return grid_point(self.n, self.epsilon, i, self.placed[(player, i)])


def adversary_cut(state: AdversaryState, player: int, i: int) -> Fraction:
    """Answer ``Cut(player, i/n)``, placing the point uniformly if it is new."""
    if not (1 <= player <= state.n and 1 <= i <= state.n):
        raise ValueError(f"cut ({player}, {i}/{state.n}) out of range")
    if (player, i) not in state.placed:
        state.place(player, i, state.rng.choice(state.valid_slots(player, i)))
    return state.point(player, i)


def adversary_finalize(state: AdversaryState) -> JInstance:
    """Place every remaining point uniformly and return the completed instance."""
    n = state.n
    for i in range(1, n + 1):
        for p in range(1, n + 1):
            if (p, i) not in state.placed:
                state.place(p, i, state.rng.choice(state.valid_slots(p, i)))
    chunks = []
    for i in range(1, n + 1):
        row = sorted((state.placed[(p, i)], p) for p in range(1, n + 1))
        chunks.append(tuple(p for _, p in row))
    return JInstance(WSInstance(n, state.epsilon, ChunkString(n, tuple(chunks))), state.pi)


def instance_distribution(n: int, query_order: Sequence[tuple[int, int]],
                          epsilon: Optional[RationalLike] = None) -> dict[JInstance, Fraction]:
    """Exact output law of the adversary for a fixed sequence of ``(player, chunk)`` cuts.

    Multiplies the adversary's own conditional slot probabilities along every
    branch: first the ``pi`` draw, then each cut, then the finishing placements.
    """
    eps = default_epsilon(n) if epsilon is None else as_rational(epsilon)
    tail = [(p, i) for i in range(1, n + 1) for p in range(1, n + 1)]
    steps = list(query_order) + tail
    out: dict[JInstance, Fraction] = {}

    def walk(state: AdversaryState, k: int, prob: Fraction) -> None:
        while k < len(steps) and steps[k] in state.placed:
            k += 1
        if k == len(steps):
            inst = adversary_finalize(state)
            out[inst] = out.get(inst, Fraction(0)) + prob
            return
        p, i = steps[k]
        options = state.valid_slots(p, i)
        for s in options:
            child = state.copy()
            child.place(p, i, s)
            walk(child, k + 1, prob / len(options))

    start = Fraction(1, math.factorial(n))
    for pi in itertools.permutations(range(1, n + 1)):
        walk(AdversaryState(n, eps, pi), 0, start)
    return out


class AdversaryReferee(Referee):
    """Referee that answers primitive cuts through the lazy adversary.

    Only cuts-only primitive protocols can be served: evals and cuts at any
    ``alpha`` other than ``i/n`` are refused.
    """

    def __init__(self, state: AdversaryState):
        super().__init__(state.n, epsilon=state.epsilon)
        self.state = state

    def _answer_cut(self, player, alpha):
        i = alpha * self.n
        if i.denominator != 1 or not 1 <= i <= self.n:
            raise ProtocolFault(f"non-primitive cut at alpha={alpha}")
        return adversary_cut(self.state, player, int(i))

    def _answer_eval(self, player, x):
        raise ProtocolFault("the adversary serves cuts-only protocols")


# -- eval elimination and the fairness certificate -------------------------

Protocol = Callable[[Referee], None]


class _CutsOnlyProxy:
    """Hands the wrapped protocol a referee whose evals are simulated by cuts."""

    def __init__(self, engine: Referee, epsilon: Fraction):
        self._engine = engine
        self.epsilon = epsilon
        self.n = engine.n

    def cut(self, player, alpha):
        alpha = as_rational(alpha)
        i = alpha * self.n
        if i.denominator != 1 or not 1 <= i <= self.n:
            raise ProtocolFault(f"wrapped protocol is not primitive: cut at alpha={alpha}")
        return self._engine.cut(player, alpha)

    def eval(self, player, x):
        x = as_rational(x)
        if not self._engine.is_registered(x):
            raise ProtocolFault(f"{x} is not 0, 1 or the answer of an earlier cut")
        where = locate_grid_point(self.n, self.epsilon, x)
        if where is None:
            raise ProtocolFault(f"wrapped protocol is not primitive: eval at {x}")
        i, _ = where
        n = self.n
        y = self._engine.cut(player, Fraction(i, n))
        if y < x:
            return Fraction(i, n) + Fraction(n - i, n * n + n)
        if y == x:
            return Fraction(i, n)
        return Fraction(i, n + 1)

    def assign(self, player, xi, xj):
        self._engine.assign(player, xi, xj)

    def is_registered(self, x):
        return self._engine.is_registered(x)


def transform_eval_to_cut(protocol: Callable, epsilon: Optional[RationalLike] = None) -> Callable:
    """Wrap a primitive protocol so that it never issues an eval.

    Each ``Eval(p, x)`` with ``x`` in chunk ``i`` becomes ``Cut(p, i/n)``; the
    eval answer follows from where ``p``'s point lands relative to ``x``.  The
    simulation is exact on the hard instance family only.
    """

    def cuts_only(engine: Referee, n: int, **kwargs) -> None:
        protocol(_CutsOnlyProxy(engine, family_epsilon(engine, n, epsilon)), n, **kwargs)

    cuts_only.__name__ = f"{getattr(protocol, '__name__', 'protocol')}_cuts_only"
    cuts_only.wrapped = protocol
    return cuts_only


def check_phi_equals_pi_inverse(alloc: Allocation, inst: JInstance) -> bool:
    """True iff the ``k``-th piece from the left belongs to ``pi^{-1}(k)`` for all ``k``.

    Pieces are taken in order including empty ones; the allocation must tile
    ``[0, 1)`` with exactly one piece per player.
    """
    n = inst.n
    validate_partition(alloc, n)
    pieces = []
    for p, ivs in alloc.pieces.items():
        if len(ivs) != 1:
            raise ValueError(f"player {p} holds {len(ivs)} pieces")
        pieces.append((ivs[0].lo, ivs[0].hi, p))
    pieces.sort()
    owners = tuple(p for _, _, p in pieces)
    return owners == inst.pi_inverse()
