"""Robertson-Webb query referee.

A :class:`Referee` owns the transcript, the set of legal reference points and
the assignments made so far.  Subclasses decide how cut and eval queries are
answered: :class:`Engine` answers from hidden measures, other referees answer
from an adversary or from a scripted tree traversal.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .valuation import (
    ONE,
    ZERO,
    Interval,
    PiecewiseMeasure,
    RationalLike,
    alpha_point,
    as_rational,
    format_rational,
    interval_value,
    prefix_value,
)


class ProtocolFault(Exception):
    """An illegal query or assignment; aborts the run."""


class Mode(enum.Enum):
    UNRESTRICTED = "unrestricted"
    WOEGINGER_SGALL = "woeginger-sgall"


class Kind(str, enum.Enum):
    CUT = "cut"
    EVAL = "eval"
    ASSIGN = "assign"


@dataclass(frozen=True)
class QueryRecord:
    kind: Kind
    player: int
    args: tuple[Fraction, ...]
    answer: Optional[Fraction] = None

    def to_dict(self) -> dict:
        row = {"kind": self.kind.value, "player": self.player,
               "args": [format_rational(a) for a in self.args]}
        if self.answer is not None:
            row["answer"] = format_rational(self.answer)
        return row

    @classmethod
    def from_dict(cls, row: dict) -> QueryRecord:
        answer = row.get("answer")
        return cls(Kind(row["kind"]), int(row["player"]),
                   tuple(Fraction(a) for a in row["args"]),
                   None if answer is None else Fraction(answer))


@dataclass
class Transcript:
    records: list[QueryRecord] = field(default_factory=list)
    cuts: int = 0
    evals: int = 0
    assigns: int = 0

    def append(self, record: QueryRecord) -> None:
        self.records.append(record)
        if record.kind is Kind.CUT:
            self.cuts += 1
        elif record.kind is Kind.EVAL:
            self.evals += 1
        else:
            self.assigns += 1

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict()) + "\n" for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str) -> Transcript:
        t = cls()
        for line in text.splitlines():
            if line.strip():
                t.append(QueryRecord.from_dict(json.loads(line)))
        return t


def query_counts(t: Transcript) -> tuple[int, int]:
    return t.cuts, t.evals


@dataclass
class Allocation:
    """Pieces per player, each read as the half-open interval ``[lo, hi)``."""

    pieces: dict[int, tuple[Interval, ...]]

    def piece(self, player: int) -> Interval:
        (only,) = self.pieces[player]
        return only

    def ordered(self) -> list[tuple[Interval, int]]:
        """All non-empty pieces left to right with their owners."""
        out = [(iv, p) for p, ivs in self.pieces.items() for iv in ivs if iv.length > 0]
        out.sort(key=lambda t: (t[0].lo, t[0].hi, t[1]))
        return out

    def to_dict(self) -> dict:
        return {str(p): [[format_rational(iv.lo), format_rational(iv.hi)] for iv in ivs]
                for p, ivs in sorted(self.pieces.items())}

    @classmethod
    def from_dict(cls, d: dict) -> Allocation:
        return cls({int(p): tuple(Interval(Fraction(a), Fraction(b)) for a, b in ivs)
                    for p, ivs in d.items()})


def validate_partition(alloc: Allocation, n: int) -> list[tuple[Interval, int]]:
    """Check that the pieces tile ``[0, 1)`` exactly; return them in order.

    Empty pieces are allowed (a player may be handed ``[x, x)``) but every
    positive-length piece must abut its neighbours.
    """
    if sorted(alloc.pieces) != list(range(1, n + 1)):
        missing = set(range(1, n + 1)) - set(alloc.pieces)
        raise ProtocolFault(f"missing assignment for players {sorted(missing)}")
    order = alloc.ordered()
    edge = ZERO
    for iv, p in order:
        if iv.lo < edge:
            raise ProtocolFault(f"piece of player {p} overlaps at {iv.lo}")
        if iv.lo > edge:
            raise ProtocolFault(f"coverage gap [{edge}, {iv.lo})")
        edge = iv.hi
    if edge != ONE:
        raise ProtocolFault(f"coverage gap [{edge}, 1)")
    return order


class Referee:
    """Shared bookkeeping for every query-answering backend."""

    def __init__(self, n: int, mode: Mode = Mode.WOEGINGER_SGALL, epsilon: Optional[Fraction] = None):
        if n < 1:
            raise ValueError("need at least one player")
        self.n = n
        self.mode = mode
        # grid spacing of the hard instance family, public when known
        self.epsilon = epsilon
        self.transcript = Transcript()
        self._registered: set[Fraction] = {ZERO, ONE}
        self._pieces: dict[int, list[Interval]] = {}

    # backends override these two
    def _answer_cut(self, player: int, alpha: Fraction) -> Fraction:
        raise NotImplementedError

    def _answer_eval(self, player: int, x: Fraction) -> Fraction:
        raise NotImplementedError

    def _check_player(self, player: int) -> None:
        if not (isinstance(player, int) and 1 <= player <= self.n):
            raise ProtocolFault(f"player {player!r} out of range 1..{self.n}")

    def _check_registered(self, x: Fraction) -> None:
        if x not in self._registered:
            raise ProtocolFault(f"{x} is not 0, 1 or the answer of an earlier cut")

    def is_registered(self, x: RationalLike) -> bool:
        return as_rational(x) in self._registered

    def cut(self, player: int, alpha: RationalLike) -> Fraction:
        self._check_player(player)
        alpha = as_rational(alpha)
        if not ZERO <= alpha <= ONE:
            raise ProtocolFault(f"alpha {alpha} outside [0, 1]")
        x = self._answer_cut(player, alpha)
        self.transcript.append(QueryRecord(Kind.CUT, player, (alpha,), x))
        self._registered.add(x)
        return x

    def eval(self, player: int, x: RationalLike) -> Fraction:
        self._check_player(player)
        x = as_rational(x)
        self._check_registered(x)
        v = self._answer_eval(player, x)
        self.transcript.append(QueryRecord(Kind.EVAL, player, (x,), v))
        return v

    def assign(self, player: int, xi: RationalLike, xj: RationalLike) -> None:
        self._check_player(player)
        xi, xj = as_rational(xi), as_rational(xj)
        self._check_registered(xi)
        self._check_registered(xj)
        if xi > xj:
            raise ProtocolFault(f"assign endpoints out of order: {xi} > {xj}")
        if self.mode is Mode.WOEGINGER_SGALL and player in self._pieces:
            raise ProtocolFault(f"player {player} already received a piece")
        self._pieces.setdefault(player, []).append(Interval(xi, xj))
        self.transcript.append(QueryRecord(Kind.ASSIGN, player, (xi, xj)))

    def finalize(self) -> Allocation:
        alloc = Allocation({p: tuple(ivs) for p, ivs in self._pieces.items()})
        if self.mode is Mode.WOEGINGER_SGALL:
            validate_partition(alloc, self.n)
        else:
            missing = set(range(1, self.n + 1)) - set(alloc.pieces)
            if missing:
                raise ProtocolFault(f"missing assignment for players {sorted(missing)}")
            edge = ZERO
            for iv, p in alloc.ordered():
                if iv.lo < edge:
                    raise ProtocolFault(f"piece of player {p} overlaps at {iv.lo}")
                edge = iv.hi
        return alloc


class Engine(Referee):
    """Referee backed by the players' hidden measures."""

    def __init__(self, measures: Sequence[PiecewiseMeasure], mode: Mode = Mode.WOEGINGER_SGALL,
                 epsilon: Optional[RationalLike] = None):
        super().__init__(len(measures), mode, None if epsilon is None else as_rational(epsilon))
        self.measures = list(measures)

    def _answer_cut(self, player, alpha):
        return alpha_point(self.measures[player - 1], alpha)

    def _answer_eval(self, player, x):
        return prefix_value(self.measures[player - 1], x)


@dataclass
class ProportionalityReport:
    values: dict[int, Fraction]
    n: int

    @property
    def verdicts(self) -> dict[int, bool]:
        share = Fraction(1, self.n)
        return {p: v >= share for p, v in self.values.items()}

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def __bool__(self):
        return self.passed


def check_proportional(alloc: Allocation, measures: Sequence[PiecewiseMeasure]) -> ProportionalityReport:
    n = len(measures)
    values = {}
    for p in range(1, n + 1):
        ivs = alloc.pieces.get(p, ())
        values[p] = sum((interval_value(measures[p - 1], iv) for iv in ivs), ZERO)
    return ProportionalityReport(values, n)


def replay(transcript: Iterable[QueryRecord], measures: Sequence[PiecewiseMeasure],
           mode: Mode = Mode.WOEGINGER_SGALL) -> Engine:
    """Re-issue every query against a fresh engine and insist on identical answers."""
    engine = Engine(measures, mode)
    for rec in transcript:
        if rec.kind is Kind.CUT:
            got = engine.cut(rec.player, rec.args[0])
        elif rec.kind is Kind.EVAL:
            got = engine.eval(rec.player, rec.args[0])
        else:
            engine.assign(rec.player, *rec.args)
            continue
        if got != rec.answer:
            raise ProtocolFault(f"replay mismatch on {rec.kind.value} by player {rec.player}: "
                                f"recorded {rec.answer}, got {got}")
    return engine
