from fractions import Fraction as F

import pytest

from rwcake.engine import (
    Allocation,
    Engine,
    Kind,
    Mode,
    ProtocolFault,
    Transcript,
    check_proportional,
    query_counts,
    replay,
)
from rwcake.valuation import Interval, PiecewiseMeasure, alpha_point

from conftest import random_measure


def uniform(n):
    return [PiecewiseMeasure.uniform() for _ in range(n)]


def test_cut_uniform():
    e = Engine(uniform(2))
    assert e.cut(1, F(1, 2)) == F(1, 2)
    assert query_counts(e.transcript) == (1, 0)


def test_empty_transcript_counts():
    assert query_counts(Transcript()) == (0, 0)


def test_eval_at_zero_and_at_cut():
    e = Engine(uniform(2))
    assert e.eval(1, 0) == 0
    x = e.cut(2, F(1, 3))
    assert e.eval(1, x) == F(1, 3)


def test_eval_unregistered_point_faults():
    e = Engine(uniform(2))
    with pytest.raises(ProtocolFault, match="earlier cut"):
        e.eval(1, F(1, 2))


def test_player_out_of_range_faults():
    e = Engine(uniform(2))
    with pytest.raises(ProtocolFault):
        e.cut(3, F(1, 2))
    with pytest.raises(ProtocolFault):
        e.cut(0, F(1, 2))


def test_single_player_whole_cake():
    e = Engine(uniform(1))
    e.assign(1, 0, 1)
    alloc = e.finalize()
    assert alloc.piece(1) == Interval(0, 1)
    assert check_proportional(alloc, uniform(1)).passed


def test_ws_mode_rejects_second_assignment():
    e = Engine(uniform(2), Mode.WOEGINGER_SGALL)
    x = e.cut(1, F(1, 2))
    e.assign(1, 0, x)
    with pytest.raises(ProtocolFault, match="already"):
        e.assign(1, x, 1)


def test_unrestricted_mode_allows_two_pieces():
    e = Engine(uniform(2), Mode.UNRESTRICTED)
    x = e.cut(1, F(1, 4))
    y = e.cut(1, F(3, 4))
    e.assign(1, 0, x)
    e.assign(1, y, 1)
    e.assign(2, x, y)
    alloc = e.finalize()
    assert check_proportional(alloc, uniform(2)).values == {1: F(1, 2), 2: F(1, 2)}


def test_assign_validation():
    e = Engine(uniform(2))
    x = e.cut(1, F(1, 2))
    with pytest.raises(ProtocolFault, match="order"):
        e.assign(1, x, 0)
    with pytest.raises(ProtocolFault, match="earlier cut"):
        e.assign(1, 0, F(1, 3))


@pytest.mark.parametrize("pieces, message", [
    ({1: (0, F(1, 2))}, "missing"),
    ({1: (0, F(1, 2)), 2: (F(1, 4), 1)}, "overlap"),
    ({1: (0, F(1, 4)), 2: (F(1, 2), 1)}, "gap"),
    ({1: (0, F(1, 4)), 2: (F(1, 4), F(1, 2))}, "gap"),
])
def test_finalize_partition_faults(pieces, message):
    e = Engine(uniform(2))
    for q in (F(1, 4), F(1, 2)):
        e.cut(1, q)
    for p, (a, b) in pieces.items():
        e.assign(p, a, b)
    with pytest.raises(ProtocolFault, match=message):
        e.finalize()


def test_check_proportional_pass_and_fail():
    good = Allocation({1: (Interval(0, F(1, 2)),), 2: (Interval(F(1, 2), 1),)})
    report = check_proportional(good, uniform(2))
    assert report.passed and report.values == {1: F(1, 2), 2: F(1, 2)}
    bad = Allocation({1: (Interval(0, F(1, 4)),), 2: (Interval(F(1, 4), 1),)})
    report = check_proportional(bad, uniform(2))
    assert not report.passed
    assert report.verdicts == {1: False, 2: True}


def test_cut_answers_match_alpha_point(rng):
    measures = [random_measure(rng) for _ in range(4)]
    e = Engine(measures, Mode.UNRESTRICTED)
    for _ in range(40):
        p = rng.randint(1, 4)
        a = F(rng.randint(0, 60), 60)
        assert e.cut(p, a) == alpha_point(measures[p - 1], a)


def test_transcript_jsonl_round_trip_and_replay(rng):
    measures = [random_measure(rng) for _ in range(3)]
    e = Engine(measures)
    xs = [e.cut(p, F(p, 4)) for p in (1, 2, 3)]
    for p in (1, 2, 3):
        e.eval(p, xs[0])
    text = e.transcript.to_jsonl()
    back = Transcript.from_jsonl(text)
    assert back.records == e.transcript.records
    assert (back.cuts, back.evals, back.assigns) == (3, 3, 0)
    fresh = replay(back, measures)
    assert fresh.transcript.records == e.transcript.records


def test_replay_detects_tampering():
    e = Engine(uniform(2))
    e.cut(1, F(1, 2))
    text = e.transcript.to_jsonl().replace('"answer": "1/2"', '"answer": "1/3"')
    with pytest.raises(ProtocolFault, match="mismatch"):
        replay(Transcript.from_jsonl(text), uniform(2))


def test_records_carry_kind_and_answer():
    e = Engine(uniform(2))
    x = e.cut(1, F(1, 2))
    e.eval(2, x)
    e.assign(1, 0, x)
    kinds = [r.kind for r in e.transcript]
    assert kinds == [Kind.CUT, Kind.EVAL, Kind.ASSIGN]
    assert e.transcript.records[-1].answer is None
