import math
import random
from fractions import Fraction as F

import pytest

from rwcake.adversary import check_phi_equals_pi_inverse, enumerate_J, sample_J
from rwcake.engine import Engine, Kind, Mode, ProtocolFault, Transcript, check_proportional, query_counts
from rwcake.protocols import (
    PROTOCOLS,
    STRATEGIES,
    cut_and_choose,
    even_paz,
    even_paz_cut_bound,
    get_protocol,
    is_primitive,
    last_diminisher,
    run_protocol,
)
from rwcake.valuation import Interval, PiecewiseMeasure

from conftest import random_measure


def uniform(n):
    return [PiecewiseMeasure.uniform() for _ in range(n)]


def run(name, measures, mode=Mode.WOEGINGER_SGALL, epsilon=None):
    engine = Engine(measures, mode, epsilon)
    alloc, transcript = run_protocol(get_protocol(name), engine)
    return alloc, transcript


GENERAL = ["lastdim", "evenpaz"]


def test_cut_and_choose_uniform():
    alloc, t = run("cutchoose", uniform(2))
    assert check_proportional(alloc, uniform(2)).values == {1: F(1, 2), 2: F(1, 2)}
    assert query_counts(t) == (1, 1)


def test_cut_and_choose_left_heavy():
    m1 = PiecewiseMeasure([(Interval(0, F(1, 4)), 1)])
    measures = [m1, PiecewiseMeasure.uniform()]
    alloc, _ = run("cutchoose", measures)
    assert alloc.piece(1) == Interval(0, F(1, 8))
    assert check_proportional(alloc, measures).values[2] == F(7, 8)


def test_cut_and_choose_player_two_takes_left():
    m2 = PiecewiseMeasure([(Interval(0, F(1, 4)), 1)])
    measures = [PiecewiseMeasure.uniform(), m2]
    alloc, _ = run("cutchoose", measures)
    assert alloc.piece(2) == Interval(0, F(1, 2))
    assert check_proportional(alloc, measures).values == {1: F(1, 2), 2: F(1)}


def test_cut_and_choose_requires_two_players():
    with pytest.raises(ValueError):
        run("cutchoose", uniform(3))


@pytest.mark.parametrize("name", GENERAL)
def test_single_player_gets_everything(name):
    alloc, t = run(name, uniform(1))
    assert alloc.piece(1) == Interval(0, 1)
    assert query_counts(t) == (0, 0)


def test_even_paz_two_uniform_players():
    alloc, t = run("evenpaz", uniform(2))
    assert check_proportional(alloc, uniform(2)).values == {1: F(1, 2), 2: F(1, 2)}
    assert query_counts(t) == (2, 0)


def test_even_paz_four_uniform_players():
    # top level: 4 cuts, no evals at 0 and 1; each half: 2 cuts, 2 evals at the median
    alloc, t = run("evenpaz", uniform(4))
    assert query_counts(t) == (8, 4)
    order = alloc.ordered()
    assert [iv for iv, _ in order] == [Interval(F(k, 4), F(k + 1, 4)) for k in range(4)]


@pytest.mark.parametrize("n", range(1, 17))
def test_even_paz_cut_count(n):
    _, t = run("evenpaz", uniform(n))
    assert t.cuts == even_paz_cut_bound(n)
    if n > 1:
        assert t.cuts <= n * math.ceil(math.log2(n))
    if n & (n - 1) == 0 and n > 1:
        assert t.cuts == n * int(math.log2(n))


@pytest.mark.parametrize("n", range(2, 9))
def test_last_diminisher_cut_count(n):
    _, t = run("lastdim", uniform(n))
    assert t.cuts == sum(n - r + 1 for r in range(1, n))


def test_last_diminisher_five_players_exact():
    _, t = run("lastdim", uniform(5))
    assert t.cuts == 14


@pytest.mark.parametrize("name", GENERAL)
def test_proportional_on_random_measures(name, rng):
    for _ in range(40):
        n = rng.randint(1, 7)
        measures = [random_measure(rng) for _ in range(n)]
        alloc, _ = run(name, measures)
        assert check_proportional(alloc, measures).passed


@pytest.mark.parametrize("name", GENERAL)
def test_proportional_on_sampled_J_instances(name):
    rng = random.Random(99)
    for _ in range(100):
        inst = sample_J(8, rng)
        alloc, _ = run(name, inst.measures())
        assert check_proportional(alloc, inst.measures()).passed
        assert check_phi_equals_pi_inverse(alloc, inst)


def test_last_diminisher_n3_on_J():
    inst = sample_J(3, random.Random(4))
    alloc, _ = run("lastdim", inst.measures())
    assert check_proportional(alloc, inst.measures())


def test_cut_and_choose_on_J():
    for inst in enumerate_J(2):
        alloc, _ = run("cutchoose", inst.measures())
        assert check_proportional(alloc, inst.measures())


def test_even_paz_exhaustive_n3():
    for inst in enumerate_J(3):
        alloc, _ = run("evenpaz", inst.measures())
        assert check_proportional(alloc, inst.measures())
        assert check_phi_equals_pi_inverse(alloc, inst)


@pytest.mark.parametrize("name", sorted(STRATEGIES) + ["tournament"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_primitive_strategies_fair_on_every_instance(name, n):
    for inst in enumerate_J(n):
        alloc, t = run(name, inst.measures())
        assert check_proportional(alloc, inst.measures())
        assert check_phi_equals_pi_inverse(alloc, inst)
        assert is_primitive(t, n)


@pytest.mark.parametrize("name", GENERAL + ["cutchoose"])
def test_determinism(name, rng):
    n = 2 if name == "cutchoose" else 5
    measures = [random_measure(rng) for _ in range(n)]
    _, t1 = run(name, measures)
    _, t2 = run(name, measures)
    assert t1.records == t2.records


def test_epsilon_does_not_change_behaviour():
    rng = random.Random(17)
    for _ in range(20):
        inst = sample_J(6, rng)
        other = inst.base.with_epsilon(F(1, 3 * 6**4))
        for name in GENERAL + sorted(STRATEGIES):
            a1, t1 = run(name, inst.measures(), epsilon=inst.base.epsilon)
            a2, t2 = run(name, other.measures(), epsilon=other.epsilon)
            owners1 = [p for _, p in a1.ordered()]
            owners2 = [p for _, p in a2.ordered()]
            assert owners1 == owners2
            # cut levels and eval answers are coordinates-free
            shape1 = [(r.kind, r.player, r.args[0] if r.kind is Kind.CUT else r.answer)
                      for r in t1 if r.kind is not Kind.ASSIGN]
            shape2 = [(r.kind, r.player, r.args[0] if r.kind is Kind.CUT else r.answer)
                      for r in t2 if r.kind is not Kind.ASSIGN]
            assert shape1 == shape2


def test_is_primitive_examples():
    t = Engine(uniform(2))
    t.cut(1, F(1, 2))
    assert is_primitive(t.transcript, 2)
    t.cut(1, F(1, 3))
    assert not is_primitive(t.transcript, 2)
    assert is_primitive(Transcript(), 3)


def test_even_paz_primitivity_by_depth():
    inst = sample_J(4, random.Random(0))
    _, t = run("evenpaz", inst.measures())
    top = [r for r in t if r.kind is Kind.CUT][:4]
    assert all(r.args[0] == F(2, 4) for r in top)
    # below the top level the cut levels depend on boundary evals
    assert not is_primitive(t, 4)


def test_run_protocol_wraps_faults():
    def cheater(engine, n):
        engine.eval(1, F(1, 7))

    from rwcake.protocols import ProtocolSpec

    with pytest.raises(ProtocolFault, match="cheater"):
        run_protocol(ProtocolSpec("cheater", cheater), Engine(uniform(2)))


def test_unknown_protocol():
    with pytest.raises(ValueError, match="unknown"):
        get_protocol("moving-knife")


def test_registries_are_disjoint():
    assert not set(PROTOCOLS) & set(STRATEGIES)
    assert all(s.cuts_only_primitive for s in STRATEGIES.values())


def test_cut_and_choose_direct_call_rejects_n():
    with pytest.raises(ValueError):
        cut_and_choose(Engine(uniform(3)), 3)


@pytest.mark.parametrize("protocol", [even_paz, last_diminisher])
def test_unrestricted_mode_same_result(protocol, rng):
    measures = [random_measure(rng) for _ in range(4)]
    e1, e2 = Engine(measures), Engine(measures, Mode.UNRESTRICTED)
    protocol(e1, 4)
    protocol(e2, 4)
    assert e1.finalize() == e2.finalize()
