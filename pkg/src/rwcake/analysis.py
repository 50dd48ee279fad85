"""Exact expected-depth analysis of cuts-only primitive strategies under D.

The strategy is re-run from scratch at every tree node against a
:class:`ScriptedReferee` that knows the answers chosen so far; the first
unanswered cut marks the node's branching query.  Branch probabilities come
from the lazy adversary's conditional slot probabilities, averaged over the
permutations still consistent with the node.
"""

from __future__ import annotations

import itertools
import math
import random
import statistics
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .adversary import (
    AdversaryReferee,
    AdversaryState,
    adversary_finalize,
    check_phi_equals_pi_inverse,
    completions,
    count_completions,
    default_epsilon,
    grid_point,
)
from .engine import ProtocolFault, Referee, check_proportional
from .protocols import ProtocolSpec
from .valuation import RationalLike, as_rational

EXACT_LIMIT = 4

Perm = tuple[int, ...]


# -- bounds -----------------------------------------------------------------


def lower_bound(n: int, digits: int = 40) -> Decimal:
    """``log_3(n!) + 1`` as a decimal with ``digits`` significant digits."""
    if n < 1:
        raise ValueError("n must be positive")
    with localcontext() as ctx:
        ctx.prec = digits + 10
        value = Decimal(math.factorial(n)).ln() / Decimal(3).ln() + 1
        ctx.prec = digits
        return +value


def at_least_log3(value: Fraction, count: int) -> bool:
    """Exact test of ``value >= log_3(count)`` via ``3**p >= count**q``."""
    if count < 1:
        raise ValueError("count must be positive")
    value = Fraction(value)
    if value < 0:
        return False
    return 3 ** value.numerator >= count ** value.denominator


def log3(count: int, digits: int = 40) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = digits
        return Decimal(count).ln() / Decimal(3).ln()


# -- Jensen step ------------------------------------------------------------


def jensen_sum(a: RationalLike, b: RationalLike, c: RationalLike, digits: int = 50) -> Decimal:
    """``a log_3 a + b log_3 b + c log_3 c`` on the probability simplex, zero terms dropped."""
    terms = [as_rational(t) for t in (a, b, c)]
    if any(t < 0 for t in terms) or sum(terms) != 1:
        raise ValueError(f"{terms} is not a point of the simplex")
    with localcontext() as ctx:
        ctx.prec = digits
        ln3 = Decimal(3).ln()
        total = Decimal(0)
        for t in terms:
            if t:
                d = Decimal(t.numerator) / Decimal(t.denominator)
                total += d * d.ln() / ln3
        return total


def jensen_gap_check(a: RationalLike, b: RationalLike, c: RationalLike,
                     tolerance: Decimal = Decimal("1e-12")) -> bool:
    return jensen_sum(a, b, c) >= Decimal(-1) - tolerance


def random_simplex_point(rng: random.Random, denominator: int = 10**6) -> tuple[Fraction, Fraction, Fraction]:
    u, v = sorted(rng.randint(0, denominator) for _ in range(2))
    return Fraction(u, denominator), Fraction(v - u, denominator), Fraction(denominator - v, denominator)


# -- tree traversal ----------------------------------------------------------


class _Branch(Exception):
    def __init__(self, player: int, i: int):
        super().__init__(player, i)
        self.player = player
        self.i = i


class PosteriorError(AssertionError):
    """The posterior over permutations at some node is not uniform."""


class ScriptedReferee(Referee):
    """Answers primitive cuts from a fixed ``(player, chunk) -> slot`` script."""

    def __init__(self, n: int, epsilon: Fraction, placed: Mapping[tuple[int, int], int]):
        super().__init__(n, epsilon=epsilon)
        self.placed = placed

    def _answer_cut(self, player, alpha):
        i = alpha * self.n
        if i.denominator != 1 or not 1 <= i <= self.n:
            raise ProtocolFault(f"non-primitive cut at alpha={alpha}")
        key = (player, int(i))
        if key not in self.placed:
            raise _Branch(*key)
        return grid_point(self.n, self.epsilon, key[1], self.placed[key])

    def _answer_eval(self, player, x):
        raise ProtocolFault("cuts-only strategies may not evaluate")


@dataclass
class AnalysisNode:
    n: int
    posterior: dict[Perm, Fraction]
    occupancy: dict[tuple[int, int], int]
    reach_probability: Fraction
    depth: int
    query: Optional[tuple[int, int]] = None

    @property
    def consistent_pis(self) -> frozenset[Perm]:
        return frozenset(self.posterior)


def counted_posterior(node: AnalysisNode,
                      prior: Optional[Callable[[Perm], Fraction]] = None) -> dict[Perm, Fraction]:
    """Posterior over permutations from counting the completions of each one."""
    weights = {}
    for pi in node.posterior:
        w = count_completions(node.n, pi, node.occupancy)
        weights[pi] = Fraction(w) * (prior(pi) if prior else 1)
    total = sum(weights.values())
    return {pi: w / total for pi, w in weights.items()}


def check_uniform_posterior(node: AnalysisNode,
                            prior: Optional[Callable[[Perm], Fraction]] = None) -> bool:
    """Every consistent permutation is equally likely given the node's answers.

    Under D (no ``prior``) the counted posterior must also coincide with the
    posterior carried down the tree by the adversary's branch probabilities.
    ``prior`` reweights permutations to model a distribution other than D.
    """
    counted = counted_posterior(node, prior)
    if len(set(counted.values())) > 1:
        return False
    if prior is None and counted != node.posterior:
        return False
    return True


@dataclass
class ExactAnalysis:
    strategy: str
    n: int
    expected_cuts: Fraction
    nodes: int
    leaves: int
    unfair_leaves: list[dict] = field(default_factory=list)
    depth_violations: list[dict] = field(default_factory=list)
    max_cuts: int = 0

    @property
    def expected_depth(self) -> Fraction:
        """Node-count convention: a leaf counts as depth one."""
        return self.expected_cuts + 1

    @property
    def bound(self) -> Decimal:
        return lower_bound(self.n)

    @property
    def meets_bound(self) -> bool:
        return at_least_log3(self.expected_cuts, math.factorial(self.n))

    @property
    def fair(self) -> bool:
        return not self.unfair_leaves

    @property
    def ok(self) -> bool:
        return self.fair and not self.depth_violations and self.meets_bound

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "n": self.n,
            "expected_cuts": str(self.expected_cuts),
            "expected_cuts_decimal": float(self.expected_cuts),
            "expected_depth": str(self.expected_depth),
            "bound_log3_nfact_plus_1": str(self.bound),
            "meets_bound": self.meets_bound,
            "nodes": self.nodes,
            "leaves": self.leaves,
            "max_cuts": self.max_cuts,
            "fair": self.fair,
            "unfair_leaves": self.unfair_leaves,
            "depth_violations": self.depth_violations,
        }


def exact_expected_depth(spec: ProtocolSpec, n: int, epsilon: Optional[RationalLike] = None,
                         check_completions: bool = True, limit: int = EXACT_LIMIT) -> ExactAnalysis:
    """Walk the full decision tree of a cuts-only primitive strategy under D.

    Raises :class:`PosteriorError` at the first node with a non-uniform
    posterior and :class:`ProtocolFault` on a non-primitive query.  Leaves that
    leave the permutation undetermined or hand out an unfair allocation, and
    nodes whose subtree needs fewer than ``log_3 N`` expected cuts, are
    collected in the result rather than raised.
    """
    if n > limit:
        raise ValueError(f"exact analysis refused for n={n} > {limit}")
    eps = default_epsilon(n) if epsilon is None else as_rational(epsilon)
    result = ExactAnalysis(spec.name, n, Fraction(0), 0, 0)

    def visit(node: AnalysisNode) -> Fraction:
        result.nodes += 1
        if not check_uniform_posterior(node):
            raise PosteriorError(f"non-uniform posterior at occupancy {node.occupancy}: {node.posterior}")
        referee = ScriptedReferee(n, eps, node.occupancy)
        try:
            spec.strategy(referee, n)
            alloc = referee.finalize()
        except _Branch as branch:
            node.query = (branch.player, branch.i)
            node.depth = referee.transcript.cuts
        else:
            cuts = referee.transcript.cuts
            result.leaves += 1
            result.max_cuts = max(result.max_cuts, cuts)
            _judge_leaf(node, alloc, eps, result, check_completions)
            return Fraction(cuts)

        p, i = node.query
        joint: dict[int, dict[Perm, Fraction]] = {}
        for pi, w in node.posterior.items():
            state = AdversaryState(n, eps, pi)
            for key, s in node.occupancy.items():
                state.place(*key, s)
            options = state.valid_slots(p, i)
            for s in options:
                row = joint.setdefault(s, {})
                row[pi] = row.get(pi, Fraction(0)) + w / len(options)

        expected = Fraction(0)
        conserved = Fraction(0)
        for s in sorted(joint):
            row = joint[s]
            pr = sum(row.values())
            child = AnalysisNode(n, {pi: w / pr for pi, w in row.items()},
                                 {**node.occupancy, (p, i): s},
                                 node.reach_probability * pr, node.depth)
            conserved += child.reach_probability
            expected += pr * visit(child)
        assert conserved == node.reach_probability, "branch probabilities do not add up"

        remaining = expected - node.depth
        if not at_least_log3(remaining, len(node.posterior)):
            result.depth_violations.append({
                "occupancy": {f"{k[0]},{k[1]}": v for k, v in node.occupancy.items()},
                "consistent": len(node.posterior),
                "expected_remaining_cuts": str(remaining),
            })
        return expected

    perms = list(itertools.permutations(range(1, n + 1)))
    root = AnalysisNode(n, {pi: Fraction(1, len(perms)) for pi in perms}, {}, Fraction(1), 0)
    result.expected_cuts = visit(root)
    return result


def _judge_leaf(node: AnalysisNode, alloc, eps: Fraction, result: ExactAnalysis,
                check_completions: bool) -> None:
    where = {f"{k[0]},{k[1]}": v for k, v in node.occupancy.items()}
    if len(node.posterior) != 1:
        result.unfair_leaves.append({"occupancy": where, "reason": f"{len(node.posterior)} permutations remain"})
        return
    (pi,) = node.posterior
    inst = next(completions(node.n, pi, node.occupancy, eps))
    if not check_phi_equals_pi_inverse(alloc, inst):
        result.unfair_leaves.append({"occupancy": where, "reason": "piece order differs from pi^-1"})
        return
    if check_completions:
        for inst in completions(node.n, pi, node.occupancy, eps):
            if not check_proportional(alloc, inst.measures()):
                result.unfair_leaves.append({"occupancy": where, "reason": "not proportional",
                                             "instance": inst.to_json()})
                return


# -- Monte-Carlo cross-check ------------------------------------------------


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int
    unfair: int


def monte_carlo_depth(spec: ProtocolSpec, n: int, samples: int, seed: int,
                      epsilon: Optional[RationalLike] = None) -> MonteCarloEstimate:
    """Mean cut count of the strategy against the sampling adversary."""
    rng = random.Random(seed)
    counts = []
    unfair = 0
    for _ in range(samples):
        state = AdversaryState.start(n, rng, epsilon)
        referee = AdversaryReferee(state)
        spec.strategy(referee, n)
        alloc = referee.finalize()
        inst = adversary_finalize(state)
        if not check_phi_equals_pi_inverse(alloc, inst):
            unfair += 1
        counts.append(referee.transcript.cuts)
    mean = statistics.fmean(counts)
    stderr = statistics.stdev(counts) / math.sqrt(samples) if samples > 1 else float("inf")
    return MonteCarloEstimate(mean, stderr, samples, unfair)
