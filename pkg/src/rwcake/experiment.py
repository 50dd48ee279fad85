"""Seeded query-count experiments of protocols on instances drawn from D."""

from __future__ import annotations

import csv
import io
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional

from .adversary import check_phi_equals_pi_inverse, sample_J
from .analysis import at_least_log3, lower_bound
from .engine import Mode, ProtocolFault, check_proportional
from .protocols import get_protocol, run_protocol
from .valuation import RationalLike, as_rational

CSV_COLUMNS = ("trial", "cuts", "evals", "total", "proportional")


@dataclass
class TrialRow:
    trial: int
    cuts: int
    evals: int
    total: int
    proportional: bool
    phi_is_pi_inverse: Optional[bool] = None
    fault: Optional[str] = None


@dataclass
class ExperimentReport:
    protocol: str
    n: int
    trials: int
    seed: int
    rows: list[TrialRow] = field(default_factory=list)

    def __post_init__(self):
        if len(self.rows) != self.trials:
            raise ValueError("trials must equal the number of rows")

    @property
    def failures(self) -> list[TrialRow]:
        return [r for r in self.rows if r.fault is not None]

    @property
    def mean_queries(self) -> Optional[Fraction]:
        if not self.rows:
            return None
        return Fraction(sum(r.total for r in self.rows), len(self.rows))

    @property
    def min_queries(self) -> Optional[int]:
        return min((r.total for r in self.rows), default=None)

    @property
    def max_queries(self) -> Optional[int]:
        return max((r.total for r in self.rows), default=None)

    @property
    def bound(self) -> Decimal:
        return lower_bound(self.n)

    @property
    def all_proportional(self) -> bool:
        return all(r.proportional for r in self.rows)

    @property
    def meets_bound(self) -> bool:
        """Mean total queries ``>= log_3(n!) + 1``, decided exactly."""
        mean = self.mean_queries
        return mean is not None and at_least_log3(mean - 1, math.factorial(self.n))

    def to_dict(self) -> dict:
        mean = self.mean_queries
        return {
            "protocol": self.protocol,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "mean_queries": None if mean is None else str(mean),
            "min": self.min_queries,
            "max": self.max_queries,
            "bound": str(self.bound),
            "rows": [asdict(r) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentReport:
        rows = [TrialRow(**r) for r in d["rows"]]
        return cls(d["protocol"], d["n"], d["trials"], d["seed"], rows)


def trial_rng(seed: int, trial: int) -> random.Random:
    """Independent stream per trial, reproducible from the master seed."""
    return random.Random(f"rwcake:{seed}:{trial}")


def run_trial(protocol: str, n: int, seed: int, trial: int,
              epsilon: Optional[RationalLike] = None, mode: Mode = Mode.WOEGINGER_SGALL) -> TrialRow:
    spec = get_protocol(protocol)
    inst = sample_J(n, trial_rng(seed, trial), epsilon)
    engine = inst.engine(mode)
    measures = engine.measures
    try:
        alloc, transcript = run_protocol(spec, engine, n)
    except ProtocolFault as exc:
        t = engine.transcript
        return TrialRow(trial, t.cuts, t.evals, t.cuts + t.evals, False, None, str(exc))
    proportional = check_proportional(alloc, measures).passed
    phi = check_phi_equals_pi_inverse(alloc, inst) if mode is Mode.WOEGINGER_SGALL else None
    return TrialRow(trial, transcript.cuts, transcript.evals,
                    transcript.cuts + transcript.evals, proportional, phi)


def _run_trial_args(args):
    return run_trial(*args)


def run_experiment(protocol: str, n: int, trials: int, seed: int,
                   epsilon: Optional[RationalLike] = None, workers: int = 1) -> ExperimentReport:
    """Run ``trials`` independent J-instances; faulted trials stay in the report."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    eps = None if epsilon is None else as_rational(epsilon)
    jobs = [(protocol, n, seed, t, eps) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial_args, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        rows = [run_trial(*job) for job in jobs]
    return ExperimentReport(protocol, n, trials, seed, rows)


def emit_report(report: ExperimentReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True).encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in report.rows:
            writer.writerow([r.trial, r.cuts, r.evals, r.total, str(r.proportional).lower()])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")
