"""Command line entry point ``rwcake``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .adversary import JInstance, enumerate_J, sample_J, check_phi_equals_pi_inverse
from .analysis import PosteriorError, exact_expected_depth, jensen_gap_check, jensen_sum, lower_bound, random_simplex_point
from .engine import Mode, ProtocolFault, Transcript, check_proportional, replay
from .experiment import emit_report, run_experiment
from .protocols import STRATEGIES, get_protocol, is_primitive, run_protocol
from .valuation import format_rational


def _out(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_instance(args) -> JInstance:
    if args.instance:
        return JInstance.from_json(Path(args.instance).read_text())
    if args.n is None:
        raise SystemExit("need --instance FILE or --n N")
    return sample_J(args.n, random.Random(args.seed), args.epsilon)


def cmd_gen(args) -> int:
    sys.stdout.write(sample_J(args.n, random.Random(args.seed), args.epsilon).to_json() + "\n")
    return 0


def cmd_enumerate(args) -> int:
    for inst in enumerate_J(args.n, epsilon=args.epsilon):
        sys.stdout.write(inst.to_json() + "\n")
    return 0


def cmd_run(args) -> int:
    inst = _load_instance(args)
    spec = get_protocol(args.protocol)
    mode = Mode.WOEGINGER_SGALL if args.ws_mode else Mode.UNRESTRICTED
    engine = inst.engine(mode)
    measures = engine.measures
    try:
        alloc, transcript = run_protocol(spec, engine)
    except ProtocolFault as exc:
        _out({"protocol": spec.name, "fault": str(exc)})
        return 2
    report = check_proportional(alloc, measures)
    result = {
        "protocol": spec.name,
        "n": inst.n,
        "allocation": alloc.to_dict(),
        "counts": {"cuts": transcript.cuts, "evals": transcript.evals},
        "values": {str(p): format_rational(v) for p, v in report.values.items()},
        "proportional": report.passed,
        "primitive": is_primitive(transcript, inst.n, inst.base.epsilon),
    }
    if mode is Mode.WOEGINGER_SGALL:
        result["phi_is_pi_inverse"] = check_phi_equals_pi_inverse(alloc, inst)
    if args.transcript:
        Path(args.transcript).write_text(transcript.to_jsonl())
    _out(result)
    return 0 if report.passed else 1


def cmd_replay(args) -> int:
    inst = JInstance.from_json(Path(args.instance).read_text())
    transcript = Transcript.from_jsonl(Path(args.transcript).read_text())
    mode = Mode.WOEGINGER_SGALL if args.ws_mode else Mode.UNRESTRICTED
    try:
        engine = replay(transcript, inst.measures(), mode)
        alloc = engine.finalize()
    except ProtocolFault as exc:
        _out({"replay": "fault", "fault": str(exc)})
        return 2
    report = check_proportional(alloc, inst.measures())
    _out({"replay": "ok", "records": len(transcript), "proportional": report.passed})
    return 0 if report.passed else 1


def cmd_experiment(args) -> int:
    report = run_experiment(args.protocol, args.n, args.trials, args.seed, args.epsilon, args.workers)
    sys.stdout.buffer.write(emit_report(report, args.format))
    ok = not report.failures and report.all_proportional and report.meets_bound
    return 0 if ok else 1


def cmd_analyze(args) -> int:
    try:
        result = exact_expected_depth(STRATEGIES[args.strategy], args.n)
    except PosteriorError as exc:
        _out({"strategy": args.strategy, "n": args.n, "posterior_error": str(exc)})
        return 1
    _out(result.to_dict())
    return 0 if result.ok else 1


def cmd_bound(args) -> int:
    _out({"n": args.n, "log3_nfact_plus_1": str(lower_bound(args.n, args.digits))})
    return 0


def cmd_jensen(args) -> int:
    rng = random.Random(args.seed)
    worst = None
    failures = 0
    for _ in range(args.samples):
        a, b, c = random_simplex_point(rng)
        value = jensen_sum(a, b, c)
        worst = value if worst is None else min(worst, value)
        failures += not jensen_gap_check(a, b, c)
    third = Fraction(1, 3)
    _out({"samples": args.samples, "seed": args.seed, "failures": failures,
          "minimum": str(worst), "at_center": str(jensen_sum(third, third, third))})
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwcake", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_args(p, need_n=True):
        p.add_argument("--n", type=int, required=need_n)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--epsilon", type=Fraction, default=None, help="grid spacing p/q, default 1/(2n^4)")

    p = sub.add_parser("gen", help="sample one J-instance as JSON")
    instance_args(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("enumerate", help="list every J-instance as JSON lines")
    instance_args(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("run", help="run one protocol on one instance")
    p.add_argument("--protocol", required=True)
    p.add_argument("--instance")
    instance_args(p, need_n=False)
    p.add_argument("--ws-mode", action="store_true", help="one connected piece per player")
    p.add_argument("--transcript", help="write the transcript here as JSON lines")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="replay a transcript against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--ws-mode", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("experiment", help="query counts over sampled instances")
    p.add_argument("--protocol", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=Fraction, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", help="exact expected depth of a cuts-only strategy")
    p.add_argument("--strategy", choices=sorted(STRATEGIES), required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bound", help="log_3(n!) + 1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--digits", type=int, default=30)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("jensen", help="check x log_3 x convexity step on random points")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_jensen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        sys.stderr.write(f"rwcake: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
