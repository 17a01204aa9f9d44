"""Command-line interface.

Exit codes: 0 success, 1 property violation, 2 input error, 3 event budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import io
from .core import check_acyclic
from .cyclic import counterexample_suite
from .engine import EventBudgetExceeded, InvalidEpisode, InvariantViolation, Simulator, event_budget_from_env, ledger_audit
from .fuzz import fuzz_case, fuzz_invariance, summarize
from .qann import NotAcyclic, NotRealizable, qann_to_snn, snn_to_qann
from .realizer import Realization, RealizationConfig, realize, sample_refractory

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("chargenet")


def _int_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}")


def _rat_range(text: str) -> tuple[Fraction, Fraction]:
    try:
        a, b = text.split(":")
        return io.parse_rational(a), io.parse_rational(b)
    except (ValueError, io.FormatError):
        raise argparse.ArgumentTypeError(f"expected p/q:p/q, got {text!r}")


def _rat(text: str) -> Fraction:
    try:
        return io.parse_rational(text)
    except io.FormatError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def cmd_simulate(args) -> int:
    net = io.network_from_json(io.load_json(args.net))
    form, payload = io.episode_from_json(io.load_json(args.episode), net)
    cfg = RealizationConfig(
        seed=args.seed,
        splits_per_input=args.splits,
        time_horizon=args.horizon,
        delay_range=args.delay_range,
        kernel_atoms=args.kernel_atoms,
        kernel_span=args.kernel_span,
        refractory_range=args.refractory_range,
    )
    if form == "aggregate":
        real = realize(net, payload, cfg)
    else:
        real = Realization(payload, (), sample_refractory(net, cfg))
    sim = Simulator(net, real, debug=args.debug, tie_break=args.tie_break)
    budget = args.budget if args.budget is not None else event_budget_from_env()
    code = EXIT_OK
    try:
        report = sim.run(budget)
    except EventBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        report, code = sim.report(), EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        report, code = sim.report(), EXIT_VIOLATION
    if code == EXIT_OK:
        problems = ledger_audit(report, sim.trace, net, real.episode)
        ledger = "ok" if not problems else [f"{p.neuron}: {p.message}" for p in problems]
        if problems:
            code = EXIT_VIOLATION
    else:
        ledger = "incomplete"
    doc = io.report_to_json(report, ledger)
    if code == EXIT_BUDGET:
        doc["status"] = "budget_exceeded"
    if args.trace:
        Path(args.trace).write_text(sim.trace.to_jsonl())
    if args.report:
        io.dump_json(doc, args.report)
    else:
        print(json.dumps(doc, indent=2))
    return code


def cmd_fuzz(args) -> int:
    if args.replay:
        net_seed, real_seed = args.replay
        res = fuzz_case(net_seed, args.realizations, args.max_neurons)
        failures = [f for f in res.failures if real_seed is None or f[0] == real_seed]
        summary = summarize([res])
        summary["replayed"] = {"net_seed": net_seed, "realization_seed": real_seed,
                               "reproduced": bool(failures)}
        results = [res]
    else:
        results = fuzz_invariance(args.nets, args.realizations, args.seed, args.max_neurons,
                                  workers=args.workers)
        summary = summarize(results)
    summary.update({"seed": args.seed, "realizations": args.realizations, "max_neurons": args.max_neurons})
    text = json.dumps(summary, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n")
    for r in results:
        for rseed, why in r.failures:
            print(f"FAIL net_seed={r.net_seed} realization_seed={rseed}: {why}", file=sys.stderr)
    print(f"{summary['passed']}/{summary['cases']} nets timing-invariant "
          f"({summary['runs']} runs, {summary['events']} events)")
    return EXIT_OK if all(r.ok for r in results) else EXIT_VIOLATION


def cmd_convert(args) -> int:
    doc = io.load_json(args.input)
    if args.direction == "snn-to-qann":
        net = io.network_from_json(doc)
        out = io.qann_to_json(snn_to_qann(net))
    else:
        q = io.qann_from_json(doc)
        net, synth = qann_to_snn(q, C=args.C)
        out = io.network_to_json(net)
        out["synthesis"] = [
            {"node": s.node, "levels": [io.fmt(x) for x in s.levels],
             "sentinel": None if s.sentinel is None else io.fmt(s.sentinel),
             "sigma": {io.fmt(k): io.fmt(v) for k, v in s.sigma}}
            for s in synth
        ]
    io.dump_json(out, args.output)
    return EXIT_OK


def cmd_counterexamples(args) -> int:
    results = counterexample_suite(tuple(args.box))
    if args.json:
        print(json.dumps([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results], indent=2))
    else:
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def cmd_check(args) -> int:
    net = io.network_from_json(io.load_json(args.net))
    topo = check_acyclic(net)
    if topo.acyclic:
        print("acyclic; order:", " ".join(map(str, topo.order)))
    else:
        print("cyclic; witness:", " -> ".join(map(str, topo.cycle)))
    return EXIT_OK


def _replay(text: str):
    parts = text.split(":")
    if len(parts) == 1:
        return int(parts[0], 0), None
    return int(parts[0], 0), int(parts[1], 0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chargenet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a network on an input episode")
    s.add_argument("net")
    s.add_argument("episode")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--splits", type=_int_range, default=(1, 4))
    s.add_argument("--horizon", type=_rat, default=Fraction(10))
    s.add_argument("--delay-range", type=_rat_range, default=(Fraction(0), Fraction(2)))
    s.add_argument("--kernel-atoms", type=_int_range, default=(1, 3))
    s.add_argument("--kernel-span", type=_rat_range, default=(Fraction(0), Fraction(2)))
    s.add_argument("--refractory-range", type=_rat_range, default=None)
    s.add_argument("--tie-break", choices=("fifo", "lifo"), default="fifo")
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--debug", action="store_true", help="check the charge ledger after every event")
    s.add_argument("--trace")
    s.add_argument("--report")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fuzz-invariance", help="check timing invariance on random acyclic nets")
    f.add_argument("--nets", type=int, default=100)
    f.add_argument("--realizations", type=int, default=20)
    f.add_argument("--seed", type=int, default=42)
    f.add_argument("--max-neurons", type=int, default=20)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--replay", type=_replay, help="NET_SEED[:REALIZATION_SEED] from a failure line")
    f.add_argument("--report")
    f.set_defaults(func=cmd_fuzz)

    c = sub.add_parser("convert", help="convert between SNN and QANN files")
    c.add_argument("--direction", choices=("snn-to-qann", "qann-to-snn"), required=True)
    c.add_argument("--C", type=_rat, default=Fraction(1))
    c.add_argument("input")
    c.add_argument("output")
    c.set_defaults(func=cmd_convert)

    x = sub.add_parser("counterexamples", help="reproduce the cyclic counterexamples")
    x.add_argument("--box", type=_int_range, default=(0, 5))
    x.add_argument("--json", action="store_true")
    x.set_defaults(func=cmd_counterexamples)

    t = sub.add_parser("check", help="report topological order or a cycle")
    t.add_argument("net")
    t.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (io.FormatError, InvalidEpisode, NotAcyclic, NotRealizable, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
