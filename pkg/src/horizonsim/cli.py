"""Command line entry point: ``run``, ``gen`` and ``sweep``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import InvalidScenario
from .report import emit_report, report_to_dict
from .scenario import format_scenario, gen_dt_like, gen_ep_like, parse_scenario, run_scenario
from .session import FtMode
from .simulator import Verdict

EXIT_CODES = {
    Verdict.COMPLETED: 0,
    Verdict.DEADLOCK: 2,
    Verdict.BUDGET_EXHAUSTED: 3,
}
EXIT_BAD_SCENARIO = 64


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _generate(pattern: str, n: int, group_size: int | None):
    if pattern == "ep":
        return gen_ep_like(n, group_size or 4)
    return gen_dt_like(n)


def cmd_run(args) -> int:
    with open(args.scenario) as fh:
        plan = parse_scenario(fh.read())
    report = run_scenario(plan, args.mode, args.seed, args.max_events)
    report.scenario = args.scenario
    _write(emit_report(report, args.format), args.out)
    return EXIT_CODES[report.verdict]


def cmd_gen(args) -> int:
    plan = _generate(args.pattern, args.procs, args.group_size)
    _write(format_scenario(plan), args.out)
    return 0


def cmd_sweep(args) -> int:
    sizes = [int(x) for x in args.procs.split(",") if x.strip()]
    modes = [FtMode(m) for m in args.modes.split(",")]
    reports = []
    for n in sizes:
        plan = _generate(args.pattern, n, args.group_size)
        for mode in modes:
            report = run_scenario(plan, mode, args.seed, args.max_events)
            report.scenario = f"{args.pattern}:{n}"
            reports.append(report)
    if args.format == "machine":
        text = "".join(json.dumps(report_to_dict(r), separators=(",", ":")) + "\n" for r in reports)
    else:
        rows = [("n", "mode", "verdict", "messages", "msgs/proc", "max load")]
        rows += [(r.n, r.mode, r.verdict.value, r.total_messages,
                  f"{r.messages_per_process:.4f}", r.max_process_load) for r in reports]
        widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
        text = "".join("  ".join(str(c).rjust(w) for c, w in zip(row, widths)) + "\n" for row in rows)
    _write(text, args.out)
    return max(EXIT_CODES[r.verdict] for r in reports)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horizonsim",
        description="Simulate MPI Session-model communicator creation under crash faults.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("--scenario", required=True)
    run.add_argument("--mode", choices=[m.value for m in FtMode], default=None,
                     help="fault management mode (default: the scenario's own, else none)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--max-events", type=int, default=1_000_000)
    run.add_argument("--format", choices=["human", "machine"], default="human")
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("gen", help="write a generated workload scenario")
    gen.add_argument("--pattern", choices=["ep", "dt"], required=True)
    gen.add_argument("--procs", type=int, required=True)
    gen.add_argument("--group-size", type=int, default=None)
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    sweep = sub.add_parser("sweep", help="run a workload over several sizes and all modes")
    sweep.add_argument("--pattern", choices=["ep", "dt"], default="ep")
    sweep.add_argument("--procs", default="8,16,32,64")
    sweep.add_argument("--group-size", type=int, default=4)
    sweep.add_argument("--modes", default="none,naive,horizon")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--max-events", type=int, default=1_000_000)
    sweep.add_argument("--format", choices=["human", "machine"], default="human")
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "max_events", 1) <= 0:
        print("horizonsim: --max-events must be positive", file=sys.stderr)
        return EXIT_BAD_SCENARIO
    try:
        return args.func(args)
    except InvalidScenario as exc:
        print(f"horizonsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BAD_SCENARIO
    except OSError as exc:
        print(f"horizonsim: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
