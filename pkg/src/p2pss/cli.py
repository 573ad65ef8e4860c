"""Command line entry point: ``run``, ``sweep`` and ``plan``.

Exit codes: 0 success, 1 configuration error, 2 infeasible plan or too few
rounds, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from typing import Optional, Sequence

from .config import DEFAULT_SWEEPS, FULL_SCALE_N, SWEEP_FIELDS, ExperimentConfig, parse_value
from .errors import ConfigError, InfeasibleRounds, InsufficientRounds, P2PSSError
from .experiment import run_sweep, summary_lines, write_csv, write_traces
from .planner import (
    CONVERGENCE_FACTOR,
    PlanInputs,
    Strategy,
    explicit_plan,
    space_dominant_plan,
    time_dominant_plan,
)

SEED_ENV = "P2PSS_SEED"
EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_RUNTIME = 0, 1, 2, 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value file; flags override it")
    group = parser.add_argument_group("experiment parameters")
    for f in dataclasses.fields(ExperimentConfig):
        group.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None, metavar="V")
    group.add_argument("--full-scale", action="store_true", help=f"n = {FULL_SCALE_N:,}")
    parser.add_argument("--out", help="CSV destination (default: stdout)")
    parser.add_argument("--trace", help="write per-round conservation traces to this CSV")
    parser.add_argument("--workers", type=int, default=1, help="parallel repetitions")
    parser.add_argument("-q", "--quiet", action="store_true", help="no summary on stderr")


def config_from_args(args: argparse.Namespace, environ=os.environ) -> ExperimentConfig:
    base = ExperimentConfig()
    if environ.get(SEED_ENV):
        base = ExperimentConfig.from_mapping({"seed": environ[SEED_ENV]}, base)
    if args.config:
        try:
            base = ExperimentConfig.from_file(args.config, base)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    flags = {f.name: getattr(args, f.name) for f in dataclasses.fields(ExperimentConfig)}
    flags = {k: v for k, v in flags.items() if v is not None}
    if args.full_scale:
        flags.setdefault("n", str(FULL_SCALE_N))
    return ExperimentConfig.from_mapping(flags, base)


def _parse_values(name: str, text: Optional[str]) -> list:
    if not text:
        return list(DEFAULT_SWEEPS[name])
    key = SWEEP_FIELDS[name]
    return [parse_value(key, tok) for tok in text.split(",") if tok.strip()]


def _emit(args, result) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(result, fh)
    else:
        write_csv(result, sys.stdout)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            write_traces(result, fh)
    if not args.quiet:
        for line in summary_lines(result):
            print(line, file=sys.stderr)


def cmd_run(args) -> int:
    config = config_from_args(args)
    _emit(args, run_sweep(config, workers=args.workers))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_FIELDS:
        raise ConfigError(f"unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEP_FIELDS)}")
    config = config_from_args(args)
    values = _parse_values(args.param, args.values)
    _emit(args, run_sweep(config, args.param, values, workers=args.workers))
    return EXIT_OK


def cmd_plan(args) -> int:
    inputs = PlanInputs(
        phi=args.phi, eps=args.eps, delta=args.delta, p_star=args.p_star, conv_factor=args.conv_factor
    )
    strategy = Strategy(args.strategy)
    if strategy is Strategy.TIME_DOMINANT:
        plan = time_dominant_plan(inputs)
    elif strategy is Strategy.SPACE_DOMINANT:
        plan = space_dominant_plan(inputs)
    else:
        if args.k is None or args.R is None:
            raise ConfigError("the explicit strategy needs both --k and --R")
        plan = explicit_plan(inputs, args.k, args.R)
    ok = plan.achieved <= inputs.eps
    print(f"strategy:  {plan.strategy.value}")
    print(f"counters:  k = {plan.k}")
    print(f"rounds:    R = {plan.R}")
    print(f"tolerance: {plan.achieved:.6g} (requested {inputs.eps:g}, {'met' if ok else 'NOT met'})")
    print(json.dumps({**plan.as_dict(), "requested": inputs.eps, "met": ok}))
    return EXIT_OK if ok else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p2pss", description="Gossip-based frequent items simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="repetitions of one configuration")
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="vary one parameter, others at their defaults")
    sweep.add_argument("--param", required=True, help=", ".join(SWEEP_FIELDS))
    sweep.add_argument("--values", help="comma-separated values (default: the standard grid)")
    _add_config_flags(sweep)
    sweep.set_defaults(func=cmd_sweep)

    plan = sub.add_parser("plan", help="choose k and R for a target tolerance")
    plan.add_argument("--phi", type=float, default=0.02)
    plan.add_argument("--eps", type=float, required=True)
    plan.add_argument("--delta", type=float, default=0.05)
    plan.add_argument("--p-star", type=int, default=10_000)
    plan.add_argument("--conv-factor", type=float, default=CONVERGENCE_FACTOR)
    plan.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.TIME_DOMINANT.value)
    plan.add_argument("--k", type=int)
    plan.add_argument("--R", type=int)
    plan.set_defaults(func=cmd_plan)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleRounds, InsufficientRounds) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (P2PSSError, ArithmeticError, MemoryError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
