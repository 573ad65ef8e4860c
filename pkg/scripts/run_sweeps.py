"""Run every standard one-parameter sweep.

Each sweep varies one parameter around the defaults and writes
``<out>/<param>.csv`` in the CLI's CSV format. The default scale is
desk-sized; ``--p 10000`` restores the full peer count (roughly two minutes
per repetition and value).

    python3 scripts/run_sweeps.py --out results/ --repetitions 10 --workers 4
"""

import argparse
import logging
import sys
import time
from pathlib import Path

from p2pss.config import DEFAULT_SWEEPS, ExperimentConfig
from p2pss.experiment import run_sweep, summary_lines, write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--p", type=int, default=100, help="peer count for every sweep but 'peers'")
    ap.add_argument("--n", type=int, default=2_000_000)
    ap.add_argument("--repetitions", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*", choices=sorted(DEFAULT_SWEEPS), help="subset of sweeps")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    base = ExperimentConfig(p=args.p, n=args.n, repetitions=args.repetitions, seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.only or DEFAULT_SWEEPS:
        t0 = time.perf_counter()
        result = run_sweep(base, name, DEFAULT_SWEEPS[name], workers=args.workers)
        with open(args.out / f"{name}.csv", "w", newline="") as fh:
            write_csv(result, fh)
        logging.info("%s (%.0f s)", name, time.perf_counter() - t0)
        for line in summary_lines(result):
            logging.info("  %s", line)


if __name__ == "__main__":
    sys.exit(main())
