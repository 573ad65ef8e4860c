"""Print time- and space-dominant plans over a small parameter grid.

Also shows a setting where the tolerance grows with the round count. As
eps* shrinks, the eps*-weighted term falls but the counter term
(1 - eps*) / (k (1 + eps*)) rises; with very few counters the rise wins.
"""

import argparse
import itertools

from p2pss.planner import PlanInputs, r_min, space_dominant_plan, time_dominant_plan, tolerance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p-star", type=int, default=10_000)
    ap.add_argument("--delta", type=float, default=0.05)
    args = ap.parse_args()
    print(f"{'phi':>6}{'eps':>8}{'R_min':>7}{'time k':>9}{'time R':>8}{'space k':>9}{'space R':>9}")
    for phi, ratio in itertools.product([0.01, 0.02, 0.05], [0.25, 0.5, 0.75]):
        inputs = PlanInputs(phi=phi, eps=ratio * phi, delta=args.delta, p_star=args.p_star)
        t, s = time_dominant_plan(inputs), space_dominant_plan(inputs)
        print(f"{phi:>6}{inputs.eps:>8.4f}{r_min(inputs):>7}{t.k:>9}{t.R:>8}{s.k:>9}{s.R:>9}")

    inputs = PlanInputs(phi=0.125, eps=0.0625, delta=0.5, p_star=2)
    print("\ntolerance with k = 1, phi = 0.125, delta = 0.5, p* = 2:")
    for r in range(2, 8):  # eps* < 1 from r = 2 on
        print(f"  r = {r}: {tolerance(1, r, inputs):.4f}")


if __name__ == "__main__":
    main()
