#!/usr/bin/env python3
"""Grid-refinement study: marching scheme against the predictor-corrector
cross-check on the same problem, with self-convergence rates.

Example:
    python scripts/solver_convergence.py --problem tests/fixtures/frac_delay_a07.json --horizon 3
"""

import argparse
import sys
import time

import numpy as np

from fracdelay import align_grid, load_problem, solve_oracle, solve_trajectory


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", required=True)
    ap.add_argument("--horizon", type=float, default=3.0)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--base-step", type=float, default=0.02)
    args = ap.parse_args()

    prob = load_problem(args.problem)
    fine = align_grid(args.base_step / 2 ** (args.levels + 1), args.horizon,
                      prob.system.delays)
    ref = solve_trajectory(prob, fine)

    print(f"{'step':>10} {'err_vs_fine':>13} {'rate':>6} "
          f"{'oracle_diff':>13} {'march_s':>8} {'oracle_s':>9}")
    prev_err = None
    for level in range(args.levels):
        step = args.base_step / 2 ** level
        grid = align_grid(step, args.horizon, prob.system.delays)
        t0 = time.perf_counter()
        traj = solve_trajectory(prob, grid)
        t_march = time.perf_counter() - t0
        t0 = time.perf_counter()
        orac = solve_oracle(prob, grid)
        t_orac = time.perf_counter() - t0
        stride = round(grid.step / fine.step)
        n = traj.states.shape[0]
        err = float(np.max(np.abs(traj.states - ref.states[::stride][:n])))
        diff = float(np.max(np.abs(traj.states - orac.states)))
        rate = "" if prev_err is None else f"{np.log2(prev_err / err):6.2f}"
        print(f"{grid.step:10.5g} {err:13.4e} {rate:>6} {diff:13.4e} "
              f"{t_march:8.2f} {t_orac:9.2f}")
        prev_err = err
    return 0


if __name__ == "__main__":
    sys.exit(main())
