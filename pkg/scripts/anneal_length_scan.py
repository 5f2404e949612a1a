#!/usr/bin/env python
"""Find the anneal length minimizing median time-to-solution over an
instance pool.

Too few sweeps rarely solve an instance; too many waste time per
repetition. Scanning a grid of sweep counts on a pool of weak-strong
cluster instances exposes the trade-off, and the scan flags the result
whenever the optimum lands on the grid edge (meaning the true optimum
may lie outside the scanned range).
"""
from __future__ import annotations

import argparse

from qabench.bench import is_unsolved, optimal_tf_scan
from qabench.instances import gen_weak_strong
from qabench.solvers import SolverConfig, solve_sa


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument(
        "--h-weak", type=float, nargs="+", default=[0.40, 0.41, 0.42, 0.43],
        help="weak fields; one instance per value",
    )
    p.add_argument(
        "--grid", type=int, nargs="+", default=[1, 2, 3, 5, 10, 30],
        help="sweep counts to scan",
    )
    p.add_argument("--reps", type=int, default=400)
    p.add_argument("--percentile", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    pool = [gen_weak_strong(h) for h in args.h_weak]
    cfg = SolverConfig(repetitions=args.reps, seed=args.seed)
    report = optimal_tf_scan(
        pool,
        solve_sa,
        cfg,
        args.grid,
        percentile=args.percentile,
        seed=args.seed,
    )

    print(f"pool: {len(pool)} weak-strong instances, h_weak = "
          f"{', '.join(f'{h:.2f}' for h in args.h_weak)}")
    print(f"percentile-{args.percentile:.2f} TTS per sweep budget "
          f"({args.reps} reps each):")
    print(f"  {'sweeps':>8}{'tts':>12}{'lower':>12}{'upper':>12}")
    for k, sweeps in enumerate(report.axis):
        v = report.point_values[k]
        cell = "unsolved" if is_unsolved(v) else f"{v:.1f}"
        mark = "  <- best" if sweeps == report.details["best_sweeps"] else ""
        print(f"  {int(sweeps):>8}{cell:>12}"
              f"{report.point_lower[k]:>12.1f}{report.point_upper[k]:>12.1f}{mark}")
    print(f"\nbest: {int(report.details['best_sweeps'])} sweeps, "
          f"TTS {report.estimate:.1f} "
          f"[{report.ci_lower:.1f}, {report.ci_upper:.1f}] "
          f"at {report.ci_level:.0%}")
    if report.flags:
        print(f"flags: {', '.join(report.flags)}")
    else:
        print("flags: none (interior optimum)")


if __name__ == "__main__":
    main()
