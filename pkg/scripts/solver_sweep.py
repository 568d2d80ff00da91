#!/usr/bin/env python3
"""Solver comparison sweep: prediction and Gram error versus |S|.

Defaults reproduce the full-size setting (n=64, 36 trials, |S| from 1 to 20
multiples of d n ln n). Use --quick for a small smoke run.

    python3 scripts/solver_sweep.py --d 2 --out results/d2
    python3 scripts/solver_sweep.py --d 8 --workers 8 --out results/d8
    python3 scripts/solver_sweep.py --alpha 0.25 --out results/alpha025
"""

import argparse
import dataclasses
import time
from pathlib import Path

from ordembed import experiment, io
from ordembed.solvers import SOLVERS


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--grid", default="1dnlogn,2dnlogn,4dnlogn,8dnlogn,12dnlogn,16dnlogn,20dnlogn")
    p.add_argument("--trials", type=int, default=36)
    p.add_argument("--link", default="logistic")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--solvers", default="rank_d_pgd,nuclear_pgd,nuclear_pgd_debiased",
                   help=f"subset of {','.join(SOLVERS)}")
    p.add_argument("--kernel-correct", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quick", action="store_true", help="n=16, 3 trials, 3 grid points")
    p.add_argument("--out", default="results/sweep")
    a = p.parse_args()

    cfg = experiment.ExperimentConfig(
        n=a.n, d=a.d, sample_grid=experiment.parse_grid(a.grid, a.n, a.d), trials=a.trials,
        link=a.link, solvers=a.solvers.split(","), seed=a.seed, gram_scale=a.alpha,
        kernel_correct=a.kernel_correct, workers=a.workers,
    )
    if a.quick:
        cfg = dataclasses.replace(cfg, n=16, trials=3, holdout_size=2000,
                                  sample_grid=experiment.parse_grid("1dnlogn,4dnlogn,16dnlogn", 16, a.d))

    t0 = time.perf_counter()
    rows = experiment.run_sweep(cfg)
    summary = experiment.summarize(rows)
    bayes = [experiment.trial_truth(cfg, t).bayes_error for t in range(cfg.trials)]

    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_results(out / "results.csv", rows)
    io.save_table(out / "summary.csv", summary)

    print(f"n={cfg.n} d={cfg.d} trials={cfg.trials} link={cfg.link} alpha={cfg.gram_scale} "
          f"median Bayes error={sorted(bayes)[len(bayes) // 2]:.4f}")
    print(f"{'solver':<22}{'|S|':>8}{'pred_err':>10}{'rel_frob':>10}{'frob':>9}{'fail':>6}")
    for r in summary:
        print(f"{r['solver']:<22}{r['samples']:>8}{r['pred_err_median']:>10.4f}"
              f"{r['rel_frob_err_median']:>10.4f}{r['frob_err_median']:>9.3f}{r['failures']:>6}")
    print(f"wrote {out}/results.csv and {out}/summary.csv in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
