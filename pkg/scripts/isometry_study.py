#!/usr/bin/env python3
"""Empirical isometry constants of the triplet difference operator.

For random EDM pairs, reports the smallest and largest ratio of
||Delta(D) - Delta(D')||^2 to ||D - D'||_F^2 (raw) and to the upper-triangle
norm of the centered parts (which the theory pins to [n, 2(n-1)]).

    python3 scripts/isometry_study.py --n 6 8 12 16 24 --trials 200
"""

import argparse

import numpy as np

from ordembed import oracles


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, nargs="+", default=[6, 8, 12, 16, 24])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()

    rows = oracles.isometry_ratio_study(a.n, a.d, a.trials, np.random.default_rng(a.seed))
    print(f"{'n':>4}{'pairs':>7}{'c1 raw':>10}{'c2 raw':>10}{'c2/c1':>8}"
          f"{'c1 cent':>10}{'c2 cent':>10}{'[n, 2(n-1)]':>14}")
    for r in rows:
        print(f"{r.n:>4}{r.pairs:>7}{r.c1_hat:>10.3f}{r.c2_hat:>10.3f}{r.ratio:>8.3f}"
              f"{r.c1_centered:>10.3f}{r.c2_centered:>10.3f}{f'[{r.n}, {2 * (r.n - 1)}]':>14}")


if __name__ == "__main__":
    main()
