"""Synthetic ordinal-embedding experiments.

A trial draws ``n`` Gaussian points, labels ``|S|`` uniformly sampled triplets
under the link, fits each solver and scores it on an independently drawn
holdout set. Randomness is keyed off ``(seed, trial)`` so every row of a sweep
can be regenerated in isolation, and solvers within a trial see the same data.
"""

from __future__ import annotations

import dataclasses
import math
import os
import re
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import edm, risk
from .solvers import SOLVERS, NumericalFailure, SolveResult, SolverConfig, debias, nuclear_pgd, solve
from .triplets import Dataset, get_link, simulate

WORKERS_ENV = "ORDEMBED_WORKERS"

# sub-stream tags for np.random.default_rng([trial_seed, tag, ...])
_POINTS, _HOLDOUT, _TRAIN, _SOLVER = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    n: int = 64
    d: int = 2
    sample_grid: list[int] = field(default_factory=lambda: [1000])
    trials: int = 36
    link: str = "logistic"
    solvers: list[str] = field(default_factory=lambda: ["rank_d_pgd", "nuclear_pgd", "nuclear_pgd_debiased"])
    holdout_size: int = 10_000
    seed: int = 0
    gram_scale: float = 1.0
    kernel_correct: bool = False
    # nuclear-norm radius; None means the oracle value trace(G*)
    lam: float | None = None
    workers: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        self.sample_grid = [int(s) for s in self.sample_grid]
        for name in ("n", "d", "trials", "holdout_size", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.sample_grid or min(self.sample_grid) < 1:
            raise ValueError("sample_grid must hold positive counts")
        if any(b <= a for a, b in zip(self.sample_grid, self.sample_grid[1:])):
            raise ValueError("sample_grid must be strictly increasing")
        bad = set(self.solvers) - set(SOLVERS)
        if bad:
            raise ValueError(f"unknown solvers {sorted(bad)}")
        if self.gram_scale <= 0:
            raise ValueError("gram_scale must be positive")
        get_link(self.link)


def dnlogn(n: int, d: int) -> float:
    return d * n * math.log(n)


_GRID_TOKEN = re.compile(r"^\s*([0-9.eE+-]+)\s*(dnlogn)?\s*$")


def parse_grid(text: str, n: int, d: int) -> list[int]:
    """``"1000,5000"`` or multiples of ``d n ln n`` such as ``"1dnlogn,3dnlogn,10dnlogn"``."""
    out = []
    for tok in text.split(","):
        m = _GRID_TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad grid entry {tok!r}")
        val = float(m.group(1))
        out.append(int(round(val * dnlogn(n, d))) if m.group(2) else int(val))
    return out


@dataclass
class TrialResult:
    solver: str
    samples: int
    trial: int
    seed: int
    pred_err: float
    frob_err: float
    rel_frob_err: float
    wall_time_s: float
    status: str = "ok"


def generate_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points with i.i.d. ``N(0, 1/(2d))`` coordinates, centered."""
    if n < d + 3:
        warnings.warn(f"n={n} <= d+2={d + 2}: the kernel coefficient is not identifiable",
                      RuntimeWarning, stacklevel=2)
    return edm.center_embedding(rng.normal(scale=math.sqrt(1.0 / (2 * d)), size=(n, d)))


def trial_seed(config: ExperimentConfig, trial: int) -> int:
    return int(np.random.SeedSequence([config.seed, trial]).generate_state(1)[0])


@dataclass
class TrialTruth:
    points: np.ndarray
    G_star: np.ndarray
    holdout: Dataset
    bayes_error: float


def trial_truth(config: ExperimentConfig, trial: int, with_bayes: bool = True) -> TrialTruth:
    ts = trial_seed(config, trial)
    X = generate_points(config.n, config.d, np.random.default_rng([ts, _POINTS]))
    X = X * math.sqrt(config.gram_scale)
    G = edm.gram_from_embedding(X)
    link = get_link(config.link)
    holdout = simulate(G, config.holdout_size, link, np.random.default_rng([ts, _HOLDOUT]))
    bayes = risk.bayes_error(G, link) if with_bayes else math.nan
    return TrialTruth(X, G, holdout, bayes)


def training_data(config: ExperimentConfig, trial: int, samples: int, G_star) -> Dataset:
    rng = np.random.default_rng([trial_seed(config, trial), _TRAIN, samples])
    return simulate(G_star, samples, get_link(config.link), rng)


def _score(G_hat, truth: TrialTruth, kernel_correct: bool) -> tuple[float, float, float]:
    if kernel_correct:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            G_hat = edm.kernel_correct(G_hat)
    frob = float(np.linalg.norm(G_hat - truth.G_star))
    rel = frob / max(float(np.linalg.norm(truth.G_star)), np.finfo(float).tiny)
    return risk.prediction_error(G_hat, truth.holdout), frob, rel


def run_cell(config: ExperimentConfig, samples: int, trial: int,
             solver_names=None) -> list[TrialResult]:
    """All requested solvers on one (|S|, trial) draw; debiasing reuses the nuclear fit."""
    names = list(solver_names or config.solvers)
    truth = trial_truth(config, trial, with_bayes=False)
    data = training_data(config, trial, samples, truth.G_star)
    lam = config.lam if config.lam is not None else float(np.trace(truth.G_star))
    ts = trial_seed(config, trial)
    scfg = dataclasses.replace(config.solver, seed=int(np.random.default_rng([ts, _SOLVER]).integers(2**31)))

    rows = []
    nuclear_cache: tuple[SolveResult, float] | None = None
    for name in names:
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                if name in ("nuclear_pgd", "nuclear_pgd_debiased"):
                    if nuclear_cache is None:
                        res = nuclear_pgd(data, lam, scfg)
                        nuclear_cache = (res, time.perf_counter() - t0)
                    base, base_time = nuclear_cache
                    if name == "nuclear_pgd":
                        G_hat, elapsed = base.G_hat, base_time
                    else:
                        t1 = time.perf_counter()
                        G_hat = debias(base.G_hat, config.d, data, scfg).G_hat
                        elapsed = base_time + time.perf_counter() - t1
                else:
                    G_hat = solve(name, data, config.d, lam, scfg).G_hat
                    elapsed = time.perf_counter() - t0
            pred, frob, rel = _score(G_hat, truth, config.kernel_correct)
            status = "ok"
        except (NumericalFailure, np.linalg.LinAlgError) as exc:
            pred = frob = rel = math.nan
            elapsed = time.perf_counter() - t0
            status = f"failed: {exc}"
        rows.append(TrialResult(name, samples, trial, ts, pred, frob, rel, elapsed, status))
    return rows


def run_trial(config: ExperimentConfig, solver: str, samples: int, trial: int) -> TrialResult:
    return run_cell(config, samples, trial, [solver])[0]


def _cell_job(args):
    config, samples, trial = args
    return run_cell(config, samples, trial)


def worker_count(config: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    cap = int(env) if env else config.workers
    return max(1, min(config.workers, cap))


def run_sweep(config: ExperimentConfig) -> list[TrialResult]:
    """Every solver x |S| x trial; rows ordered by (solver, |S|, trial)."""
    jobs = [(config, s, t) for s in config.sample_grid for t in range(config.trials)]
    workers = worker_count(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell_job, jobs))
    else:
        cells = [_cell_job(j) for j in jobs]
    order = {name: i for i, name in enumerate(config.solvers)}
    rows = [r for cell in cells for r in cell]
    rows.sort(key=lambda r: (order[r.solver], r.samples, r.trial))
    return rows


def summarize(rows: list[TrialResult]) -> list[dict]:
    """Median and quartiles of each metric per (solver, |S|), with a failure count."""
    groups: dict[tuple[str, int], list[TrialResult]] = {}
    for r in rows:
        groups.setdefault((r.solver, r.samples), []).append(r)
    out = []
    for (solver, samples), rs in groups.items():
        ok = [r for r in rs if r.status == "ok"]
        rec = {"solver": solver, "samples": samples, "trials": len(rs), "failures": len(rs) - len(ok)}
        for metric in ("pred_err", "frob_err", "rel_frob_err", "wall_time_s"):
            vals = np.array([getattr(r, metric) for r in ok], dtype=float)
            q1, med, q3 = np.percentile(vals, [25, 50, 75]) if len(vals) else (math.nan,) * 3
            rec[f"{metric}_median"] = float(med)
            rec[f"{metric}_q1"] = float(q1)
            rec[f"{metric}_q3"] = float(q3)
        out.append(rec)
    return out
