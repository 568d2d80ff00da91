"""Gram-matrix estimators: rank-d PGD, nuclear-norm PGD, debiasing, factored GD.

All solvers minimise the empirical logistic risk. Every step is
``G <- P(G - eta * grad)`` with Armijo backtracking on ``eta``; the sufficient
decrease test ``f(G+) <= f(G) - c / eta * ||G+ - G||^2`` is valid for the
non-convex rank projection too.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .edm import eigh_desc
from .risk import EmpiricalObjective, LossKind, loss_derivative
from .triplets import Dataset


@dataclass
class SolverConfig:
    max_iters: int = 2000
    initial_step: float = 1.0
    backtracking_shrink: float = 0.5
    armijo_constant: float = 1e-4
    rel_tol: float = 1e-6
    seed: int = 0
    # each iteration's trial step starts at the last accepted step times this
    step_growth: float = 2.0
    min_step: float = 1e-20

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if not 0 < self.backtracking_shrink < 1:
            raise ValueError("backtracking_shrink must lie in (0, 1)")
        if not 0 < self.armijo_constant < 1:
            raise ValueError("armijo_constant must lie in (0, 1)")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")
        if self.step_growth < 1:
            raise ValueError("step_growth must be >= 1")


@dataclass
class SolveResult:
    G_hat: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    coefficients: np.ndarray | None = None


class NumericalFailure(RuntimeError):
    def __init__(self, iteration: int, what: str = "objective or gradient"):
        super().__init__(f"non-finite {what} at iteration {iteration}")
        self.iteration = iteration


# -- projections --------------------------------------------------------------


def _sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def _rebuild(w: np.ndarray, U: np.ndarray) -> np.ndarray:
    keep = w > 0
    Uk = U[:, keep]
    return _sym((Uk * w[keep]) @ Uk.T)


def project_psd(M) -> np.ndarray:
    w, U = np.linalg.eigh(_sym(M))
    return _rebuild(np.maximum(w, 0.0), U)


def project_rank_d(M, d: int) -> np.ndarray:
    """Keep the ``d`` largest eigenvalues (clamped at 0), zero the rest."""
    M = _sym(M)
    if not 1 <= d <= M.shape[0]:
        raise ValueError(f"rank must lie in [1, {M.shape[0]}], got {d}")
    w, U = eigh_desc(M)
    w = np.maximum(w, 0.0)
    w[d:] = 0.0
    return _rebuild(w, U)


def simplex_cap_projection(v, lam: float) -> np.ndarray:
    """Euclidean projection onto ``{s >= 0, sum(s) <= lam}``."""
    if lam <= 0:
        raise ValueError("radius must be positive")
    v = np.maximum(np.asarray(v, dtype=float), 0.0)
    if v.sum() <= lam:
        return v
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(u) + 1) > css - lam)[0][-1]
    theta = (css[rho] - lam) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_nuclear_ball_psd(M, lam: float) -> np.ndarray:
    w, U = np.linalg.eigh(_sym(M))
    return _rebuild(simplex_cap_projection(w, lam), U)


Projector = Callable[[np.ndarray], np.ndarray]


def rank_projector(d: int) -> Projector:
    return lambda M: project_rank_d(M, d)


def nuclear_projector(lam: float) -> Projector:
    return lambda M: project_nuclear_ball_psd(M, lam)


# -- generic projected descent ----------------------------------------------------


def _descend(value, value_and_grad, project, x0, config: SolverConfig):
    x = x0
    f, g = value_and_grad(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise NumericalFailure(0)
    trace = [f]
    step = config.initial_step
    c = config.armijo_constant
    converged = False
    it = 0
    while it < config.max_iters:
        it += 1
        while True:
            x_new = project(x - step * g)
            dx = x_new - x
            sq = float(np.vdot(dx, dx))
            f_new = value(x_new)
            if np.isfinite(f_new) and f_new <= f - c / step * sq:
                break
            step *= config.backtracking_shrink
            if step < config.min_step:
                break
        if step < config.min_step:
            converged = True
            break
        decrease = f - f_new
        x = x_new
        f, g = value_and_grad(x)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise NumericalFailure(it)
        trace.append(f)
        if decrease <= config.rel_tol * max(abs(trace[-2]), np.finfo(float).tiny):
            converged = True
            break
        step *= config.step_growth
    return x, trace, it, converged


def pgd(data: Dataset, projector: Projector, config: SolverConfig | None = None, G0=None) -> SolveResult:
    """Projected gradient descent on the empirical logistic risk, starting from ``G0`` (default 0)."""
    config = config or SolverConfig()
    obj = EmpiricalObjective(data, LossKind.LOGISTIC)
    G0 = np.zeros((data.n, data.n)) if G0 is None else projector(G0)
    G, trace, it, conv = _descend(obj.value, obj.value_and_grad, projector, G0, config)
    return SolveResult(G_hat=G, objective_trace=trace, iterations=it, converged=conv)


def rank_d_pgd(data: Dataset, d: int, config: SolverConfig | None = None) -> SolveResult:
    return pgd(data, rank_projector(d), config)


def nuclear_pgd(data: Dataset, lam: float, config: SolverConfig | None = None) -> SolveResult:
    return pgd(data, nuclear_projector(lam), config)


def debias(G_biased, d: int, data: Dataset, config: SolverConfig | None = None) -> SolveResult:
    """Refit the top-``d`` eigenvalues of ``G_biased`` with its eigenvectors held fixed.

    Solves ``min_{s >= 0} R_S(U diag(s) U^T)`` by projected gradient descent,
    starting from the current eigenvalues.
    """
    config = config or SolverConfig()
    w, U = eigh_desc(_sym(G_biased))
    if w[min(d, len(w)) - 1] <= 1e-10 * max(w[0], 1e-300):
        warnings.warn(f"input has numerical rank below {d}; extra directions are arbitrary",
                      RuntimeWarning, stacklevel=2)
    U = U[:, :d]
    obj = EmpiricalObjective(data, LossKind.LOGISTIC)
    i, j, k = obj.triplets.T
    Ui, Uj, Uk = U[i], U[j], U[k]
    # <L_t, u u^T> for each retained eigenvector u
    A = Uj**2 - 2 * Ui * Uj - Uk**2 + 2 * Ui * Uk

    def value(s):
        return obj.value_on_margins(A @ s)

    def value_and_grad(s):
        raw = A @ s
        coef = obj.weights * obj.y * loss_derivative(LossKind.LOGISTIC, obj.y * raw)
        return obj.value_on_margins(raw), A.T @ coef

    s0 = np.maximum(w[:d], 0.0)
    s, trace, it, conv = _descend(value, value_and_grad, lambda s: np.maximum(s, 0.0), s0, config)
    G = _sym((U * s) @ U.T)
    return SolveResult(G_hat=G, objective_trace=trace, iterations=it, converged=conv, coefficients=s)


def nuclear_pgd_debiased(data: Dataset, d: int, lam: float, config: SolverConfig | None = None) -> SolveResult:
    biased = nuclear_pgd(data, lam, config)
    out = debias(biased.G_hat, d, data, config)
    out.objective_trace = biased.objective_trace + out.objective_trace
    out.iterations += biased.iterations
    out.converged = out.converged and biased.converged
    return out


def factored_gd(data: Dataset, d: int, config: SolverConfig | None = None, init_scale: float = 0.1) -> SolveResult:
    """Plain gradient descent on the points ``U`` (n x d) with ``G = U U^T``."""
    config = config or SolverConfig()
    obj = EmpiricalObjective(data, LossKind.LOGISTIC)
    rng = np.random.default_rng(config.seed)
    U0 = rng.normal(scale=init_scale / np.sqrt(d), size=(data.n, d))
    center = lambda U: U - U.mean(axis=0, keepdims=True)  # noqa: E731

    def value(U):
        return obj.value(U @ U.T)

    def value_and_grad(U):
        f, g = obj.value_and_grad(U @ U.T)
        return f, 2.0 * g @ U

    U, trace, it, conv = _descend(value, value_and_grad, center, center(U0), config)
    return SolveResult(G_hat=_sym(U @ U.T), objective_trace=trace, iterations=it, converged=conv,
                       coefficients=U)


SOLVERS = ("rank_d_pgd", "nuclear_pgd", "nuclear_pgd_debiased", "factored_gd")


def solve(name: str, data: Dataset, d: int, lam: float | None = None,
          config: SolverConfig | None = None) -> SolveResult:
    if name == "rank_d_pgd":
        return rank_d_pgd(data, d, config)
    if name in ("nuclear_pgd", "nuclear_pgd_debiased") and lam is None:
        raise ValueError(f"{name} needs a nuclear-norm radius")
    if name == "nuclear_pgd":
        return nuclear_pgd(data, lam, config)
    if name == "nuclear_pgd_debiased":
        return nuclear_pgd_debiased(data, d, lam, config)
    if name == "factored_gd":
        return factored_gd(data, d, config)
    raise ValueError(f"unknown solver {name!r}; choose from {SOLVERS}")
