"""Executable checks of the closed-form spectral facts behind the recovery theory.

Everything here builds explicit matrices, so it is meant for desk-scale ``n``.
Symmetric hollow matrices are vectorised by their strict upper triangle in
row-major ``(i < j)`` order; :func:`hollow_sq_norm` is the matching squared norm
(half the full-matrix Frobenius norm).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import edm
from .triplets import delta_vector, enumerate_triplets, lt_matrix


def vec_hollow(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    return D[np.triu_indices(D.shape[0], 1)]


def unvec_hollow(x, n: int) -> np.ndarray:
    D = np.zeros((n, n))
    D[np.triu_indices(n, 1)] = x
    return D + D.T


def hollow_sq_norm(D) -> float:
    x = vec_hollow(D)
    return float(x @ x)


# -- single-triplet operator ----------------------------------------------------


@dataclass(frozen=True)
class LtNormReport:
    n: int
    max_abs_deviation: float
    cubic_identity_deviation: float


def lt_norm_check(n: int) -> LtNormReport:
    """Largest ``| ||L_t||_2 - sqrt(3) |`` and ``||L_t^3 - 3 L_t||_max`` over all triplets."""
    dev = cubic = 0.0
    for t in enumerate_triplets(n):
        L = lt_matrix(t, n)
        dev = max(dev, abs(np.linalg.norm(L, 2) - math.sqrt(3)))
        cubic = max(cubic, np.abs(L @ L @ L - 3 * L).max())
    return LtNormReport(n, float(dev), float(cubic))


@dataclass(frozen=True)
class MeanSquareReport:
    n: int
    matrix: np.ndarray
    norm: float
    norm_deviation: float
    entry_deviation: float


def mean_lt_squared(n: int) -> MeanSquareReport:
    T = enumerate_triplets(n)
    acc = np.zeros((n, n))
    for t in T:
        L = lt_matrix(t, n)
        acc += L @ L
    acc /= len(T)
    expected = 6.0 / n * np.eye(n) - 6.0 / (n * (n - 1)) * edm.ones_minus_identity(n)
    norm = float(np.linalg.norm(acc, 2))
    return MeanSquareReport(n, acc, norm, abs(norm - 6.0 / (n - 1)), float(np.abs(acc - expected).max()))


# -- the stacked difference operator ----------------------------------------------


def pair_index(n: int) -> np.ndarray:
    """``P[a, b]`` = column of the pair ``{a, b}`` in the upper-triangle basis (-1 on the diagonal)."""
    P = -np.ones((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    P[iu] = np.arange(len(iu[0]))
    P[iu[1], iu[0]] = P[iu]
    return P


def difference_operator_matrix(n: int) -> np.ndarray:
    """Dense ``|T| x C(n,2)`` matrix with rows ``e_{ij} - e_{ik}``."""
    T = enumerate_triplets(n)
    P = pair_index(n)
    A = np.zeros((len(T), n * (n - 1) // 2))
    rows = np.arange(len(T))
    A[rows, P[T[:, 0], T[:, 1]]] = 1.0
    A[rows, P[T[:, 0], T[:, 2]]] = -1.0
    return A


class SpectrumClusterError(AssertionError):
    def __init__(self, n: int, eigenvalues: np.ndarray, reason: str):
        super().__init__(f"n={n}: {reason}; spectrum={np.round(eigenvalues, 10).tolist()}")
        self.eigenvalues = eigenvalues


@dataclass(frozen=True)
class SpectrumReport:
    n: int
    eigenvalues: np.ndarray
    clusters: dict[float, int]
    expected: dict[float, int]
    star_residual: float

    @property
    def ok(self) -> bool:
        return self.clusters == self.expected


def cluster_eigenvalues(w: np.ndarray, tol: float) -> dict[float, int]:
    w = np.sort(w)
    clusters: list[list[float]] = []
    for x in w:
        if clusters and abs(x - clusters[-1][-1]) <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return {float(round(np.mean(c), 6)) + 0.0: len(c) for c in clusters}


def star_matrix(n: int, i: int) -> np.ndarray:
    """``-n (e_i 1^T + 1 e_i^T - 2 e_i e_i^T) + 2 J``, an eigenvector of Delta^T Delta with eigenvalue n."""
    e = np.zeros(n)
    e[i] = 1.0
    one = np.ones(n)
    return -n * (np.outer(e, one) + np.outer(one, e) - 2 * np.outer(e, e)) + 2 * edm.ones_minus_identity(n)


def delta_gram_spectrum(n: int, rtol: float = 1e-8) -> SpectrumReport:
    """Eigenvalues of ``Delta^T Delta``, clustered; raises :class:`SpectrumClusterError` on mismatch."""
    A = difference_operator_matrix(n)
    M = A.T @ A
    w = np.linalg.eigvalsh(M)
    tol = rtol * max(w.max(), 1.0)
    clusters = cluster_eigenvalues(w, tol)
    npairs = n * (n - 1) // 2
    expected = {0.0: 1, float(n): n - 1}
    if npairs - n > 0:
        expected[float(2 * (n - 1))] = npairs - n
    got = {round(k): v for k, v in clusters.items()}
    if any(abs(k - round(k)) > tol for k in clusters) or got != {round(k): v for k, v in expected.items()}:
        raise SpectrumClusterError(n, w, f"expected clusters {expected}, got {clusters}")
    star = max(
        float(np.abs(M @ vec_hollow(star_matrix(n, i)) - n * vec_hollow(star_matrix(n, i))).max())
        for i in range(n)
    )
    return SpectrumReport(n, w[::-1], {float(k): v for k, v in got.items()}, expected, star)


def delta_row_action(D) -> np.ndarray:
    """``Delta^T Delta`` applied to a symmetric hollow ``D``, in closed form.

    ``[.]_ij = 2 (n-1) D_ij - rowsum_i(D) - rowsum_j(D)`` off the diagonal.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    r = D.sum(axis=1)
    out = 2 * (n - 1) * D - r[:, None] - r[None, :]
    np.fill_diagonal(out, 0.0)
    return out


# -- restricted isometry on J^perp ----------------------------------------------------


@dataclass(frozen=True)
class RipReport:
    n: int
    delta_sq: float
    centered_sq: float
    lower_slack: float
    upper_slack: float

    @property
    def holds(self) -> bool:
        return self.lower_slack >= -1e-9 and self.upper_slack >= -1e-9


def rip_check(D1, D2) -> RipReport:
    """Check ``n ||C - C'||^2 <= ||Delta(D) - Delta(D')||^2 <= 2 (n-1) ||C - C'||^2``.

    ``||.||`` on the centered parts is the upper-triangle norm; slacks are signed
    and scaled by ``max(1, ||Delta(D) - Delta(D')||^2)``.
    """
    D1 = np.asarray(D1, dtype=float)
    D2 = np.asarray(D2, dtype=float)
    if D1.shape != D2.shape:
        raise ValueError("distance matrices differ in size")
    n = D1.shape[0]
    diff = delta_vector(D1) - delta_vector(D2)
    mid = float(diff @ diff)
    c = hollow_sq_norm(edm.centered_component(D1).C - edm.centered_component(D2).C)
    scale = max(1.0, mid)
    return RipReport(n, mid, c, (mid - n * c) / scale, (2 * (n - 1) * c - mid) / scale)


def random_edm(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    X = edm.center_embedding(rng.normal(scale=math.sqrt(1 / (2 * d)), size=(n, d)))
    return edm.distance_from_gram(edm.gram_from_embedding(X))


@dataclass
class IsometryRow:
    n: int
    pairs: int
    c1_hat: float = math.nan
    c2_hat: float = math.nan
    ratio: float = math.nan
    c1_centered: float = math.nan
    c2_centered: float = math.nan
    envelope_ok: bool = True
    per_pair: list[tuple[float, float]] = field(default_factory=list, repr=False)


def isometry_ratio_study(n_values, d: int, trials: int, rng: np.random.Generator,
                         pair_sampler: Callable | None = None) -> list[IsometryRow]:
    """Empirical two-sided constants of ``||Delta(D) - Delta(D')||^2`` for random EDM pairs.

    ``c1_hat``/``c2_hat`` normalise by the raw full-matrix ``||D - D'||_F^2``;
    ``c1_centered``/``c2_centered`` by the upper-triangle norm of ``C - C'`` and
    must land in ``[n, 2(n-1)]``. Identical pairs are skipped.
    """
    sampler = pair_sampler or (lambda n, d, rng: (random_edm(n, d, rng), random_edm(n, d, rng)))
    rows = []
    for n in n_values:
        raw, cen = [], []
        row = IsometryRow(n=n, pairs=0)
        for _ in range(trials):
            D1, D2 = sampler(n, d, rng)
            dd = float(((D1 - D2) ** 2).sum())
            if dd == 0.0:
                continue
            rep = rip_check(D1, D2)
            raw.append(rep.delta_sq / dd)
            cen.append(rep.delta_sq / rep.centered_sq)
            envelope = 2 * (n - 1) * rep.centered_sq / dd
            row.per_pair.append((raw[-1], envelope))
            row.envelope_ok &= raw[-1] <= envelope * (1 + 1e-9)
        row.pairs = len(raw)
        if raw:
            row.c1_hat, row.c2_hat = min(raw), max(raw)
            row.ratio = row.c2_hat / row.c1_hat
            row.c1_centered, row.c2_centered = min(cen), max(cen)
        rows.append(row)
    return rows


# -- suite for the CLI --------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _timed(name, fn) -> CheckResult:
    import time

    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except AssertionError as exc:
        ok, detail = False, str(exc)
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def run_suite(seed: int = 0, n_max: int = 9) -> list[CheckResult]:
    """Run every spectral check at desk scale; used by ``ordembed oracle``."""
    rng = np.random.default_rng(seed)
    out = []

    def lt_norms():
        reps = [lt_norm_check(n) for n in range(3, n_max + 2)]
        worst = max(r.max_abs_deviation for r in reps)
        return worst <= 1e-10, f"max | ||L_t|| - sqrt3 | = {worst:.2e}"

    def mean_sq():
        reps = [mean_lt_squared(n) for n in range(3, n_max + 2)]
        worst = max(max(r.norm_deviation, r.entry_deviation) for r in reps)
        return worst <= 1e-10, f"max deviation from 6/(n-1) closed form = {worst:.2e}"

    def spectrum():
        reps = [delta_gram_spectrum(n) for n in range(4, n_max + 1)]
        star = max(r.star_residual for r in reps)
        return all(r.ok for r in reps) and star <= 1e-8, f"clusters exact, star residual {star:.2e}"

    def kernel_identity():
        worst = 0.0
        for _ in range(200):
            n = int(rng.choice([6, 10, 20]))
            d = int(rng.integers(1, 4))
            D = random_edm(n, d, rng)
            comp = edm.centered_component(D)
            lam2 = edm.second_largest_eigenvalue(comp.C)
            worst = max(worst, abs(lam2 - comp.sigma) / max(comp.sigma, 1.0))
        return worst <= 1e-8, f"max |lambda2(C) - sigma_D| (rel) = {worst:.2e}"

    def rip():
        worst = min(
            min(r.lower_slack, r.upper_slack)
            for r in (rip_check(random_edm(8, int(rng.integers(1, 4)), rng),
                                random_edm(8, int(rng.integers(1, 4)), rng)) for _ in range(200))
        )
        return worst >= -1e-9, f"min sandwich slack = {worst:.3g}"

    def signature():
        bad = 0
        for _ in range(100):
            d = int(rng.integers(1, 4))
            rep = edm.edm_validity(random_edm(8, d, rng))
            bad += not (rep.positive_count == 1 and rep.negative_count == d + 1 and rep.nsd_on_1perp)
        return bad == 0, f"{bad} of 100 EDMs with wrong eigenvalue signature"

    out.append(_timed("single-triplet operator norm", lt_norms))
    out.append(_timed("mean squared operator", mean_sq))
    out.append(_timed("difference operator spectrum", spectrum))
    out.append(_timed("kernel coefficient = lambda_2(C)", kernel_identity))
    out.append(_timed("restricted isometry sandwich", rip))
    out.append(_timed("EDM eigenvalue signature", signature))
    return out
