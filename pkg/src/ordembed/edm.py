"""Gram / squared-distance matrix geometry.

Conventions used throughout the package:

* points are stored as an ``(n, d)`` array, one row per item;
* ``J = 11^T - I`` spans the kernel of the triplet-difference map;
* eigenvalues are always reported in *descending* order (``numpy.linalg.eigvalsh``
  returns them ascending, so every helper here flips the result).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

ZERO_TOL = 1e-8


def ones_minus_identity(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.ones((n, n)) / n


def eigvals_desc(M: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(M)[::-1]


def eigh_desc(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, U = np.linalg.eigh(M)
    return w[::-1], U[:, ::-1]


def center_embedding(raw_points) -> np.ndarray:
    """Subtract per-coordinate means so the points are centered at the origin."""
    X = np.atleast_2d(np.asarray(raw_points, dtype=float))
    if X.shape[0] < 1:
        raise ValueError("need at least one point")
    return X - X.mean(axis=0, keepdims=True)


def gram_from_embedding(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X @ X.T


def distance_from_gram(G) -> np.ndarray:
    """Squared distances ``D_ij = G_ii - 2 G_ij + G_jj``."""
    G = np.asarray(G, dtype=float)
    g = np.diag(G)
    D = g[:, None] - 2.0 * G + g[None, :]
    np.fill_diagonal(D, 0.0)
    return D


def gram_from_distance(D) -> np.ndarray:
    """Classical MDS double centering, ``G = -1/2 V D V``."""
    D = np.asarray(D, dtype=float)
    # V D V without forming V
    row = D.mean(axis=1, keepdims=True)
    col = D.mean(axis=0, keepdims=True)
    G = -0.5 * (D - row - col + D.mean())
    return 0.5 * (G + G.T)


def is_centered_gram(G, rtol: float = 1e-8) -> bool:
    G = np.asarray(G, dtype=float)
    scale = max(np.abs(G).max(initial=0.0) * G.shape[0], 1e-300)
    return bool(np.abs(G.sum(axis=1)).max(initial=0.0) <= rtol * scale)


def is_psd(M, rtol: float = 1e-8) -> bool:
    w = np.linalg.eigvalsh(np.asarray(M, dtype=float))
    return bool(w[0] >= -rtol * max(w[-1], 0.0))


@dataclass(frozen=True)
class CenteredComponent:
    """Split ``D = C + sigma * J`` with ``C`` orthogonal to ``J``."""

    C: np.ndarray
    sigma: float


def centered_component(D) -> CenteredComponent:
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    J = ones_minus_identity(n)
    # trace(D J) / ||J||_F^2 is the mean off-diagonal entry
    sigma = float((D * J).sum() / (n * (n - 1))) if n > 1 else 0.0
    return CenteredComponent(C=D - sigma * J, sigma=sigma)


def second_largest_eigenvalue(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        raise ValueError(f"need a square matrix with n >= 2, got shape {M.shape}")
    return float(eigvals_desc(0.5 * (M + M.T))[1])


@dataclass(frozen=True)
class Recovery:
    D: np.ndarray
    lambda2: float
    negative_entries: int

    @property
    def suspicious(self) -> bool:
        """lambda2 < 0 cannot happen for a genuine EDM with n > d + 2."""
        return self.lambda2 < 0


def recover_distance_report(C) -> Recovery:
    C = np.asarray(C, dtype=float)
    lam2 = second_largest_eigenvalue(C)
    D = C + lam2 * ones_minus_identity(C.shape[0])
    off = ~np.eye(C.shape[0], dtype=bool)
    return Recovery(D=D, lambda2=lam2, negative_entries=int((D[off] < 0).sum()))


def recover_distance(C) -> np.ndarray:
    """Undo the kernel projection: ``D = C + lambda_2(C) J``.

    Exact whenever ``C`` comes from the squared distances of ``n`` points in
    ``R^d`` with ``n > d + 2``. Noisy inputs may yield negative entries; they
    are left in place (see :func:`recover_distance_report`).
    """
    rec = recover_distance_report(C)
    if rec.suspicious:
        warnings.warn(
            f"lambda_2(C) = {rec.lambda2:.3g} < 0; input is not the centered part "
            "of a low-rank EDM",
            RuntimeWarning,
            stacklevel=2,
        )
    return rec.D


def recover_gram(C) -> np.ndarray:
    return gram_from_distance(recover_distance(C))


def kernel_correct(G) -> np.ndarray:
    """Re-estimate ``G`` from the kernel-free part of its distance matrix."""
    return recover_gram(centered_component(distance_from_gram(G)).C)


@dataclass(frozen=True)
class EDMReport:
    positive_count: int
    zero_count: int
    negative_count: int
    nsd_on_1perp: bool

    @property
    def rank(self) -> int:
        return self.positive_count + self.negative_count

    @property
    def valid(self) -> bool:
        if self.rank == 0:
            return self.nsd_on_1perp
        return self.positive_count == 1 and self.nsd_on_1perp


def orthonormal_complement_of_ones(n: int) -> np.ndarray:
    """An ``n x (n-1)`` matrix with orthonormal columns spanning ``1^perp``."""
    # the trailing n-1 columns of a Householder-style QR of [1 | I]
    Q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
    return Q[:, 1:]


def edm_validity(D, tol: float = ZERO_TOL) -> EDMReport:
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    w = eigvals_desc(0.5 * (D + D.T))
    scale = np.abs(w).max(initial=0.0)
    thr = tol * scale
    pos = int((w > thr).sum())
    neg = int((w < -thr).sum())
    if n > 1:
        P = orthonormal_complement_of_ones(n)
        top = float(np.linalg.eigvalsh(P.T @ D @ P)[-1])
        nsd = top <= thr
    else:
        nsd = True
    return EDMReport(positive_count=pos, zero_count=n - pos - neg, negative_count=neg,
                     nsd_on_1perp=bool(nsd))
