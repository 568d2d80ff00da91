"""Losses, empirical / population risk and their gradients over Gram matrices.

The margin of an observation ``(t, y)`` under ``G`` is ``y * <L_t, G>``; a
prediction is correct iff the margin is strictly positive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .triplets import Dataset, LinkFunction, enumerate_triplets, l_vector, lt_apply


class LossKind(str, enum.Enum):
    ZERO_ONE = "zero_one"
    HINGE = "hinge"
    LOGISTIC = "logistic"


def loss_value(kind, margin):
    kind = LossKind(kind)
    z = np.asarray(margin, dtype=float)
    if kind is LossKind.ZERO_ONE:
        out = (z <= 0).astype(float)
    elif kind is LossKind.HINGE:
        out = np.maximum(0.0, 1.0 - z)
    else:
        # log(1 + e^-z) = max(-z, 0) + log(1 + e^-|z|)
        out = np.logaddexp(0.0, -z)
    return float(out) if out.ndim == 0 else out


def loss_derivative(kind, margin):
    """d loss / d margin; the hinge kink at 1 resolves to 0."""
    kind = LossKind(kind)
    z = np.asarray(margin, dtype=float)
    if kind is LossKind.ZERO_ONE:
        raise ValueError("zero-one loss has no useful gradient")
    if kind is LossKind.HINGE:
        return np.where(z < 1.0, -1.0, 0.0)
    return -np.exp(-np.logaddexp(0.0, z))


def _require_nonempty(data: Dataset, what: str = "data") -> None:
    if len(data) == 0:
        raise ValueError(f"{what} has no observations")


def margins(data: Dataset, G) -> np.ndarray:
    return data.y * lt_apply(data.triplets, G)


def empirical_risk(data: Dataset, G, kind=LossKind.LOGISTIC) -> float:
    _require_nonempty(data)
    return float(np.mean(loss_value(kind, margins(data, G))))


def accumulate_lt(triplets: np.ndarray, coef: np.ndarray, n: int) -> np.ndarray:
    """``sum_t coef_t L_t`` as a dense symmetric matrix."""
    i, j, k = triplets[:, 0], triplets[:, 1], triplets[:, 2]
    idx = np.concatenate([j * n + j, k * n + k, i * n + j, j * n + i, i * n + k, k * n + i])
    val = np.concatenate([coef, -coef, -coef, -coef, coef, coef])
    return np.bincount(idx, weights=val, minlength=n * n).reshape(n, n)


def empirical_risk_gradient(data: Dataset, G, kind=LossKind.LOGISTIC) -> np.ndarray:
    _require_nonempty(data)
    z = margins(data, G)
    coef = data.y * loss_derivative(kind, z) / len(data)
    return accumulate_lt(data.triplets, coef, data.n)


class EmpiricalObjective:
    """Empirical risk with repeated (triplet, label) pairs merged into weights.

    Sampling with replacement makes duplicates common once ``|S|`` is large
    relative to ``|T|``; merging them keeps each evaluation ``O(#unique)``.
    """

    def __init__(self, data: Dataset, kind=LossKind.LOGISTIC):
        _require_nonempty(data)
        self.kind = LossKind(kind)
        self.n = data.n
        n = data.n
        key = ((data.triplets[:, 0] * n + data.triplets[:, 1]) * n + data.triplets[:, 2]) * 2 + (data.y > 0)
        uniq, counts = np.unique(key, return_counts=True)
        pos = uniq % 2
        rest = uniq // 2
        k = rest % n
        rest //= n
        self.triplets = np.column_stack([rest // n, rest % n, k])
        self.y = np.where(pos == 1, 1, -1)
        self.weights = counts / len(data)

    def margins(self, G) -> np.ndarray:
        return self.y * lt_apply(self.triplets, G)

    def value(self, G) -> float:
        return float(self.weights @ loss_value(self.kind, self.margins(G)))

    def value_and_grad(self, G) -> tuple[float, np.ndarray]:
        z = self.margins(G)
        val = float(self.weights @ loss_value(self.kind, z))
        coef = self.weights * self.y * loss_derivative(self.kind, z)
        return val, accumulate_lt(self.triplets, coef, self.n)

    def value_on_margins(self, raw: np.ndarray) -> float:
        """Risk given precomputed ``<L_t, G>`` for each unique triplet."""
        return float(self.weights @ loss_value(self.kind, self.y * raw))


def label_probabilities(G_star, link: LinkFunction) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate ``T`` and return ``(triplets, p_t = P(y_t = -1))``."""
    T = enumerate_triplets(np.asarray(G_star).shape[0])
    return T, np.asarray(link(lt_apply(T, G_star)), dtype=float)


def true_risk(G, G_star, link: LinkFunction, kind=LossKind.LOGISTIC) -> float:
    T, p = label_probabilities(G_star, link)
    m = lt_apply(T, G)
    return float(np.mean(p * loss_value(kind, -m) + (1.0 - p) * loss_value(kind, m)))


def bayes_error(G_star, link: LinkFunction) -> float:
    _, p = label_probabilities(G_star, link)
    return float(np.mean(np.minimum(p, 1.0 - p)))


_P_FLOOR = 1e-300


def nll_loss(link: LinkFunction, y, margin):
    """Negative log-likelihood of label ``y`` when ``<L_t, G> = margin``."""
    y = np.asarray(y)
    m = np.asarray(margin, dtype=float)
    if link.name == "logistic":
        # exact: -log f(m) = log(1 + e^m), -log(1 - f(m)) = log(1 + e^-m)
        out = np.logaddexp(0.0, -y * m)
    else:
        p = np.asarray(link(m), dtype=float)
        q = np.where(y < 0, p, 1.0 - p)
        out = -np.log(np.maximum(q, _P_FLOOR))
    return float(out) if out.ndim == 0 else out


def nll_risk(G, G_star, link: LinkFunction) -> float:
    T, p = label_probabilities(G_star, link)
    m = lt_apply(T, G)
    return float(np.mean(p * nll_loss(link, -1, m) + (1.0 - p) * nll_loss(link, 1, m)))


@dataclass(frozen=True)
class ConstraintSet:
    """PSD matrices with nuclear norm <= ``lam`` and max-abs entry <= ``gamma``."""

    lam: float
    gamma: float

    def __post_init__(self):
        if not (self.lam > 0 and self.gamma > 0):
            raise ValueError("lam and gamma must be positive")

    def contains(self, G, tol: float = 1e-9) -> bool:
        G = np.asarray(G, dtype=float)
        w = np.linalg.eigvalsh(0.5 * (G + G.T))
        scale = max(abs(w).max(initial=0.0), 1.0)
        return bool(
            w[0] >= -tol * scale
            and w.clip(min=0).sum() <= self.lam * (1 + tol)
            and np.abs(G).max(initial=0.0) <= self.gamma * (1 + tol)
        )


def logistic_cf(gamma: float) -> float:
    """Lower bound on ``|f'|`` over margins ``|m| <= 6 gamma`` for the logistic link."""
    return 0.25 * np.exp(-6.0 * gamma)


@dataclass(frozen=True)
class GapReport:
    lhs: float
    rhs: float
    cf: float
    cf_sampled: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


def excess_risk_gap(G, G_star, link: LinkFunction, constraints: ConstraintSet) -> GapReport:
    """Compare ``2 C_f^2 / |T| * ||L(G) - L(G*)||^2`` with the NLL excess risk.

    ``C_f`` is the closed form ``exp(-6 gamma) / 4`` for the logistic link;
    for other links the smallest ``|f'|`` seen at the margins of ``G`` and
    ``G*`` is used instead.
    """
    lg, ls = l_vector(G), l_vector(G_star)
    sampled = float(np.abs(link.f_deriv(np.concatenate([lg, ls]))).min())
    cf = logistic_cf(constraints.gamma) if link.name == "logistic" else sampled
    diff = lg - ls
    lhs = 2.0 * cf**2 / len(lg) * float(diff @ diff)
    rhs = nll_risk(G, G_star, link) - nll_risk(G_star, G_star, link)
    return GapReport(lhs=lhs, rhs=rhs, cf=cf, cf_sampled=sampled)


def prediction_error(G, holdout: Dataset) -> float:
    _require_nonempty(holdout, "holdout")
    return float(np.mean(margins(holdout, G) <= 0))
