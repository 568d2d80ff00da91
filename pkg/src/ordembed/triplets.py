"""Triplet index space, the comparison operators and the noisy observation model.

A triplet ``(i, j, k)`` asks whether item ``i`` is closer to ``j`` than to
``k``. Canonical triplets have ``j < k``; all indices are 0-based. Bulk
routines take an ``(m, 3)`` integer array of triplets.

Label convention: ``y = -1`` with probability ``f(D_ij - D_ik)``, so with a
decreasing link ``y = -1`` is the likely answer when ``j`` is the closer item.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, NamedTuple

import numpy as np


class Triplet(NamedTuple):
    i: int
    j: int
    k: int

    @classmethod
    def canonical(cls, i: int, j: int, k: int) -> "Triplet":
        if len({i, j, k}) != 3:
            raise ValueError(f"triplet indices must be distinct, got {(i, j, k)}")
        if j > k:
            j, k = k, j
        return cls(int(i), int(j), int(k))


class TripletObservation(NamedTuple):
    triplet: Triplet
    y: int


def triplet_count(n: int) -> int:
    return n * comb(n - 1, 2)


def enumerate_triplets(n: int) -> np.ndarray:
    """All canonical triplets in lexicographic ``(i, j, k)`` order, shape ``(n C(n-1,2), 3)``."""
    if n < 3:
        raise ValueError(f"need n >= 3 items, got {n}")
    j, k = np.triu_indices(n, 1)
    out = []
    for i in range(n):
        keep = (j != i) & (k != i)
        out.append(np.column_stack([np.full(keep.sum(), i), j[keep], k[keep]]))
    return np.concatenate(out).astype(np.int64)


def _check_indices(t: np.ndarray, n: int) -> None:
    if t.size and (t.min() < 0 or t.max() >= n):
        raise IndexError(f"triplet index out of range for n={n}")


def lt_apply(t, G) -> np.ndarray | float:
    """``G_jj - 2 G_ij - G_kk + 2 G_ik`` for one triplet or an ``(m, 3)`` batch."""
    G = np.asarray(G, dtype=float)
    t = np.asarray(t, dtype=np.int64)
    _check_indices(t, G.shape[0])
    i, j, k = t[..., 0], t[..., 1], t[..., 2]
    out = G[j, j] - 2.0 * G[i, j] - G[k, k] + 2.0 * G[i, k]
    return float(out) if out.ndim == 0 else out


def delta_apply(t, D) -> np.ndarray | float:
    """``D_ij - D_ik`` for one triplet or an ``(m, 3)`` batch."""
    D = np.asarray(D, dtype=float)
    t = np.asarray(t, dtype=np.int64)
    _check_indices(t, D.shape[0])
    out = D[t[..., 0], t[..., 1]] - D[t[..., 0], t[..., 2]]
    return float(out) if out.ndim == 0 else out


def lt_matrix(t, n: int) -> np.ndarray:
    """Dense symmetric matrix ``L_t`` with ``<L_t, G> = lt_apply(t, G)``."""
    i, j, k = (int(v) for v in t)
    _check_indices(np.array([i, j, k]), n)
    L = np.zeros((n, n))
    L[j, j] = 1.0
    L[k, k] = -1.0
    L[i, j] = L[j, i] = -1.0
    L[i, k] = L[k, i] = 1.0
    return L


def l_vector(G) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    return lt_apply(enumerate_triplets(G.shape[0]), G)


def delta_vector(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    return delta_apply(enumerate_triplets(D.shape[0]), D)


def sample_triplets(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` i.i.d. uniform draws (with replacement) of canonical triplets."""
    if n < 3:
        raise ValueError(f"need n >= 3 items, got {n}")
    i = rng.integers(n, size=m)
    # two distinct items from the n-1 others, then skip over i
    a = rng.integers(n - 1, size=m)
    b = rng.integers(n - 2, size=m)
    b = b + (b >= a)
    a = a + (a >= i)
    b = b + (b >= i)
    return np.column_stack([i, np.minimum(a, b), np.maximum(a, b)]).astype(np.int64)


@dataclass(frozen=True)
class LinkFunction:
    """Maps a margin ``D_ij - D_ik`` to ``P(y = -1)``."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    f_deriv: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return self.f(x)


def _logistic(x):
    # 1 / (1 + e^x), evaluated without overflow
    return np.exp(-np.logaddexp(0.0, x))


def _logistic_deriv(x):
    p = _logistic(x)
    return -p * (1.0 - p)


def logistic_link() -> LinkFunction:
    return LinkFunction("logistic", _logistic, _logistic_deriv)


def _step(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 1.0, np.where(x > 0, 0.0, 0.5))


def noiseless_link() -> LinkFunction:
    """Deterministic answers: the closer item always wins (ties are a coin flip)."""
    return LinkFunction("noiseless", _step, lambda x: np.zeros_like(np.asarray(x, dtype=float)))


def scaled_logistic_link(scale: float) -> LinkFunction:
    """``f(x) = 1 / (1 + exp(scale * x))``; larger scale means less noise."""
    return LinkFunction(
        f"logistic*{scale:g}",
        lambda x: _logistic(scale * np.asarray(x, dtype=float)),
        lambda x: scale * _logistic_deriv(scale * np.asarray(x, dtype=float)),
    )


LINKS = {"logistic": logistic_link, "noiseless": noiseless_link}


def get_link(name: str) -> LinkFunction:
    try:
        return LINKS[name]()
    except KeyError:
        raise ValueError(f"unknown link {name!r}; choose from {sorted(LINKS)}") from None


def observe(t, G_star, link: LinkFunction, rng: np.random.Generator):
    """Draw noisy labels for one triplet (returns a TripletObservation) or a batch (returns labels)."""
    t_arr = np.asarray(t, dtype=np.int64)
    p = np.asarray(link(lt_apply(t_arr, G_star)), dtype=float)
    y = np.where(rng.random(p.shape) < p, -1, 1).astype(np.int64)
    if t_arr.ndim == 1:
        return TripletObservation(Triplet(*(int(v) for v in t_arr)), int(y))
    return y


@dataclass
class Dataset:
    """Triplets with their labels; ``triplets`` is ``(m, 3)``, ``y`` is ``(m,)`` in {-1, +1}."""

    n: int
    triplets: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.triplets = np.asarray(self.triplets, dtype=np.int64).reshape(-1, 3)
        self.y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if len(self.triplets) != len(self.y):
            raise ValueError("triplets and labels differ in length")
        _check_indices(self.triplets, self.n)
        if not np.isin(self.y, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")

    def __len__(self) -> int:
        return len(self.y)

    def __iter__(self):
        for t, y in zip(self.triplets, self.y):
            yield TripletObservation(Triplet(*(int(v) for v in t)), int(y))

    @classmethod
    def from_observations(cls, n: int, observations) -> "Dataset":
        obs = list(observations)
        t = np.array([o.triplet for o in obs], dtype=np.int64).reshape(-1, 3)
        return cls(n, t, np.array([o.y for o in obs], dtype=np.int64))


def simulate(G_star, m: int, link: LinkFunction, rng: np.random.Generator) -> Dataset:
    """Sample ``m`` triplets uniformly and label them under ``link``."""
    n = np.asarray(G_star).shape[0]
    t = sample_triplets(n, m, rng)
    return Dataset(n, t, observe(t, G_star, link, rng))
