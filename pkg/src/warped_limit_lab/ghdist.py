"""Finite-metric-space comparisons: correspondence distortion and
small-instance Gromov-Hausdorff style bounds.

Only one-sided bounds are needed downstream: explicit correspondences
(chart maps give them for free) yield upper bounds via half the
distortion, and the diameter gap yields a cheap lower bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FiniteMetricSpace",
    "Correspondence",
    "correspondence_distortion",
    "gh_upper_bijection",
    "gh_lower_diam",
]

_TRIANGLE_SLACK = 1e-9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A symmetric nonnegative distance matrix with zero diagonal.

    Construction validates symmetry, the diagonal, and the triangle
    inequality to 1e-9 slack on all triples.
    """

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "d", d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] == 0:
            raise ValueError("metric space must be nonempty")
        if not np.all(np.isfinite(d)):
            raise ValueError("distances must be finite")
        if np.any(d < 0):
            raise ValueError("distances must be nonnegative")
        if np.any(np.abs(np.diagonal(d)) > 0):
            raise ValueError("diagonal must be zero")
        if not np.allclose(d, d.T, rtol=0.0, atol=1e-12 * (1.0 + d.max())):
            raise ValueError("distance matrix must be symmetric")
        # d[i,j] <= min_k d[i,k] + d[k,j], allowing 1e-9 slack
        via = np.min(d[:, None, :] + d.T[None, :, :], axis=2)
        if np.any(d > via + _TRIANGLE_SLACK):
            i, j = np.unravel_index(int(np.argmax(d - via)), d.shape)
            raise ValueError(
                f"triangle inequality violated at ({i},{j}): "
                f"{d[i, j]} > {via[i, j]} + {_TRIANGLE_SLACK}"
            )

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.d.max())


@dataclass(frozen=True)
class Correspondence:
    """Index pairs (i, j) covering all points of both spaces."""

    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))

    @staticmethod
    def identity(n: int) -> "Correspondence":
        return Correspondence(tuple((i, i) for i in range(n)))

    def transpose(self) -> "Correspondence":
        return Correspondence(tuple((j, i) for i, j in self.pairs))

    def validate(self, n_a: int, n_b: int):
        ia = {i for i, _ in self.pairs}
        ib = {j for _, j in self.pairs}
        if ia != set(range(n_a)) or ib != set(range(n_b)):
            raise ValueError("correspondence must cover every index of both spaces")
        for i, j in self.pairs:
            if not (0 <= i < n_a and 0 <= j < n_b):
                raise ValueError(f"pair ({i},{j}) out of range")


def correspondence_distortion(A: FiniteMetricSpace, B: FiniteMetricSpace,
                              corr: Correspondence) -> float:
    """max |d_A(i,i') - d_B(j,j')| over pairs of correspondence pairs."""
    corr.validate(A.n, B.n)
    ia = np.array([i for i, _ in corr.pairs])
    ib = np.array([j for _, j in corr.pairs])
    sub_a = A.d[np.ix_(ia, ia)]
    sub_b = B.d[np.ix_(ib, ib)]
    return float(np.max(np.abs(sub_a - sub_b)))


def _bijection_distortion(A: FiniteMetricSpace, B: FiniteMetricSpace, perm) -> float:
    p = np.asarray(perm)
    return float(np.max(np.abs(A.d - B.d[np.ix_(p, p)])))


def gh_upper_bijection(A: FiniteMetricSpace, B: FiniteMetricSpace,
                       budget: int = 2000, seed: int = 0) -> float:
    """Half the best bijection distortion found; an upper bound for dGH.

    Exhaustive for n <= 8; beyond that a seeded swap-move local search with
    a fixed iteration budget (deterministic given the seed).
    """
    if A.n != B.n:
        raise ValueError(f"spaces must have equal size, got {A.n} and {B.n}")
    n = A.n
    if n <= 8:
        best = min(
            _bijection_distortion(A, B, perm)
            for perm in itertools.permutations(range(n))
        )
        return 0.5 * best
    rng = np.random.default_rng(seed)
    best_perm = np.arange(n)
    best = _bijection_distortion(A, B, best_perm)
    for start in range(3):
        perm = np.arange(n) if start == 0 else rng.permutation(n)
        cur = _bijection_distortion(A, B, perm)
        for _ in range(budget):
            i, j = rng.integers(0, n, size=2)
            if i == j:
                continue
            perm[i], perm[j] = perm[j], perm[i]
            cand = _bijection_distortion(A, B, perm)
            if cand <= cur:
                cur = cand
            else:
                perm[i], perm[j] = perm[j], perm[i]
        if cur < best:
            best, best_perm = cur, perm.copy()
    return 0.5 * best


def gh_lower_diam(A: FiniteMetricSpace, B: FiniteMetricSpace) -> float:
    """Classical lower bound: half the diameter gap."""
    return 0.5 * abs(A.diameter - B.diameter)
