"""Warping profiles of the doubly warped product metric.

The metric on [0, inf) x S^(p-1) x S^1 is

    dr^2 + f(r)^2 ds_{p-1}^2 + h(r)^2 ds_1^2,

with f(r) = r (1+r^2)^(-1/4) and h(r) = (1+r^2)^(-alpha).  This module
evaluates f, h and their first two derivatives from hand-derived closed
forms; the finite-difference cross-checks live in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WarpParams",
    "WarpEval",
    "eval_profiles",
    "circle_length",
    "f_profile",
    "f_profile_d1",
    "f_profile_d2",
    "h_profile",
    "h_profile_d1",
    "h_profile_d2",
]


@dataclass(frozen=True)
class WarpParams:
    """One metric of the family: decay exponent alpha > 0, sphere factor S^(p-1)."""

    alpha: float
    p: int

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a finite real, got {self.alpha!r}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise ValueError(f"p must be an integer, got {self.p!r}")
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")

    @property
    def beta(self) -> float:
        """Dimension offset of the singular orbit: beta = 2*alpha."""
        return 2.0 * self.alpha

    @property
    def growth_exponent(self) -> float:
        """Exponent 1/(1+2*alpha) of the winding-distance growth law."""
        return 1.0 / (1.0 + 2.0 * self.alpha)


# Closed-form profiles.  All accept scalars or numpy arrays and are even in r
# (they depend on r only through r^2), which is what makes the even extension
# of the reduced plane to r < 0 smooth.

def f_profile(r):
    r = np.asarray(r, dtype=float)
    return r * (1.0 + r * r) ** -0.25


def f_profile_d1(r):
    """f'(r) = (1 + r^2/2) (1+r^2)^(-5/4)."""
    r = np.asarray(r, dtype=float)
    return (1.0 + 0.5 * r * r) * (1.0 + r * r) ** -1.25


def f_profile_d2(r):
    """f''(r) = -(r/4) (6 + r^2) (1+r^2)^(-9/4)."""
    r = np.asarray(r, dtype=float)
    return -0.25 * r * (6.0 + r * r) * (1.0 + r * r) ** -2.25


def h_profile(alpha, r):
    r = np.asarray(r, dtype=float)
    return (1.0 + r * r) ** (-alpha)


def h_profile_d1(alpha, r):
    """h'(r) = -2 alpha r (1+r^2)^(-alpha-1)."""
    r = np.asarray(r, dtype=float)
    return -2.0 * alpha * r * (1.0 + r * r) ** (-alpha - 1.0)


def h_profile_d2(alpha, r):
    """h''(r) = -2 alpha (1 - (2 alpha + 1) r^2) (1+r^2)^(-alpha-2)."""
    r = np.asarray(r, dtype=float)
    return -2.0 * alpha * (1.0 - (2.0 * alpha + 1.0) * r * r) * (1.0 + r * r) ** (-alpha - 2.0)


@dataclass(frozen=True)
class WarpEval:
    """f, h and their first two derivatives at one radius."""

    r: float
    f: float
    f1: float
    f2: float
    h: float
    h1: float
    h2: float


def eval_profiles(params: WarpParams, r: float) -> WarpEval:
    """Evaluate both profiles and their derivatives at r >= 0.

    The f-derivatives do not depend on alpha; the h-derivatives do.
    """
    if not math.isfinite(r):
        raise ValueError(f"r must be finite, got {r!r}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    a = params.alpha
    return WarpEval(
        r=float(r),
        f=float(f_profile(r)),
        f1=float(f_profile_d1(r)),
        f2=float(f_profile_d2(r)),
        h=float(h_profile(a, r)),
        h1=float(h_profile_d1(a, r)),
        h2=float(h_profile_d2(a, r)),
    )


def circle_length(params: WarpParams, r: float) -> float:
    """Length 2*pi*h(r) of the circle fiber at radius r; strictly decreasing."""
    if not math.isfinite(r):
        raise ValueError(f"r must be finite, got {r!r}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    return float(2.0 * math.pi * h_profile(params.alpha, r))
