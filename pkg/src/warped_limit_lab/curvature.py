"""Diagonal Ricci curvature of the doubly warped product.

In the orthonormal directions H (radial), U (tangent to the sphere factor)
and V (tangent to the circle factor):

    Ric(H,H) = -h''/h - (p-1) f''/f
    Ric(U,U) = -f''/f + (p-2) [1-(f')^2]/f^2 - f'h'/(f h)
    Ric(V,V) = -h''/h - (p-1) f'h'/(f h)

The scan utilities verify positivity on a grid together with the two
closed-form lower bounds

    Ric(H,H) > r^2/(1+r^2)^2 * [(p-1)/4 - (2 alpha + 4 alpha^2)]
    Ric(V,V) > alpha r^2/(1+r^2)^2 * [p - (3 + 4 alpha)]

which hold for these profiles; the brackets are nonnegative exactly when
p >= max(4 alpha + 3, 16 alpha^2 + 8 alpha + 1), the threshold implemented by
dimension_threshold().
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .warp import WarpParams

__all__ = [
    "RicciDiag",
    "ricci_diag",
    "limit_at_origin",
    "dimension_threshold",
    "positivity_scan",
    "PositivityScan",
    "ricci_components",
    "bound_rhs_radial",
    "bound_rhs_circle",
    "default_scan_grid",
]


@dataclass(frozen=True)
class RicciDiag:
    """The three diagonal Ricci values at one radius."""

    r: float
    ric_H: float
    ric_U: float
    ric_V: float


# The four ratios entering the Ricci diagonal, reduced in w = r^2 so they
# stay exact through the removable singularity at the axis:
#   f''/f            = -(6+w) / (4 (1+w)^2)
#   (1-(f')^2)/f^2   = [(1+w)^(5/2) - (1+w/2)^2] / (w (1+w)^2)
#   f'h'/(f h)       = -2a (1+w/2) / (1+w)^2
#   h''/h            = -2a (1-(2a+1) w) / (1+w)^2

def _ratio_f2_over_f(w):
    return -(6.0 + w) / (4.0 * (1.0 + w) ** 2)


def _ratio_sphere_gap(w):
    # numerator (1+w)^(5/2) - 1 - w - w^2/4 via expm1 to keep the leading
    # (3/2) w term exact for tiny w
    num = np.expm1(2.5 * np.log1p(w)) - w - 0.25 * w * w
    w_safe = np.where(w > 0, w, 1.0)
    return np.where(w > 0, num / (w_safe * (1.0 + w) ** 2), 1.5)


def _ratio_cross(alpha, w):
    return -2.0 * alpha * (1.0 + 0.5 * w) / (1.0 + w) ** 2


def _ratio_h2_over_h(alpha, w):
    return -2.0 * alpha * (1.0 - (2.0 * alpha + 1.0) * w) / (1.0 + w) ** 2


def ricci_components(params: WarpParams, r):
    """Vectorized (ric_H, ric_U, ric_V) for r > 0."""
    r = np.asarray(r, dtype=float)
    p, a = params.p, params.alpha
    w = r * r
    f2_over_f = _ratio_f2_over_f(w)
    cross = _ratio_cross(a, w)
    h2_over_h = _ratio_h2_over_h(a, w)
    ric_H = -h2_over_h - (p - 1) * f2_over_f
    ric_U = -f2_over_f + (p - 2) * _ratio_sphere_gap(w) - cross
    ric_V = -h2_over_h - (p - 1) * cross
    return ric_H, ric_U, ric_V


def ricci_diag(params: WarpParams, r: float) -> RicciDiag:
    """Diagonal Ricci curvature at radius r > 0.

    The expressions contain 1/f and 1/f^2; use limit_at_origin() for r = 0.
    """
    if not (isinstance(r, (int, float)) and math.isfinite(r)):
        raise ValueError(f"r must be a finite real, got {r!r}")
    if r <= 0:
        raise ValueError("r must be positive; the r -> 0 values are provided by limit_at_origin()")
    ric_H, ric_U, ric_V = ricci_components(params, r)
    return RicciDiag(r=float(r), ric_H=float(ric_H), ric_U=float(ric_U), ric_V=float(ric_V))


def limit_at_origin(params: WarpParams) -> RicciDiag:
    """Ricci values in the limit r -> 0+, from series coefficients.

    Near r = 0: f = r - (r^3)/4 + O(r^5) and h = 1 - alpha r^2 + O(r^4), so
    f''/f -> -3/2, (1-(f')^2)/f^2 -> 3/2 and f'h'/(f h) -> -2 alpha = h''(0).
    Both ric_H and ric_U converge to 3(p-1)/2 + 2 alpha, and ric_V to
    2 alpha p.
    """
    p, a = params.p, params.alpha
    axis = 1.5 * (p - 1) + 2.0 * a
    return RicciDiag(r=0.0, ric_H=axis, ric_U=axis, ric_V=2.0 * a * p)


def dimension_threshold(alpha: float) -> int:
    """Least integer p with p >= max(4 alpha + 3, 16 alpha^2 + 8 alpha + 1)."""
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha > 0):
        raise ValueError(f"alpha must be a positive finite real, got {alpha!r}")
    bound = max(4.0 * alpha + 3.0, 16.0 * alpha * alpha + 8.0 * alpha + 1.0)
    # guard against ceil() lifting an exactly attained integer bound
    p = math.ceil(bound - 1e-9)
    return max(p, 2)


def bound_rhs_radial(params: WarpParams, r):
    """Closed-form lower bound for ric_H."""
    r = np.asarray(r, dtype=float)
    a = params.alpha
    return r * r / (1.0 + r * r) ** 2 * ((params.p - 1) / 4.0 - (2.0 * a + 4.0 * a * a))


def bound_rhs_circle(params: WarpParams, r):
    """Closed-form lower bound for ric_V."""
    r = np.asarray(r, dtype=float)
    a = params.alpha
    return a * r * r / (1.0 + r * r) ** 2 * (params.p - (3.0 + 4.0 * a))


def default_scan_grid(r_min: float = 1e-3, r_max: float = 1e4, n: int = 500) -> np.ndarray:
    """Log-spaced scan grid covering the near-axis and asymptotic regimes."""
    return np.geomspace(r_min, r_max, n)


@dataclass
class PositivityScan:
    """Grid scan of the three Ricci components and the two lower bounds.

    `all_positive` reflects what the scan actually saw.  When p is below the
    dimension threshold the sufficient condition fails but the components may
    still scan positive; `nonpositive_components` lists the offenders when
    they exist.
    """

    alpha: float
    p: int
    grid_min: float
    grid_max: float
    grid_size: int
    min_ric_H: float
    argmin_r_H: float
    min_ric_U: float
    argmin_r_U: float
    min_ric_V: float
    argmin_r_V: float
    min_margin_bound_H: float
    min_margin_bound_V: float
    bounds_ok: bool
    threshold_ok: bool
    all_positive: bool
    nonpositive_components: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.all_positive and self.bounds_ok

    def to_dict(self) -> dict:
        d = {
            "alpha": self.alpha,
            "p": self.p,
            "grid_spec": {
                "min": self.grid_min,
                "max": self.grid_max,
                "n": self.grid_size,
                "spacing": "log",
            },
            "min_ric_H": self.min_ric_H,
            "argmin_r_H": self.argmin_r_H,
            "min_ric_U": self.min_ric_U,
            "argmin_r_U": self.argmin_r_U,
            "min_ric_V": self.min_ric_V,
            "argmin_r_V": self.argmin_r_V,
            "min_margin_bound_H": self.min_margin_bound_H,
            "min_margin_bound_V": self.min_margin_bound_V,
            "bounds_ok": self.bounds_ok,
            "threshold_ok": self.threshold_ok,
            "all_positive": self.all_positive,
            "nonpositive_components": list(self.nonpositive_components),
            "pass": self.passed,
        }
        return d


def positivity_scan(params: WarpParams, r_grid) -> PositivityScan:
    """Evaluate the Ricci diagonal over a grid of positive radii.

    Records the minimum of each component with its location, and checks that
    the two displayed lower bounds hold strictly at every grid point.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.size == 0:
        raise ValueError("scan grid must be nonempty")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise ValueError("scan grid entries must be positive finite reals")

    ric_H, ric_U, ric_V = ricci_components(params, r)
    margin_H = ric_H - bound_rhs_radial(params, r)
    margin_V = ric_V - bound_rhs_circle(params, r)

    mins = {}
    for name, vals in (("H", ric_H), ("U", ric_U), ("V", ric_V)):
        i = int(np.argmin(vals))
        mins[name] = (float(vals[i]), float(r[i]))

    nonpositive = [name for name in ("H", "U", "V") if mins[name][0] <= 0.0]
    return PositivityScan(
        alpha=params.alpha,
        p=params.p,
        grid_min=float(r.min()),
        grid_max=float(r.max()),
        grid_size=int(r.size),
        min_ric_H=mins["H"][0],
        argmin_r_H=mins["H"][1],
        min_ric_U=mins["U"][0],
        argmin_r_U=mins["U"][1],
        min_ric_V=mins["V"][0],
        argmin_r_V=mins["V"][1],
        min_margin_bound_H=float(margin_H.min()),
        min_margin_bound_V=float(margin_V.min()),
        bounds_ok=bool(np.all(margin_H > 0.0) and np.all(margin_V > 0.0)),
        threshold_ok=params.p >= dimension_threshold(params.alpha),
        all_positive=len(nonpositive) == 0,
        nonpositive_components=nonpositive,
    )
