"""Blow-down limit probes: the rescaled orbit metric, its box-counting
dimension, and the flat structure away from the orbit.

Rescaling the cover by the distance D(L) of a large reference winding L
turns the deck orbit into a line with a snowflaked metric
d_hat(b) ~ b**(1/(1+2*alpha)); its box-counting dimension is therefore
1 + 2*alpha, the computable surrogate for the Hausdorff dimension (the
two agree for snowflaked lines, which is what the analytic oracle
calibrates).  Away from the orbit the rescaled space looks Euclidean:
a chart around a far point certifies that via correspondence distortion,
and distances between far points at scaled radii collapse to the
half-line distance |a - b|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geodesy import SolverError, WarpedPlane, cover_distance, point_distance, quotient_distance
from .ghdist import Correspondence, FiniteMetricSpace, correspondence_distortion
from .warp import WarpParams, h_profile

__all__ = [
    "OrbitMetric",
    "BoxCountResult",
    "build_orbit_metric",
    "holder_scan",
    "box_dimension",
    "snowflake_oracle",
    "default_box_scales",
    "halfline_limit_check",
    "HalflineReport",
    "flatness_off_orbit",
    "FlatnessResult",
]


@dataclass(frozen=True)
class OrbitMetric:
    """Normalized orbit distance table b -> d_hat(b) on (0, 1].

    d_hat(b) = D(b * L_ref) / D(L_ref), sampled at b values that are exact
    integer multiples of 1/L_ref so no winding-count rounding error enters.
    Translation invariance of deck powers makes d_hat(|b1 - b2|) the
    distance between orbit coordinates b1 and b2.
    """

    params: WarpParams
    L_ref: int
    D_ref: float
    b: np.ndarray
    dhat: np.ndarray

    def dhat_of(self, b) -> np.ndarray:
        """Interpolated d_hat (piecewise linear in log-log)."""
        b = np.asarray(b, dtype=float)
        if np.any(b < self.b[0]) or np.any(b > self.b[-1]):
            raise ValueError("b outside the sampled range")
        return np.exp(np.interp(np.log(b), np.log(self.b), np.log(self.dhat)))

    def inverse(self, value) -> np.ndarray:
        """b with d_hat(b) = value, by the same monotone log-log table."""
        value = np.asarray(value, dtype=float)
        if np.any(value < self.dhat[0]) or np.any(value > self.dhat[-1]):
            raise ValueError("value outside the resolved range of the table")
        return np.exp(np.interp(np.log(value), np.log(self.dhat), np.log(self.b)))


def _winding_samples(L_ref: int, n_samples: int) -> np.ndarray:
    n_raw = max(n_samples, 8)
    while True:
        cands = np.unique(np.rint(np.geomspace(1.0, L_ref, n_raw)).astype(np.int64))
        if cands.size >= n_samples or n_raw > 64 * n_samples:
            return cands
        n_raw = int(n_raw * 1.4) + 1


def build_orbit_metric(params: WarpParams, L_ref: int = 10_000, n_samples: int = 60) -> OrbitMetric:
    """Sample the normalized orbit metric on a log grid of b in [1/L_ref, 1]."""
    if L_ref < 10_000:
        raise ValueError(f"L_ref must be at least 10^4, got {L_ref}")
    if n_samples < 50:
        raise ValueError(f"n_samples must be at least 50, got {n_samples}")
    plane = WarpedPlane(params)
    ls = _winding_samples(L_ref, n_samples)
    D = np.empty(ls.size)
    for k, l in enumerate(ls):
        try:
            D[k] = cover_distance(plane, 0.0, int(l))
        except SolverError as exc:
            raise SolverError(f"orbit sample failed at l={l}: {exc}") from exc
    if not np.all(np.diff(D) > 0):
        raise SolverError("cover distance failed to increase strictly across samples")
    d_ref = float(D[-1])
    return OrbitMetric(
        params=params, L_ref=int(L_ref), D_ref=d_ref,
        b=ls.astype(float) / float(L_ref), dhat=D / d_ref,
    )


def holder_scan(metric: OrbitMetric):
    """Empirical two-sided power-law constants (C1_emp, C2_emp).

    Ratios d_hat(b) / b**(1/(1+2*alpha)) over the sampled b; both finite
    and positive for a valid table.
    """
    q = metric.params.growth_exponent
    ratios = metric.dhat / metric.b ** q
    return float(ratios.min()), float(ratios.max())


@dataclass(frozen=True)
class BoxCountResult:
    """Covering counts N(delta) and the fitted box-counting dimension."""

    scales: np.ndarray
    counts: np.ndarray
    dimension: float


def _fit_dimension(scales, counts) -> float:
    x = np.log(np.asarray(scales, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return -float(slope)


def box_dimension(metric: OrbitMetric, delta_list) -> BoxCountResult:
    """Box counts of the unit orbit segment at the given d_hat-diameters.

    Translation invariance makes greedy interval covering optimal, so
    N(delta) = ceil(1 / b(delta)) exactly, with b(delta) from the monotone
    table inverse.
    """
    deltas = np.sort(np.asarray(delta_list, dtype=float))[::-1]
    if deltas.size < 2:
        raise ValueError("need at least two scales for a dimension fit")
    widths = metric.inverse(deltas)
    counts = np.ceil(1.0 / widths - 1e-12).astype(np.int64)
    counts = np.maximum(counts, 1)
    return BoxCountResult(
        scales=deltas, counts=counts, dimension=_fit_dimension(deltas, counts),
    )


def snowflake_oracle(theta: float, delta_list) -> BoxCountResult:
    """Analytic box counts for the snowflaked segment ([0,1], |x-y|**theta).

    An interval of snowflake diameter delta has Euclidean width
    delta**(1/theta), so N(delta) = ceil(delta**(-1/theta)) and the fitted
    dimension approximates 1/theta.  Calibrates the estimator.
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    deltas = np.sort(np.asarray(delta_list, dtype=float))[::-1]
    if deltas.size < 2:
        raise ValueError("need at least two scales for a dimension fit")
    counts = np.ceil(deltas ** (-1.0 / theta) - 1e-12).astype(np.int64)
    counts = np.maximum(counts, 1)
    return BoxCountResult(
        scales=deltas, counts=counts, dimension=_fit_dimension(deltas, counts),
    )


def default_box_scales(metric: OrbitMetric, n: int = 24,
                       b_lo: float = None, b_hi: float = 0.05) -> np.ndarray:
    """Scales spanning the well-resolved part of the table.

    The lower end keeps at least 5 windings so lattice granularity stays
    below the fit tolerance.
    """
    if b_lo is None:
        b_lo = 5.0 / metric.L_ref
    lo = float(metric.dhat_of(b_lo))
    hi = float(metric.dhat_of(b_hi))
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class HalflineReport:
    """Per-scale deviation of rescaled distances from the half-line metric."""

    scales: tuple
    max_deviation: tuple       # max |d/s - |a-b|| over probed pairs
    circumference_bound: tuple  # 2*pi*h(r_min_scale*s)/s, the collapse scale

    @property
    def shrinking(self) -> bool:
        return all(x > y for x, y in zip(self.max_deviation, self.max_deviation[1:]))


def halfline_limit_check(params: WarpParams, scale_list,
                         radii=(0.2, 0.5, 0.9),
                         angle_gaps=(0.0, math.pi / 2.0, math.pi)) -> HalflineReport:
    """Check that rescaled far distances converge to |a - b| on the half-line.

    For each scale s, probes points at radii a*s, b*s and several angle
    gaps; the quotient distance divided by s must approach |a - b| within
    the collapsing circumference 2*pi*h(min(radii)*s)/s.
    """
    scales = [float(s) for s in scale_list]
    if scales != sorted(scales):
        raise ValueError("scale_list must be increasing")
    plane = WarpedPlane(params)
    r_min = min(radii)
    devs, bounds = [], []
    for s in scales:
        worst = 0.0
        for a in radii:
            for b in radii:
                for gap in angle_gaps:
                    if a == b and gap == 0.0:
                        d = 0.0
                    else:
                        d = quotient_distance(plane, (a * s, 0.0), (b * s, gap))
                    worst = max(worst, abs(d / s - abs(a - b)))
        devs.append(worst)
        bounds.append(2.0 * math.pi * float(h_profile(params.alpha, r_min * s)) / s)
    return HalflineReport(
        scales=tuple(scales), max_deviation=tuple(devs),
        circumference_bound=tuple(bounds),
    )


@dataclass(frozen=True)
class FlatnessResult:
    s: float
    rho: float
    normalized_distortion: float
    n_points: int
    seed: int


def flatness_off_orbit(params: WarpParams, s: float, rho: float,
                       n_points: int = 64, seed: int = 0) -> FlatnessResult:
    """Distortion of the flat chart on a ball of radius rho*s around (s, 0).

    Samples points in the plane ball, maps them by (r, t) -> (r - s, h(s) t)
    to the Euclidean plane, and reports half the correspondence distortion
    divided by rho*s: an upper bound for the rescaled GH gap to a flat ball.
    """
    if not (0.0 < rho < 0.2):
        raise ValueError(f"rho must lie in (0, 0.2), got {rho}")
    if s <= 0 or rho * s >= s:
        raise ValueError("ball must stay inside the positive-radius chart")
    plane = WarpedPlane(params)
    h_s = float(plane.h(s))
    rng = np.random.default_rng(seed)
    rad = rho * s * np.sqrt(rng.uniform(0.0, 1.0, n_points))
    ang = rng.uniform(0.0, 2.0 * math.pi, n_points)
    xs = rad * np.cos(ang)
    ys = rad * np.sin(ang)
    pts_plane = [(s + x, y / h_s) for x, y in zip(xs, ys)]
    pts_chart = np.column_stack([xs, ys])

    n = n_points
    d_plane = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d_plane[i, j] = d_plane[j, i] = point_distance(plane, pts_plane[i], pts_plane[j])
    diff = pts_chart[:, None, :] - pts_chart[None, :, :]
    d_chart = np.hypot(diff[..., 0], diff[..., 1])

    dist = correspondence_distortion(
        FiniteMetricSpace(d_plane), FiniteMetricSpace(d_chart),
        Correspondence.identity(n),
    )
    return FlatnessResult(
        s=float(s), rho=float(rho),
        normalized_distortion=0.5 * dist / (rho * s),
        n_points=n_points, seed=seed,
    )
