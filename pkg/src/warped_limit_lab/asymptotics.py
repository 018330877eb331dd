"""Growth law and far-basepoint behavior of winding distances.

For the basepoint on the axis, the cover distance D(l) to the l-fold deck
translate is sandwiched between explicit multiples of l**(1/(1+2*alpha))
once l >= 9**(1 + 1/(2*alpha)); the proof-side competitor loop tightens the
upper constant from 9 to 2 + 2*pi.  For basepoints at large radius s, loops
winding l ~ eps * s * (1+s^2)**alpha times have length comparable to
eps * s while their size becomes a vanishing fraction of their length as
eps -> 0; the implicit inequality

    delta^2 <= eps^2 pi^2 [1 - (1+delta)^(-4*alpha)]

turns that trend into a computable ceiling for size/length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .geodesy import SolverError, WarpedPlane, loop_size, sigma_competitor, solve_winding
from .warp import WarpParams, h_profile

__all__ = [
    "DistanceSample",
    "ScalingFit",
    "FarLoopResult",
    "BoundCheck",
    "BoundReport",
    "RatioPoint",
    "sample_growth",
    "check_lemma_bounds",
    "fit_exponent",
    "far_loop",
    "ratio_curve",
    "growth_lower_constant",
    "growth_upper_constant",
    "competitor_upper_constant",
    "growth_l_threshold",
    "far_lower_constant",
    "size_delta_root",
    "far_winding_range",
]


def growth_lower_constant(alpha: float) -> float:
    """Lower sandwich constant 2 * 9**(-1/(2*alpha))."""
    return 2.0 * 9.0 ** (-1.0 / (2.0 * alpha))


def growth_upper_constant() -> float:
    """Upper sandwich constant."""
    return 9.0


def competitor_upper_constant() -> float:
    """Upper constant 2 + 2*pi realized by the explicit competitor loop."""
    return 2.0 + 2.0 * math.pi


def growth_l_threshold(alpha: float) -> float:
    """Smallest winding count where the sandwich applies: 9**(1 + 1/(2*alpha))."""
    return 9.0 ** (1.0 + 1.0 / (2.0 * alpha))


def far_lower_constant(alpha: float) -> float:
    """Far-basepoint length lower constant pi / (1+pi)**(2*alpha)."""
    return math.pi / (1.0 + math.pi) ** (2.0 * alpha)


@dataclass(frozen=True)
class DistanceSample:
    """One winding count with its cover distance at base_r = 0."""

    l: int
    D: float


def sample_growth(params: WarpParams, l_list) -> list:
    """cover_distance at base 0 for each winding count, in order."""
    ls = [int(l) for l in l_list]
    if any(l <= 0 for l in ls):
        raise ValueError("winding counts must be positive")
    if ls != sorted(ls):
        raise ValueError("l_list must be sorted increasing")
    plane = WarpedPlane(params)
    out = []
    for l in ls:
        try:
            arc = solve_winding(plane, 0.0, 2.0 * math.pi * l)
        except SolverError as exc:
            raise SolverError(f"growth sample failed at l={l}: {exc}") from exc
        out.append(DistanceSample(l=l, D=arc.length))
    return out


@dataclass(frozen=True)
class BoundCheck:
    """Sandwich verdict for one sample; bounds apply when in_range."""

    l: int
    D: float
    lower: float
    upper: float
    sharper_upper: float
    sigma_min: float
    in_range: bool
    ok: bool


@dataclass(frozen=True)
class BoundReport:
    alpha: float
    l_threshold: float
    checks: tuple

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks if c.in_range)

    @property
    def n_in_range(self) -> int:
        return sum(1 for c in self.checks if c.in_range)


def check_lemma_bounds(params: WarpParams, samples) -> BoundReport:
    """Verify the distance sandwich on every sample with l above threshold.

    Checks, per in-range sample:
      lower = C * l**q - 2  <=  D  <=  9 * l**q        (q = 1/(1+2*alpha))
      D <= (2 + 2*pi) * l**q
      D <= min over a 200-point radius grid of the competitor loop length.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples to check")
    a = params.alpha
    q = params.growth_exponent
    thresh = growth_l_threshold(a)
    c_lo = growth_lower_constant(a)
    checks = []
    for s in samples:
        lq = float(s.l) ** q
        lower = c_lo * lq - 2.0
        upper = growth_upper_constant() * lq
        sharper = competitor_upper_constant() * lq
        sigma, _ = sigma_competitor(params, s.l)
        in_range = s.l >= thresh
        ok = (lower <= s.D <= upper) and (s.D <= sharper) and (s.D <= sigma)
        checks.append(BoundCheck(
            l=s.l, D=s.D, lower=lower, upper=upper, sharper_upper=sharper,
            sigma_min=sigma, in_range=in_range, ok=ok if in_range else True,
        ))
    return BoundReport(alpha=a, l_threshold=thresh, checks=tuple(checks))


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares slope of log D against log l over a window."""

    slope: float
    intercept: float
    r_squared: float
    l_window: tuple


def fit_exponent(samples, window) -> ScalingFit:
    """Fit the growth exponent over samples with l inside [window[0], window[1]]."""
    lo, hi = window
    sel = [s for s in samples if lo <= s.l <= hi]
    if len(sel) < 4:
        raise ValueError(f"need >= 4 samples in window {window}, have {len(sel)}")
    x = np.log([s.l for s in sel])
    y = np.log([s.D for s in sel])
    if np.ptp(x) == 0:
        raise ValueError("degenerate window: all samples at the same l")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(
        slope=float(slope), intercept=float(intercept),
        r_squared=r2, l_window=(lo, hi),
    )


def far_winding_range(params: WarpParams, s: float, epsilon: float):
    """Admissible integer windings [ceil(eps*s*(1+s^2)^a / 2), floor(eps*s*(1+s^2)^a)]."""
    top = epsilon * s * (1.0 + s * s) ** params.alpha
    lo = math.ceil(top / 2.0)
    hi = math.floor(top)
    return lo, hi


@dataclass(frozen=True)
class FarLoopResult:
    """Minimal winding loop at a far basepoint: its length and quotient size."""

    s: float
    epsilon: float
    l: int
    length: float
    size: float
    radial_gap: float

    @property
    def ratio(self) -> float:
        return self.size / self.length


def far_loop(params: WarpParams, s: float, epsilon: float, n_size_samples: int = 33) -> FarLoopResult:
    """Solve the winding loop at base radius s with the largest admissible l.

    The top of the admissible range maximizes winding, the sharpest case.
    Validates length within [eps * C * s, eps * 2*pi * s] with
    C = pi/(1+pi)**(2*alpha); a violation would indicate a solver defect.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    lo, hi = far_winding_range(params, s, epsilon)
    if hi < lo or hi < 1:
        s_min = (2.0 / epsilon) ** params.growth_exponent
        raise ValueError(
            f"no admissible winding count at s={s}, eps={epsilon}; "
            f"need s of roughly {s_min:.3g} or larger"
        )
    l = hi
    plane = WarpedPlane(params)
    arc = solve_winding(plane, float(s), 2.0 * math.pi * l)
    lower = epsilon * far_lower_constant(params.alpha) * s
    upper = epsilon * 2.0 * math.pi * s
    if not (lower <= arc.length <= upper * (1.0 + 1e-12)):
        raise SolverError(
            f"far-loop length {arc.length} escaped its bounds "
            f"[{lower}, {upper}] at s={s}, eps={epsilon}"
        )
    ls = loop_size(plane, arc, float(s), n_samples=n_size_samples)
    return FarLoopResult(
        s=float(s), epsilon=float(epsilon), l=l,
        length=arc.length, size=ls.size, radial_gap=ls.radial_gap,
    )


def size_delta_root(alpha: float, epsilon: float) -> float:
    """Largest root of delta^2 = eps^2 pi^2 [1 - (1+delta)^(-4*alpha)].

    The curve is concave increasing from 0 and the parabola convex, so there
    is exactly one positive crossing, located in (0, eps*pi].
    """
    e2p2 = (epsilon * math.pi) ** 2

    def fun(d):
        return e2p2 * (-math.expm1(-4.0 * alpha * math.log1p(d))) - d * d

    lo = min(1e-12, e2p2 * alpha)
    hi = epsilon * math.pi + 1e-12
    if fun(lo) <= 0:
        lo = lo * 1e-6
    return brentq(fun, lo, hi, xtol=1e-300, rtol=8.9e-16)


@dataclass(frozen=True)
class RatioPoint:
    epsilon: float
    l: int
    length: float
    size: float
    ratio: float
    analytic_ceiling: float


def ratio_curve(params: WarpParams, s: float, eps_list, n_size_samples: int = 33) -> list:
    """size/length of the far loop per epsilon, with the analytic ceiling.

    The ceiling is delta(eps) / (C * eps) where delta(eps) is the implicit
    root from size_delta_root; both it and delta/eps vanish as eps -> 0.
    """
    eps = [float(e) for e in eps_list]
    if any(not (0.0 < e < 1.0) for e in eps):
        raise ValueError("eps_list entries must lie in (0, 1)")
    if eps != sorted(eps, reverse=True):
        raise ValueError("eps_list must be decreasing")
    out = []
    for e in eps:
        res = far_loop(params, s, e, n_size_samples=n_size_samples)
        root = size_delta_root(params.alpha, e)
        ceiling = root / (far_lower_constant(params.alpha) * e)
        out.append(RatioPoint(
            epsilon=e, l=res.l, length=res.length, size=res.size,
            ratio=res.ratio, analytic_ceiling=ceiling,
        ))
    return out
