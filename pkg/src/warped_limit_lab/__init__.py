"""Numerical laboratory for a collapsing doubly warped product geometry.

Modules: warp (profiles), curvature (Ricci diagonal and positivity),
geodesy (winding geodesics on the reduced plane plus a grid oracle),
asymptotics (growth law and far-loop behavior), cone (limit-orbit metric
and dimension estimates), ghdist (finite metric comparisons), cli
(experiment runner).
"""

from .warp import WarpParams, WarpEval, eval_profiles, circle_length
from .curvature import (
    RicciDiag,
    dimension_threshold,
    limit_at_origin,
    positivity_scan,
    ricci_diag,
)
from .geodesy import (
    GeodesicArc,
    GridOracle,
    SolverError,
    WarpedPlane,
    arc_from_clairaut,
    cover_distance,
    loop_size,
    oracle_distance,
    point_distance,
    solve_winding,
)
from .asymptotics import (
    DistanceSample,
    FarLoopResult,
    ScalingFit,
    check_lemma_bounds,
    far_loop,
    fit_exponent,
    ratio_curve,
    sample_growth,
)
from .cone import (
    BoxCountResult,
    OrbitMetric,
    box_dimension,
    build_orbit_metric,
    flatness_off_orbit,
    halfline_limit_check,
    holder_scan,
    snowflake_oracle,
)
from .ghdist import (
    Correspondence,
    FiniteMetricSpace,
    correspondence_distortion,
    gh_lower_diam,
    gh_upper_bijection,
)

__version__ = "0.1.0"
