import math

import numpy as np
import pytest

from warped_limit_lab.geodesy import (
    GridOracle,
    SolverError,
    WarpedPlane,
    _oracle_fallback,
    arc_from_clairaut,
    cover_distance,
    design_cover_oracle,
    loop_size,
    oracle_distance,
    point_distance,
    quotient_distance,
    sigma_competitor,
    solve_winding,
)
from warped_limit_lab.warp import WarpParams

from _oracles import ode_trace_arc, quad_arc_integrals


@pytest.fixture(scope="module")
def plane1():
    return WarpedPlane(WarpParams(1.0, 25))


@pytest.fixture(scope="module")
def plane05():
    return WarpedPlane(WarpParams(0.5, 9))


def flat_h(r):
    return np.ones_like(np.asarray(r, dtype=float))


class TestArcFromClairaut:
    def test_turning_radius_at_half_height(self, plane1):
        arc = arc_from_clairaut(plane1, 0.0, 0.5)
        assert arc.r_star == pytest.approx(1.0, abs=1e-10)
        assert arc.length > 0 and arc.delta_t > 0
        assert float(plane1.h(arc.r_star)) == pytest.approx(abs(arc.c), abs=1e-10)

    def test_against_adaptive_quadrature(self, plane1):
        arc = arc_from_clairaut(plane1, 0.0, 0.5)
        length, advance = quad_arc_integrals(1.0, 0.0, arc.r_star)
        assert arc.length == pytest.approx(2 * length, rel=1e-8)
        assert arc.delta_t == pytest.approx(2 * advance, rel=1e-8)

    def test_far_base_against_adaptive_quadrature(self, plane05):
        arc = arc_from_clairaut(plane05, 1e4, 0.9 * float(plane05.h(1e4)))
        length, advance = quad_arc_integrals(0.5, 1e4, arc.r_star)
        assert arc.length == pytest.approx(2 * length, rel=1e-7)
        assert arc.delta_t == pytest.approx(2 * advance, rel=1e-7)

    def test_winding_floor_bound(self, plane1):
        arc = arc_from_clairaut(plane1, 0.0, 0.3)
        assert arc.length >= arc.delta_t * float(plane1.h(arc.r_star))

    def test_offaxis_grazing_arc_shrinks(self, plane1):
        # off the axis h' < 0, so grazing arcs degenerate: delta_t ~ sqrt(gap)
        h2 = float(plane1.h(2.0))
        coarse = arc_from_clairaut(plane1, 2.0, h2 * (1 - 1e-8))
        fine = arc_from_clairaut(plane1, 2.0, h2 * (1 - 1e-12))
        assert coarse.delta_t < 5e-3 and coarse.length < 5e-3
        assert fine.delta_t < 0.02 * coarse.delta_t
        assert fine.length < 0.02 * coarse.length
        assert coarse.r_star > 2.0

    def test_axis_grazing_arc_reaches_conjugate_advance(self, plane1):
        # at the profile maximum the grazing limit is a vanishing
        # oscillation around the axis geodesic: length shrinks to zero but
        # the advance tends to the conjugate value pi/sqrt(2 alpha)
        arc = arc_from_clairaut(plane1, 0.0, 1.0 - 1e-9)
        assert arc.delta_t == pytest.approx(math.pi / math.sqrt(2.0), rel=1e-4)
        assert arc.length == pytest.approx(arc.delta_t, rel=1e-4)

    def test_rejects_degenerate_and_oversized_c(self, plane1):
        with pytest.raises(ValueError, match="radial"):
            arc_from_clairaut(plane1, 0.0, 0.0)
        with pytest.raises(ValueError, match="outward"):
            arc_from_clairaut(plane1, 0.0, 1.0)
        with pytest.raises(ValueError, match="outward"):
            arc_from_clairaut(plane1, 2.0, 0.9)

    def test_negative_c_mirrors(self, plane1):
        a = arc_from_clairaut(plane1, 0.0, 0.4)
        b = arc_from_clairaut(plane1, 0.0, -0.4)
        assert a.length == b.length
        assert a.delta_t == b.delta_t


class TestSolveWinding:
    def test_hits_target_advance(self, plane1):
        T = 2 * math.pi * 100
        arc = solve_winding(plane1, 0.0, T)
        assert abs(arc.delta_t - T) <= 1e-8 * T

    def test_sandwich_at_hundred(self, plane1):
        # l = 100 >= 27 = 9**(3/2), so the sandwich applies
        arc = solve_winding(plane1, 0.0, 2 * math.pi * 100)
        q = 1.0 / 3.0
        lo = 2 * 9 ** (-0.5) * 100 ** q - 2
        hi = 9 * 100 ** q
        assert lo <= arc.length <= hi

    def test_alpha_half_ten_thousand(self, plane05):
        arc = solve_winding(plane05, 0.0, 2 * math.pi * 10**4)
        assert 20.22 <= arc.length <= 900.0

    def test_small_target_is_axis_chord(self, plane1):
        arc = solve_winding(plane1, 0.0, 0.01)
        assert arc.degenerate
        assert arc.length == pytest.approx(0.01, rel=0.01)

    def test_length_at_least_twice_radial_gap(self, plane1):
        arc = solve_winding(plane1, 0.0, 2 * math.pi * 1000)
        assert arc.length >= 2 * (arc.r_star - arc.base_r)

    def test_ode_cross_check(self, plane1):
        # integrate the geodesic equations for the solved length: the path
        # must close on the base radius with the computed advance, and the
        # Clairaut constant must be conserved along the way
        arc = solve_winding(plane1, 0.0, 2 * math.pi * 5)
        (r_end, t_end), drift, speed_err = ode_trace_arc(
            1.0, 0.0, arc.c, arc.length,
        )
        assert abs(r_end - arc.base_r) <= 1e-6 * (1 + arc.r_star)
        assert t_end == pytest.approx(arc.delta_t, rel=1e-6)
        assert drift <= 1e-9
        assert speed_err <= 1e-9

    def test_ode_cross_check_far_base(self, plane05):
        arc = solve_winding(plane05, 100.0, 2 * math.pi * 200)
        (r_end, t_end), drift, _ = ode_trace_arc(0.5, 100.0, arc.c, arc.length)
        assert abs(r_end - 100.0) <= 1e-5 * 100.0
        assert t_end == pytest.approx(arc.delta_t, rel=1e-6)
        assert drift <= 1e-9

    def test_envelope_derivative(self, plane1):
        # d(length)/dT equals the Clairaut constant of the solution arc
        T = 2 * math.pi * 50
        arc = solve_winding(plane1, 0.0, T)
        dT = 1e-3 * T
        d_num = (solve_winding(plane1, 0.0, T + dT).length
                 - solve_winding(plane1, 0.0, T - dT).length) / (2 * dT)
        assert d_num == pytest.approx(arc.c, rel=1e-4)

    def test_rejects_bad_targets(self, plane1):
        with pytest.raises(ValueError):
            solve_winding(plane1, 0.0, 0.0)
        with pytest.raises(ValueError):
            solve_winding(plane1, -1.0, 1.0)

    def test_deterministic(self, plane1):
        a = solve_winding(plane1, 0.0, 2 * math.pi * 7)
        b = solve_winding(WarpedPlane(WarpParams(1.0, 25)), 0.0, 2 * math.pi * 7)
        assert a.length == b.length and a.c == b.c


class TestCoverDistance:
    def test_one_wrap_under_flat_competitor(self, plane1):
        assert cover_distance(plane1, 0.0, 1) <= 2 * math.pi

    def test_below_sigma_competitor(self, plane05):
        d = cover_distance(plane05, 0.0, 10**4)
        sigma, _ = sigma_competitor(plane05.params, 10**4)
        assert d <= sigma

    def test_matches_point_distance(self, plane1):
        T = 2 * math.pi * 3
        assert cover_distance(plane1, 0.0, 3) == pytest.approx(
            point_distance(plane1, (0.0, 0.0), (0.0, T)), rel=1e-9,
        )

    def test_rejects_bad_l(self, plane1):
        for bad in (0, -1, 1.5, True):
            with pytest.raises(ValueError):
                cover_distance(plane1, 0.0, bad)


class TestPointDistance:
    def test_radial_segment(self, plane1):
        assert point_distance(plane1, (0.0, 0.0), (5.0, 0.0)) == 5.0

    def test_identity(self, plane1):
        assert point_distance(plane1, (3.0, 1.0), (3.0, 1.0)) == 0.0

    def test_symmetry(self, plane1):
        a, b = (0.5, 0.2), (2.0, 3.1)
        d1 = point_distance(plane1, a, b)
        d2 = point_distance(plane1, b, a)
        assert d1 == pytest.approx(d2, rel=1e-9)
        d3 = point_distance(plane1, (0.5, -0.2), (2.0, -3.1))
        assert d1 == pytest.approx(d3, rel=1e-9)

    def test_monotone_in_advance(self, plane05):
        base = 100.0
        gaps = [0.1, 0.5, 1.0, math.pi, 5.0, 10.0]
        ds = [point_distance(plane05, (base, 0.0), (base, g)) for g in gaps]
        assert all(a < b for a, b in zip(ds, ds[1:]))

    def test_seam_continuity(self, plane05):
        # distances are continuous across the monotone/turning family seam
        a, b = 1.0, 3.0
        from warped_limit_lab.geodesy import _through_integrals
        T1 = _through_integrals(0.5, a, b, 0.0)[1]
        d_lo = point_distance(plane05, (a, 0.0), (b, T1 * (1 - 1e-6)))
        d_hi = point_distance(plane05, (a, 0.0), (b, T1 * (1 + 1e-6)))
        assert d_lo == pytest.approx(d_hi, rel=1e-5)

    def test_triangle_inequality_sample(self, plane1):
        pts = [(0.0, 0.0), (1.0, 1.0), (2.5, 0.5), (0.5, 4.0)]
        d = {}
        for i, p in enumerate(pts):
            for j, q in enumerate(pts):
                if i < j:
                    d[i, j] = d[j, i] = point_distance(plane1, p, q)
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    if len({i, j, k}) == 3:
                        assert d[i, j] <= d[i, k] + d[k, j] + 1e-9

    def test_tiny_advance_is_nearly_radial(self, plane05):
        d = point_distance(plane05, (1000.0, 0.0), (1045.0, 1e-10))
        assert d == pytest.approx(45.0, rel=1e-12)

    def test_same_radius_small_gap_off_axis(self, plane05):
        # short chord at constant radius costs about h(r) * gap; the
        # geodesic's outward bow only saves O(gap^3)
        r0, gap = 1000.0, 1e-3
        d = point_distance(plane05, (r0, 0.0), (r0, gap))
        assert d == pytest.approx(float(plane05.h(r0)) * gap, rel=1e-6)

    def test_axis_pair_below_conjugate_advance(self, plane1):
        d = point_distance(plane1, (0.0, 0.0), (0.0, 1.0))
        assert d == pytest.approx(1.0, rel=1e-9)

    def test_rejects_negative_radius(self, plane1):
        with pytest.raises(ValueError):
            point_distance(plane1, (-1.0, 0.0), (2.0, 1.0))

    def test_rejects_nonfinite(self, plane1):
        with pytest.raises(ValueError):
            point_distance(plane1, (0.0, float("nan")), (1.0, 0.0))


class TestQuotientDistance:
    def test_wraps_whole_turns(self, plane05):
        d0 = quotient_distance(plane05, (50.0, 0.0), (50.0, 0.5))
        d1 = quotient_distance(plane05, (50.0, 0.0), (50.0, 0.5 + 2 * math.pi))
        assert d0 == pytest.approx(d1, rel=1e-12)

    def test_half_turn_is_worst(self, plane05):
        vals = [
            quotient_distance(plane05, (50.0, 0.0), (50.0, g))
            for g in (0.5, 1.5, math.pi)
        ]
        assert vals[0] < vals[1] < vals[2]


class TestLoopSize:
    def test_size_bounds(self, plane05):
        arc = solve_winding(plane05, 0.0, 2 * math.pi * 1000)
        ls = loop_size(plane05, arc, 0.0)
        assert ls.size >= ls.radial_gap - 1e-9
        assert ls.size <= arc.length / 2 + 1e-9
        assert ls.radial_gap == pytest.approx(arc.r_star - arc.base_r, rel=1e-12)

    def test_far_loop_size_small_against_length(self, plane05):
        s = 1e3
        lo = int(0.1 * s * (1 + s * s) ** 0.5)
        arc = solve_winding(plane05, s, 2 * math.pi * lo)
        ls = loop_size(plane05, arc, s)
        assert ls.size <= arc.length / 2
        assert ls.size / arc.length < 0.2

    def test_mismatched_base_rejected(self, plane05):
        arc = solve_winding(plane05, 0.0, 2 * math.pi * 10)
        with pytest.raises(ValueError):
            loop_size(plane05, arc, 5.0)


class TestGridOracle:
    def test_flat_plane_three_four_five(self):
        oracle = GridOracle(0.0, 3.5, 4.5, 500, 640, connectivity=16)
        d = oracle_distance(oracle, flat_h, (0.0, 0.0), (3.0, 4.0))
        assert d == pytest.approx(5.0, rel=0.02)

    def test_degenerate_same_point(self, plane1):
        oracle = GridOracle(0.0, 2.0, 2.0, 50, 50)
        assert oracle_distance(oracle, plane1, (1.0, 1.0), (1.0, 1.0)) == 0.0

    def test_matches_solver_moderate_mesh(self, plane1):
        d_solver = cover_distance(plane1, 0.0, 3)
        oracle, limit = design_cover_oracle(plane1.params, 3, n_nodes=700_000)
        d_oracle = oracle_distance(
            oracle, plane1, (0.0, 0.0), (0.0, 2 * math.pi * 3), limit=limit,
        )
        assert abs(d_oracle - d_solver) / d_solver <= 0.03

    def test_axis_crossing_never_helps(self, plane1):
        # box extends to negative radii: the excluded crossing family must
        # not undercut the one-sided solver
        oracle = GridOracle(-2.0, 3.2, 2 * math.pi, 420, 500, connectivity=16)
        d_oracle = oracle_distance(oracle, plane1, (0.0, 0.0), (0.0, 2 * math.pi))
        d_solver = cover_distance(plane1, 0.0, 1)
        assert d_oracle >= d_solver * (1 - 1e-9)

    def test_rejects_outside_points(self, plane1):
        oracle = GridOracle(0.0, 2.0, 2.0, 30, 30)
        with pytest.raises(ValueError):
            oracle_distance(oracle, plane1, (3.0, 0.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            oracle_distance(oracle, plane1, (0.0, 0.0), (1.0, 5.0))

    def test_rejects_bad_mesh(self):
        with pytest.raises(ValueError):
            GridOracle(1.0, 0.0, 1.0, 10, 10)
        with pytest.raises(ValueError):
            GridOracle(0.0, 1.0, 1.0, 10, 10, connectivity=6)

    def test_graph_cached_between_queries(self, plane1):
        oracle = GridOracle(0.0, 2.0, 2.0, 40, 40)
        oracle_distance(oracle, plane1, (0.0, 0.0), (1.0, 1.0))
        g1 = oracle._graph
        oracle_distance(oracle, plane1, (0.0, 0.0), (2.0, 2.0))
        assert oracle._graph is g1

    def test_fallback_close_to_solver(self, plane1):
        d_fb = _oracle_fallback(plane1, (0.0, 0.0), (1.0, 1.0))
        d = point_distance(plane1, (0.0, 0.0), (1.0, 1.0))
        assert d_fb == pytest.approx(d, rel=0.05)
        assert d_fb >= d * (1 - 1e-9)


def test_sigma_competitor_dominates_solver(plane05):
    for l in (10, 1000):
        sigma, r_at = sigma_competitor(plane05.params, l)
        assert sigma >= cover_distance(plane05, 0.0, l)
        assert r_at > 0
