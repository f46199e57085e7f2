"""Plane-curve reconstruction, the parabola family, self-intersection
detection, and the kick transition sweep."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from slboundary import planar as pl
from slboundary.errors import WindowTooSmall


class TestReconstruct:
    def test_zero_curvature_is_a_segment(self):
        c = pl.reconstruct(lambda s: 0.0 * np.asarray(s), (0.0, 5.0), 0.01)
        assert np.max(np.hypot(c.x - c.s, c.y)) <= 1e-10

    def test_unit_circle_closes(self):
        c = pl.reconstruct(lambda s: 1.0 + 0.0 * np.asarray(s), (0.0, 2 * math.pi), 0.01)
        assert math.hypot(c.x[-1] - c.x[0], c.y[-1] - c.y[0]) <= 1e-8

    def test_parabola_matches_direct_parametrization(self):
        k = 1.0
        c = pl.reconstruct(lambda s: pl.parabola_curvature(k, np.abs(np.asarray(s))),
                           (0.0, 40.0), 0.005)
        xs = pl.parabola_x_of_s(k, c.s)
        dev = np.max(np.hypot(c.x - xs, c.y - k * xs**2))
        assert dev <= 1e-5

    def test_turning_angle_identity(self):
        kfun = lambda s: pl.parabola_curvature(1.0, np.abs(np.asarray(s)))
        c = pl.reconstruct(kfun, (0.0, 60.0), 0.005)
        integral, _ = quad(lambda s: float(pl.parabola_curvature(1.0, s)), 0.0, 60.0,
                           limit=400, epsabs=1e-13, epsrel=1e-12)
        assert abs(c.total_turn() - integral) <= 1e-8

    def test_rigid_motion_equivariance(self):
        kfun = lambda s: 0.8 + 0.3 * np.sin(np.asarray(s))
        base = pl.reconstruct(kfun, (0.0, 10.0), 0.01)
        for ang in (0.3, 1.2, -2.0):
            rot = pl.reconstruct(kfun, (0.0, 10.0), 0.01, theta0=ang)
            ca, sa = math.cos(ang), math.sin(ang)
            assert np.max(np.abs(rot.x - (ca * base.x - sa * base.y))) <= 1e-10
            assert np.max(np.abs(rot.y - (sa * base.x + ca * base.y))) <= 1e-10


class TestParabolaCurvature:
    def test_vertex_value(self):
        assert pl.parabola_curvature(1.0, 0.0) == 2.0
        assert pl.parabola_curvature(20.0, 0.0) == 40.0

    def test_strictly_decreasing(self):
        s = np.linspace(0.0, 50.0, 200)
        k = pl.parabola_curvature(1.0, s)
        assert np.all(np.diff(k) < 0)

    def test_total_turn_approaches_quarter_circle(self):
        # integral to arclength of x = 10^3 reaches pi/2 - 1e-3
        S = pl.parabola_arclength(1.0, 1e3)
        integral, _ = quad(lambda s: float(pl.parabola_curvature(1.0, s)), 0.0, S,
                           limit=500)
        assert integral >= math.pi / 2 - 1e-3
        assert_allclose(integral, math.atan(2e3), rtol=1e-9)

    def test_arclength_inverse_roundtrip(self):
        xs = np.array([0.0, 0.3, 2.0, 55.0, 900.0])
        s = pl.parabola_arclength(3.0, xs)
        assert_allclose(pl.parabola_x_of_s(3.0, s), xs, rtol=1e-12, atol=1e-12)


class TestSelfIntersects:
    def test_segment_has_none(self):
        c = pl.reconstruct(lambda s: 0.0 * np.asarray(s), (0.0, 3.0), 0.01)
        assert pl.self_intersects(c) is None

    def test_overshot_circle_crosses(self):
        c = pl.reconstruct(lambda s: 1.0 + 0.0 * np.asarray(s), (0.0, 2.5 * math.pi), 0.01)
        hit = pl.self_intersects(c)
        assert hit is not None
        si, sj = hit
        # the retraced arc meets the start of the loop near s = 0 / s = 2 pi
        assert si <= 0.05
        assert abs(sj - 2 * math.pi) <= 0.05

    def test_parabola_is_embedded(self):
        c = pl.reconstruct(lambda s: pl.parabola_curvature(1.0, np.abs(np.asarray(s))),
                           (-40.0, 40.0), 0.01)
        assert pl.self_intersects(c) is None

    def test_known_crossing_location(self):
        # figure-eight-ish: straight run, full loop, straight run again
        def kappa(s):
            s = np.asarray(s)
            return np.where((s > 1.0) & (s < 1.0 + 2 * math.pi), 1.0, 0.0)

        c = pl.reconstruct(kappa, (0.0, 2 + 2 * math.pi), 0.002)
        hit = pl.self_intersects(c)
        assert hit is not None


class TestKickFamilyTransition:
    def test_single_crossing_bracketed_at_zero(self):
        ts = [round(-0.15 + 0.05 * i, 10) for i in range(7)]
        rep = pl.kick_family_transition(20.0, ts, window=60.0, step=0.005)
        verdicts = [e.verdict for e in rep.entries]
        assert verdicts == ["embedded"] * 4 + ["self-intersecting"] * 3
        assert rep.single_crossing
        assert rep.bracket == (0.0, 0.05)

    def test_negative_kick_stays_embedded_on_long_window(self):
        rep = pl.kick_family_transition(1.0, [-0.3], window=200.0, step=0.01)
        assert rep.entries[0].verdict == "embedded"

    def test_positive_kick_crosses_at_finite_arclength(self):
        rep = pl.kick_family_transition(1.0, [0.3], window=40.0, step=0.005)
        e = rep.entries[0]
        assert e.verdict == "self-intersecting"
        assert e.witness_s is not None and e.witness_s < 40.0

    def test_underpowered_window_raises(self):
        # k = 1, t = 0.05 on window 100: total turn stays below pi
        with pytest.raises(WindowTooSmall):
            pl.kick_family_transition(1.0, [0.05], window=100.0, step=0.01)

    def test_entries_serialise(self):
        rep = pl.kick_family_transition(20.0, [-0.05, 0.0, 0.1], window=40.0, step=0.005)
        docs = rep.as_json_entries()
        assert [d["t"] for d in docs] == [-0.05, 0.0, 0.1]
        assert docs[-1]["first_intersection_s_pair"] is not None
        assert docs[0]["window"] == 40.0
