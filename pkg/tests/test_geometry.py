import numpy as np
import pytest

from glflow.fields import Grid2D
from glflow.geometry import (
    ClosedCurve,
    CurveExtinction,
    CutoffProfile,
    GeometryError,
    InterfaceGeometry,
    _brute_distance,
    circle,
    circle_exact,
    csf_flow,
    ellipse,
    evolve_csf,
    extend_fields,
    fit_circle,
    signed_distance,
)

GRID = Grid2D(129, 129, 1.0 / 128)


@pytest.fixture(scope="module")
def circle_sdf():
    # h = 0.01 puts nodes exactly at (0.5, 0.5), (0.8, 0.5), (0.9, 0.5);
    # tolerance covers the chord sagitta of the 2400-gon (~2.6e-7)
    g = Grid2D(101, 101, 0.01)
    return signed_distance(circle(radius=0.3, n=2400), g, delta0=0.1)


class TestSignedDistance:
    def test_center_value(self, circle_sdf):
        assert abs(circle_sdf.values[50, 50] - 0.3) <= 1e-6

    def test_on_curve_value(self, circle_sdf):
        assert abs(circle_sdf.values[50, 80]) <= 1e-6

    def test_outside_value(self, circle_sdf):
        assert abs(circle_sdf.values[50, 90] + 0.1) <= 1e-6

    def test_margin_rejection(self):
        # r = 0.45 leaves clearance 0.05 < 2 delta0
        with pytest.raises(GeometryError):
            signed_distance(circle(radius=0.45), GRID, delta0=0.1)

    def test_strict_margin_rejects_default_geometry(self):
        with pytest.raises(GeometryError):
            signed_distance(circle(radius=0.3), GRID, delta0=0.1, strict_margin=True)

    def test_self_intersecting_curve_rejected(self):
        # limacon with an inner loop (radius changes sign), so the polyline
        # genuinely self-intersects near the center
        ang = np.linspace(0, 2 * np.pi, 128, endpoint=False)
        r = 0.1 + 0.25 * np.cos(ang)
        pts = np.column_stack([0.5 + r * np.cos(ang), 0.5 + r * np.sin(ang)])
        curve = ClosedCurve(pts)
        assert not curve.is_simple()
        with pytest.raises(GeometryError):
            signed_distance(curve, GRID, delta0=0.05)

    def test_windowed_distance_matches_brute_force(self):
        curve = ellipse(a=0.3, b=0.18, n=400)
        g = Grid2D(33, 33, 1.0 / 32)
        sdf = signed_distance(curve, g, delta0=0.05)
        X, Y = g.meshgrid()
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        brute = _brute_distance(nodes, curve)
        assert np.max(np.abs(np.abs(sdf.values.ravel()) - brute)) <= 1e-12

    def test_eikonal_in_band(self):
        # delta0 small enough that the 4*delta0 band avoids the cut locus
        sdf = signed_distance(circle(radius=0.3, n=1200), GRID, delta0=0.05)
        gn = np.hypot(sdf.grad[0], sdf.grad[1])
        band = (np.abs(sdf.values) < 4 * 0.05) & ~GRID.zero_boundary_mask()
        err = np.abs(gn[band] - 1.0)
        assert err.max() <= 40.0 * GRID.h**2


class TestCutoff:
    def test_half_value(self):
        assert abs(CutoffProfile.phi(0.5) - np.exp(-1.0 / 3.0)) <= 1e-15

    def test_sandwich(self):
        x = np.linspace(-0.5, 0.5, 10_000)
        v = CutoffProfile.phi(x)
        assert np.all(v >= 1.0 - 4.0 * x**2 - 1e-12)
        assert np.all(v <= 1.0 - 0.5 * x**2 + 1e-12)

    def test_even_decreasing_supported(self):
        x = np.linspace(0.0, 1.0, 2000)
        v = CutoffProfile.phi(x)
        assert np.all(np.diff(v) <= 1e-15)
        assert CutoffProfile.phi(1.0) == 0.0
        assert CutoffProfile.phi(-1.2) == 0.0
        assert np.allclose(CutoffProfile.phi(-x), v)

    def test_plateau_shape(self):
        cut = CutoffProfile(0.1)
        assert cut.plateau(0.05) == 1.0
        assert cut.plateau(-0.1) == 1.0
        assert cut.plateau(0.21) == 0.0
        mid = cut.plateau(0.15)
        assert 0.0 < mid < 1.0


@pytest.fixture(scope="module")
def geom():
    return InterfaceGeometry.build(circle(radius=0.3, n=800), GRID, delta0=0.1)


class TestExtendedFields:
    def test_curvature_in_band(self, geom):
        band = np.abs(geom.sdf.values) < 0.1
        kap = geom.ext.curvature[band]
        assert np.max(np.abs(kap - 1.0 / 0.3)) <= 1e-3 * (1.0 / 0.3)

    def test_normal_support_and_bound(self, geom):
        d = geom.sdf.values
        nrm = np.linalg.norm(geom.ext.normal, axis=0)
        assert np.all(nrm <= 1.0 + 1e-15)
        assert np.all(nrm[np.abs(d) >= 0.1] == 0.0)
        assert np.all(np.linalg.norm(geom.ext.curv_vec, axis=0)[np.abs(d) >= 0.2] == 0.0)

    def test_normal_matches_cutoff_profile(self, geom):
        d = geom.sdf.values
        band = (np.abs(d) < 0.099) & (np.abs(d) > 0.001)
        expected = geom.cutoff(d[band])
        nrm = np.linalg.norm(geom.ext.normal, axis=0)[band]
        assert np.max(np.abs(nrm - expected)) <= 5e-3

    def test_band_resolution_guard(self):
        coarse = Grid2D(33, 33, 1.0 / 32)
        sdf = signed_distance(circle(radius=0.3), coarse, delta0=0.1)
        with pytest.raises(GeometryError):
            extend_fields(sdf, circle(radius=0.3), CutoffProfile(0.1))

    def test_curvature_radius_guard(self):
        small = circle(radius=0.15, n=400)
        sdf = signed_distance(small, GRID, delta0=0.1)
        with pytest.raises(GeometryError):
            extend_fields(sdf, small, CutoffProfile(0.1))

    def test_velocity_equals_curvature(self, geom):
        assert np.allclose(geom.ext.velocity, geom.curve.curvature())


class TestCSF:
    def test_zero_step_identity(self):
        c = circle(n=200)
        out = evolve_csf(c, 0.0)
        np.testing.assert_array_equal(out.points, c.points)

    def test_circle_radius_law(self):
        c = circle(radius=0.3, n=400)
        out = csf_flow(c, 0.02)
        r = np.linalg.norm(out.points - out.points.mean(axis=0), axis=1)
        assert abs(r.mean() - circle_exact(0.3, 0.02)) <= 5e-4
        assert r.std() <= 1e-4

    def test_ellipse_area_rate(self):
        e = ellipse(a=0.3, b=0.2, n=600)
        T = 2e-3
        out = csf_flow(e, T)
        rate = (e.enclosed_area() - out.enclosed_area()) / T
        assert abs(rate - 2 * np.pi) <= 0.02 * 2 * np.pi

    def test_stability_limit_enforced(self):
        c = circle(n=100)
        with pytest.raises(ValueError):
            evolve_csf(c, c.spacing() ** 2)

    def test_extinction_signal(self):
        # r0^2/2 = 0.00125; run just past the extinction time
        c = circle(radius=0.05, n=64)
        with pytest.raises(CurveExtinction):
            csf_flow(c, 0.0014)

    def test_circle_exact_values(self):
        assert circle_exact(0.3, 0.0) == 0.3
        assert abs(circle_exact(0.3, 0.02) - 0.22360679774997896) <= 1e-15
        with pytest.raises(CurveExtinction):
            circle_exact(0.3, 0.045)

    def test_resample_uniform_spacing(self):
        e = ellipse(a=0.3, b=0.15, n=321)
        seg = e.segment_lengths()
        assert seg.max() <= 2.0 * seg.mean()


class TestTransportIdentities:
    """Discrete residuals of the band transport/divergence identities on the
    analytically evolving circle; constants are measured regression bounds."""

    def test_time_transport(self):
        dt = 1e-3
        delta0 = 0.1
        g = GRID
        s0 = signed_distance(circle(radius=0.3, n=800), g, delta0)
        r1 = circle_exact(0.3, dt)
        s1 = signed_distance(circle(radius=r1, n=800), g, delta0)
        geom = InterfaceGeometry.build(circle(radius=0.3, n=800), g, delta0)
        dt_d = (s1.values - s0.values) / dt
        adv = geom.ext.curv_vec[0] * s0.grad[0] + geom.ext.curv_vec[1] * s0.grad[1]
        band = np.abs(s0.values) < delta0
        resid = np.abs(dt_d + adv)[band]
        assert resid.max() <= 30.0 * (g.h**2 + dt)

    def test_divergence_identity(self):
        delta0 = 0.1
        g = GRID
        geom = InterfaceGeometry.build(circle(radius=0.3, n=800), g, delta0)
        from glflow.fields import VectorField2, divergence

        xi = VectorField2(g, geom.ext.normal)
        div_xi = divergence(xi).data
        hdot = geom.ext.curv_vec[0] * geom.ext.normal[0] + geom.ext.curv_vec[1] * geom.ext.normal[1]
        d = geom.sdf.values
        band = (np.abs(d) < delta0) & ~g.zero_boundary_mask()
        resid = np.abs(div_xi + hdot)[band]
        bound = 300.0 * np.abs(d[band]) + 2000.0 * g.h**2
        assert np.all(resid <= bound)


def test_fit_circle_detects_non_circles():
    assert fit_circle(circle(radius=0.25)) is not None
    assert fit_circle(ellipse(a=0.3, b=0.2)) is None


def test_curve_csv_roundtrip(tmp_path):
    c = circle(n=64)
    path = tmp_path / "curve.csv"
    c.to_csv(path)
    back = ClosedCurve.from_csv(path)
    np.testing.assert_allclose(back.points, c.points)


def test_ccw_enforced():
    pts = circle(n=64).points[::-1]
    with pytest.raises(GeometryError):
        ClosedCurve(pts)
