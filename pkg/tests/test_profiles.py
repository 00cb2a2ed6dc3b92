import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, special

from pnr_scope.errors import DomainError
from pnr_scope.profiles import (AiryProfile, GaussianProfile, PinholeGeometry, SlitGeometry,
                                SlitProfile, TabulatedProfile, TwoBeamProfile, airy, airy_first_zero,
                                gaussian, rayleigh_separation, slit_sinc2, two_beam)

from oracles import airy_scipy


def refined_max(profile, x):
    """Grid maximum polished by a bounded scalar search (scipy, test side)."""
    y = profile(x)
    i = int(np.argmax(y))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    res = optimize.minimize_scalar(lambda t: -profile(t), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-14 * (x[-1] - x[0])})
    return max(float(y[i]), -float(res.fun))


class TestSlit:
    def test_center_is_one(self, slit_geometry):
        assert slit_sinc2(0.0, slit_geometry) == 1.0

    def test_first_null(self, slit_geometry):
        assert slit_sinc2(slit_geometry.first_null, slit_geometry) < 1e-9

    def test_half_max_crossings(self, slit_geometry):
        # bisection oracle on sinc^2(u) = 1/2 gives u = 0.4429464706894523
        g = slit_geometry
        x_half = g.screen_distance * math.asin(0.4429464706894523 * g.wavelength / g.slit_width)
        assert x_half == pytest.approx(0.632e-3, abs=1e-6)
        assert slit_sinc2(x_half, slit_geometry) == pytest.approx(0.5, abs=1e-9)
        assert slit_sinc2(-x_half, slit_geometry) == pytest.approx(0.5, abs=1e-9)
        assert 2 * x_half == pytest.approx(1.263e-3, abs=1e-6)

    def test_even(self, slit_geometry):
        x = np.linspace(0, 5e-3, 101)
        np.testing.assert_array_equal(slit_sinc2(x, slit_geometry), slit_sinc2(-x, slit_geometry))

    def test_non_positive_geometry_rejected(self):
        with pytest.raises(DomainError):
            SlitGeometry(0.0, 1550e-9, 0.23)
        with pytest.raises(DomainError):
            SlitGeometry(250e-6, -1.0, 0.23)


class TestAiry:
    def test_center_is_one(self, pinhole_geometry):
        assert airy(0.0, pinhole_geometry) == 1.0

    def test_zero_at_first_airy_zero(self, pinhole_geometry):
        assert airy(airy_first_zero(pinhole_geometry), pinhole_geometry) < 1e-9

    def test_rayleigh_radius_nearly_zero(self, pinhole_geometry):
        # 1.22 is the rounded zero; mpmath gives airy(pi*1.22) = 4.749e-8
        v = airy(rayleigh_separation(pinhole_geometry), pinhole_geometry)
        assert v == pytest.approx(4.749282948888747e-08, rel=1e-6)

    def test_half_rayleigh(self, pinhole_geometry):
        # mpmath series oracle: (2 J1(u)/u)^2 at u = 0.61 pi is 0.36729689254586769
        v = airy(0.5 * rayleigh_separation(pinhole_geometry), pinhole_geometry)
        assert v == pytest.approx(0.3672968925458677, abs=1e-12)
        # at the exact half zero radius the value is 0.36752
        assert airy(0.5 * airy_first_zero(pinhole_geometry), pinhole_geometry) == pytest.approx(0.36752, abs=5e-5)

    def test_negative_radius_rejected(self, pinhole_geometry):
        with pytest.raises(DomainError):
            airy(-1e-6, pinhole_geometry)

    def test_first_zero_root_find(self, pinhole_geometry):
        g = pinhole_geometry
        rho = optimize.brentq(lambda r: special.j1(math.pi * r / g.length_scale),
                              1.0 * g.length_scale, 1.5 * g.length_scale)
        assert rho / g.length_scale == pytest.approx(1.22, abs=1e-3)
        assert airy(rho, g) < 1e-20

    def test_matches_scipy(self, pinhole_geometry):
        rho = np.linspace(0, 4 * rayleigh_separation(pinhole_geometry), 2001)
        u = math.pi * rho / pinhole_geometry.length_scale
        np.testing.assert_allclose(airy(rho, pinhole_geometry), airy_scipy(u), atol=1e-13)


class TestGaussian:
    def test_center(self):
        assert gaussian(0.0, 1e-3) == 1.0

    def test_half_point(self):
        w = 2e-3
        assert gaussian(w / math.sqrt(2) * math.sqrt(math.log(2)), w) == pytest.approx(0.5, abs=1e-15)

    def test_fwhm_closed_form(self):
        assert 2 * math.sqrt(math.log(2) / 2) == pytest.approx(1.1774, abs=1e-4)

    def test_bad_waist(self):
        with pytest.raises(DomainError):
            gaussian(0.0, 0.0)


class TestRayleigh:
    def test_bundled_geometry(self, pinhole_geometry):
        assert rayleigh_separation(pinhole_geometry) == pytest.approx(2.521e-3, abs=1e-6)
        assert rayleigh_separation(pinhole_geometry) == pytest.approx(1.22 * 1550e-9 * 0.1 / 75e-6, rel=1e-15)

    def test_scaling(self, pinhole_geometry):
        g = pinhole_geometry
        base = rayleigh_separation(g)
        assert rayleigh_separation(PinholeGeometry(2 * g.aperture, g.wavelength, g.focal_length)) == pytest.approx(base / 2)
        assert rayleigh_separation(PinholeGeometry(g.aperture, 2 * g.wavelength, g.focal_length)) == pytest.approx(2 * base)


class TestTwoBeam:
    def test_coincident_beams_match_base(self, pinhole_geometry):
        base = AiryProfile(pinhole_geometry)
        x = np.linspace(*base.domain, 501)
        np.testing.assert_allclose(two_beam(x, base, 0.0, 1.0), base(x), atol=1e-12)

    def test_beam_center_value(self, pinhole_geometry):
        base = AiryProfile(pinhole_geometry)
        s = rayleigh_separation(pinhole_geometry)
        tb = TwoBeamProfile(base, s)
        assert tb.raw(s / 2) == pytest.approx(1.0, abs=1e-7)
        assert tb(s / 2) == pytest.approx(tb.raw(s / 2) / tb.normalisation, abs=1e-15)
        assert tb.normalisation == pytest.approx(1.0, abs=1e-6)

    def test_rayleigh_midpoint(self, pinhole_geometry):
        base = AiryProfile(pinhole_geometry)
        s = rayleigh_separation(pinhole_geometry)
        tb = TwoBeamProfile(base, s)
        assert tb.raw(0.0) == pytest.approx(2 * 0.3672968925458677, abs=1e-12)
        assert tb(0.0) == pytest.approx(0.7346 / tb.normalisation, abs=1e-4)

    def test_global_max_is_one(self, pinhole_geometry):
        base = AiryProfile(pinhole_geometry)
        for frac in (0.3, 0.8, 1.0, 1.7):
            tb = TwoBeamProfile(base, frac * rayleigh_separation(pinhole_geometry), 0.7)
            x = np.linspace(*tb.domain, 200001)
            assert np.max(tb(x)) <= 1.0 + 1e-12
            assert refined_max(tb, x) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_when_equal(self, pinhole_geometry):
        tb = TwoBeamProfile(AiryProfile(pinhole_geometry), 0.9 * rayleigh_separation(pinhole_geometry))
        x = np.linspace(0, 5e-3, 301)
        np.testing.assert_allclose(tb(x), tb(-x), atol=1e-14)

    def test_imbalance_applies_to_left_beam(self, pinhole_geometry):
        s = 3 * rayleigh_separation(pinhole_geometry)
        tb = TwoBeamProfile(AiryProfile(pinhole_geometry), s, 0.5)
        other = airy(s, pinhole_geometry)
        assert tb.raw(-s / 2) == pytest.approx(0.5 + other, abs=1e-14)
        assert tb.raw(s / 2) == pytest.approx(1.0 + 0.5 * other, abs=1e-14)

    @pytest.mark.parametrize("kw", [{"separation": -1.0}, {"imbalance": 0.0}, {"imbalance": 1.5}])
    def test_invalid(self, pinhole_geometry, kw):
        args = {"separation": 1e-3, "imbalance": 1.0, **kw}
        with pytest.raises(DomainError):
            TwoBeamProfile(AiryProfile(pinhole_geometry), **args)

    def test_nested_two_beam_rejected(self, pinhole_geometry):
        tb = TwoBeamProfile(AiryProfile(pinhole_geometry), 1e-3)
        with pytest.raises(DomainError):
            TwoBeamProfile(tb, 1e-3)


def test_tabulated_interpolates():
    tp = TabulatedProfile([0.0, 1.0, 2.0], [0.0, 1.0, 0.5])
    assert tp(0.5) == 0.5
    assert tp(3.0) == 0.0
    with pytest.raises(DomainError):
        TabulatedProfile([0.0, 1.0], [0.0, 1.5])


def test_default_domains(slit_geometry, pinhole_geometry):
    assert SlitProfile(slit_geometry).domain == pytest.approx((-3 * slit_geometry.first_null, 3 * slit_geometry.first_null))
    r = rayleigh_separation(pinhole_geometry)
    assert AiryProfile(pinhole_geometry).domain == pytest.approx((-3 * r, 3 * r))
    assert GaussianProfile(2.0).domain == (-6.0, 6.0)


positive = st.floats(min_value=1e-2, max_value=1e2)


@settings(max_examples=60, deadline=None)
@given(d=positive, lam=positive, z=positive, w=positive, frac=st.floats(0, 2), r=st.floats(0.05, 1.0))
def test_all_profiles_bounded_and_normalised(d, lam, z, w, frac, r):
    profiles = [SlitProfile(SlitGeometry(d, lam, z)), AiryProfile(PinholeGeometry(d, lam, z)),
                GaussianProfile(w)]
    profiles.append(TwoBeamProfile(profiles[1], frac * profiles[1].scale, r))
    for p in profiles:
        x = np.linspace(*p.domain, 4001)
        y = p(x)
        assert np.all(y >= 0) and np.all(y <= 1 + 1e-12)
        assert refined_max(p, x) == pytest.approx(1.0, abs=1e-9)
