"""
The twelve acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion with the measured value.
"""
import time

import numpy as np
import pytest
from scipy import stats

from pnr_scope import scenario
from pnr_scope.analysis import contrast, fit_profile, fwhm, slit_model, sparrow_limit, two_beam_curves
from pnr_scope.photon_stats import (DetectionModel, SourceStatistics, beamsplitter_transform,
                                    conditional_profile, spd_click_profile)
from pnr_scope.profiles import (AiryProfile, GaussianProfile, SlitProfile, TwoBeamProfile, airy,
                                rayleigh_separation)
from pnr_scope.runner import run_scenario
from pnr_scope.simulate import ScanPlan, per_k_profiles, reconstruct_classical, run_scan

import oracles

MU_BEAM = 5.3
MU_SLIT = 3.6


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def rayleigh_contrast(pinhole_geometry, name, s=1.0, k_list=()):
    r = rayleigh_separation(pinhole_geometry)
    _, curves = two_beam_curves(SourceStatistics.coherent(MU_BEAM), pinhole_geometry, MU_BEAM,
                                s * r, k_list)
    return contrast(curves[name], s * r, pinhole_geometry)


@pytest.fixture(scope="module")
def slit_scan():
    from pnr_scope.profiles import SlitGeometry
    geom = SlitGeometry(250e-6, 1550e-9, 0.23)
    prof = SlitProfile(geom)
    x = np.arange(-40, 41) * 50e-6
    plan = ScanPlan(tuple(x), 100_000, DetectionModel("number-resolving", 9), 20100401)
    with Timer() as t:
        table = run_scan(SourceStatistics.coherent(MU_SLIT), prof, MU_SLIT, plan)
    return geom, prof, table, t.elapsed


@pytest.mark.acceptance(1, "beamsplitter summation equals the Poisson, geometric and binomial closed forms")
def test_c01_closed_forms(report):
    mus = np.arange(0.5, 20.001, 0.5)
    t2 = np.round(np.linspace(0, 1, 11), 12)
    worst = 0.0
    with Timer() as t:
        for mu in mus:
            for k in range(41):
                worst = max(worst, np.max(np.abs(
                    beamsplitter_transform(SourceStatistics.coherent(mu), t2, k) - oracles.poisson(k, mu * t2))))
                worst = max(worst, np.max(np.abs(
                    beamsplitter_transform(SourceStatistics.thermal(mu), t2, k)
                    - oracles.geometric_thermal(k, mu * t2))))
        for n in range(0, 41, 4):
            for k in range(41):
                worst = max(worst, np.max(np.abs(
                    beamsplitter_transform(SourceStatistics.fock(n), t2, k) - oracles.binom(k, n, t2))))
    report(f"max |diff| = {worst:.2e}, {t.elapsed:.1f} s")
    assert worst < 1e-12
    assert t.elapsed < 60


@pytest.mark.acceptance(2, "classical contrast at the Rayleigh separation is 0.154 +/- 0.005")
def test_c02_classical_rayleigh(pinhole_geometry, report):
    with Timer() as t:
        c = rayleigh_contrast(pinhole_geometry, "C_classical").contrast
    # oracle: peak at a beam centre, saddle at the midpoint
    r = rayleigh_separation(pinhole_geometry)
    u = np.pi * pinhole_geometry.aperture * np.array([r, r / 2]) / (pinhole_geometry.wavelength
                                                                   * pinhole_geometry.focal_length)
    peak, sad = 1 + oracles.airy_scipy(u[0]), 2 * oracles.airy_scipy(u[1])
    report(f"C = {c:.4f}, centre/midpoint oracle {(peak - sad) / (peak + sad):.4f}")
    assert c == pytest.approx(0.154, abs=0.005)
    assert t.elapsed < 1


@pytest.mark.acceptance(3, "k=12 contrast at Rayleigh with mu_beam = 5.3 is 0.82 +/- 0.02")
def test_c03_k12_rayleigh(pinhole_geometry, report):
    with Timer() as t:
        c = rayleigh_contrast(pinhole_geometry, "C_k12", k_list=[12]).contrast
    p_hi, p_lo = stats.poisson.pmf(12, 5.3), stats.poisson.pmf(12, 3.885)
    oracle = (p_hi - p_lo) / (p_hi + p_lo)
    report(f"C = {c:.4f}, pmf-ratio oracle {oracle:.4f}")
    assert c == pytest.approx(0.82, abs=0.02)
    assert oracle == pytest.approx(0.82, abs=0.02)
    assert t.elapsed < 1


@pytest.mark.acceptance(4, "click-detector contrast at Rayleigh is below 0.05")
def test_c04_spd_rayleigh(pinhole_geometry, report):
    with Timer() as t:
        c = rayleigh_contrast(pinhole_geometry, "C_spd").contrast
    report(f"C = {c:.4f}")
    assert c < 0.05
    assert t.elapsed < 1


@pytest.mark.acceptance(5, "classical contrast at 0.97 Rayleigh is 0.13 +/- 0.02")
def test_c05_classical_097(pinhole_geometry, report):
    with Timer() as t:
        c = rayleigh_contrast(pinhole_geometry, "C_classical", s=0.97).contrast
    report(f"C = {c:.4f}")
    assert c == pytest.approx(0.13, abs=0.02)
    assert t.elapsed < 1


@pytest.mark.acceptance(6, "slit FWHM compression at mu = 3.6: 2.31 vs classical, 3.42 vs click detector (2%)")
def test_c06_slit_compression(slit_geometry, report):
    prof = SlitProfile(slit_geometry)
    src = SourceStatistics.coherent(MU_SLIT)
    with Timer() as t:
        w_cl = fwhm(prof)
        w_k9 = fwhm(lambda x: conditional_profile(src, prof, 9, x, MU_SLIT), domain=prof.domain)
        w_spd = fwhm(lambda x: spd_click_profile(src, prof, MU_SLIT, x), domain=prof.domain)

    def width_u(w):
        return slit_geometry.u(w.right) - slit_geometry.u(w.left)

    # oracles: half-level conditions on sinc^2 solved with brentq
    u_cl = 2 * oracles.sinc2_inverse(0.5)
    f9 = oracles.half_level(lambda f: oracles.poisson(9, MU_SLIT * f) - 0.5 * oracles.poisson(9, MU_SLIT))
    u_k9 = 2 * oracles.sinc2_inverse(f9)
    f_spd = oracles.half_level(lambda f: -np.expm1(-MU_SLIT * f) + 0.5 * np.expm1(-MU_SLIT))
    u_spd = 2 * oracles.sinc2_inverse(f_spd)
    r_cl, r_spd = width_u(w_cl) / width_u(w_k9), width_u(w_spd) / width_u(w_k9)
    report(f"ratios {r_cl:.4f} and {r_spd:.4f}; oracles {u_cl / u_k9:.4f} and {u_spd / u_k9:.4f}")
    assert width_u(w_k9) == pytest.approx(u_k9, rel=1e-6)
    assert 1 / r_cl == pytest.approx(1 / 2.31, rel=0.02)
    assert 1 / r_spd == pytest.approx(1 / 3.42, rel=0.02)
    assert t.elapsed < 1


@pytest.mark.acceptance(7, "Monte Carlo per-k profiles within 5 SE; chi-square at the peak passes at 1e-3")
def test_c07_monte_carlo(slit_scan, report):
    geom, prof, table, elapsed = slit_scan
    src = SourceStatistics.coherent(MU_SLIT)
    rates = per_k_profiles(table)
    worst = 0.0
    for k in range(10):
        p = conditional_profile(src, prof, k, table.x, MU_SLIT)
        se = np.sqrt(p * (1 - p) / table.total)
        z = np.abs(rates[k] - p) / np.where(se > 0, se, np.inf)
        assert np.all(rates[k][se == 0] == p[se == 0])
        worst = max(worst, float(np.max(z)))
    i = int(np.argmin(np.abs(table.x)))
    k = np.arange(10)
    expected = np.append(oracles.poisson(k, MU_SLIT), stats.poisson.sf(9, MU_SLIT)) * table.total[i]
    observed = np.append(table.counts[i], table.overflow[i])
    keep = expected >= 5
    obs, exp = observed[keep], expected[keep]
    if not keep.all():
        obs = np.append(obs, observed[~keep].sum())
        exp = np.append(exp, expected[~keep].sum())
    pval = stats.chisquare(obs, exp).pvalue
    report(f"max |z| = {worst:.2f}, chi-square p = {pval:.3f}, scan {elapsed:.2f} s")
    assert worst <= 5
    assert pval > 1e-3
    assert elapsed < 30


@pytest.mark.acceptance(8, "fits: noiseless data to 1e-6 relative, Monte Carlo mu within 2% of 3.6")
def test_c08_fit_recovery(slit_scan, report):
    geom, prof, table, _ = slit_scan
    truth = {"mu": MU_SLIT, "scale": 1.0, "center": 2e-5}
    with Timer() as t:
        y = slit_model(table.x, truth, geom)
        clean = fit_profile(table.x, y, "slit", geom, initial={"mu": 3.0, "scale": 1.1, "center": 0.0})
        noisy = fit_profile(table.x, reconstruct_classical(table), "slit", geom)
    rel = max(abs(clean.params[n] - v) / max(abs(v), 1e-300) for n, v in truth.items())
    report(f"noiseless worst rel err {rel:.1e}, Monte Carlo mu = {noisy.params['mu']:.4f}, {t.elapsed:.1f} s")
    assert clean.converged and rel < 1e-6
    assert noisy.params["mu"] == pytest.approx(MU_SLIT, rel=0.02)
    assert t.elapsed < 30


@pytest.mark.acceptance(9, "Sparrow limit is 0.8 +/- 0.05 Rayleigh; below it contrast reports no dip")
def test_c09_sparrow(pinhole_geometry, report):
    with Timer() as t:
        sp = sparrow_limit(pinhole_geometry)
        flags = []
        base = AiryProfile(pinhole_geometry)
        for f in (0.5, 0.9, 0.99):
            s = f * sp.separation
            rep = contrast(TwoBeamProfile(base, s), s, pinhole_geometry)
            flags.append(rep.no_dip and rep.contrast == 0.0)
    report(f"s*/R = {sp.rayleigh_units:.4f}")
    assert sp.rayleigh_units == pytest.approx(0.8, abs=0.05)
    assert all(flags)
    assert t.elapsed < 1


@pytest.mark.acceptance(10, "Gaussian ordering Fock < coherent < classical < thermal at mean 10, k=10")
def test_c10_statistics_ordering(report):
    prof = GaussianProfile(1.0)
    dom = (-4.0, 4.0)
    with Timer() as t:
        widths = {"classical": fwhm(prof, domain=dom).fwhm}
        for name, src in [("fock", SourceStatistics.fock(10)), ("coherent", SourceStatistics.coherent(10)),
                          ("thermal", SourceStatistics.thermal(10))]:
            widths[name] = fwhm(lambda x, s=src: conditional_profile(s, prof, 10, x, 10.0), domain=dom).fwhm
    # Fock N=10, k=10 is T^20, so the half level is f = 2**-0.1
    fock_oracle = oracles.gaussian_width_from_level(2 ** -0.1)
    coh_f = oracles.half_level(lambda f: oracles.poisson(10, 10 * f) - 0.5 * oracles.poisson(10, 10))
    coh_oracle = oracles.gaussian_width_from_level(coh_f)
    report(", ".join(f"{k} {v:.4f}w" for k, v in widths.items()))
    assert widths["fock"] < widths["coherent"] < widths["classical"] < widths["thermal"]
    assert widths["fock"] == pytest.approx(0.3724, rel=0.005)
    assert widths["fock"] == pytest.approx(fock_oracle, rel=1e-9)
    assert widths["coherent"] == pytest.approx(0.892, rel=0.01)
    assert widths["coherent"] == pytest.approx(coh_oracle, rel=1e-9)
    assert t.elapsed < 1


@pytest.mark.acceptance(11, "k=1 slit profile at mu = 3.6 dips at x=0 and peaks where sinc^2 = 1/3.6")
def test_c11_off_center_peaks(slit_geometry, report):
    prof = SlitProfile(slit_geometry)
    src = SourceStatistics.coherent(MU_SLIT)
    with Timer() as t:
        x = np.linspace(-slit_geometry.first_null, slit_geometry.first_null, 4001)
        y = conditional_profile(src, prof, 1, x, MU_SLIT)
    mid = x.size // 2
    interior = np.arange(1, x.size - 1)
    maxima = interior[(y[interior] > y[interior - 1]) & (y[interior] >= y[interior + 1])]
    grid_tol = 2 * float(np.max(np.abs(np.diff(prof(x)))))
    levels = prof(x[maxima])
    report(f"maxima at sinc^2 = {', '.join(f'{v:.4f}' for v in levels)} (target {1 / MU_SLIT:.4f})")
    assert y[mid] < y[mid - 1] and y[mid] < y[mid + 1]
    assert maxima.size == 2
    assert np.all(np.abs(levels - 1 / MU_SLIT) <= grid_tol)
    assert x[maxima[0]] == pytest.approx(-x[maxima[1]], abs=1e-12)
    assert t.elapsed < 1


@pytest.mark.acceptance(12, "bundled scenarios produce byte-identical CSVs across runs and thread counts")
def test_c12_determinism(report):
    names = scenario.bundled_names()
    for name in names:
        doc = scenario.load(name)
        a = run_scenario(doc, threads=1).files()
        b = run_scenario(doc, threads=1).files()
        c = run_scenario(doc, threads=4).files()
        assert a == b == c, name
        assert any(f.endswith(".csv") for f in a)
    report(f"{len(names)} scenarios, 1 vs 1 vs 4 threads")
