"""
Derived metrics on spatial profiles: widths, compression, two-beam contrast,
the Sparrow crossover and least-squares fits of the diffraction models.

Curves are accepted either as callables of position (with a domain) or as
sampled ``(x, y)`` pairs.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConfigurationError, NoPeakError, NumericalError
from .photon_stats import (SourceStatistics, classical_mean_profile, conditional_profile,
                           poisson_pmf, spd_click_profile)
from .profiles import (AiryProfile, IrradianceProfile, PinholeGeometry, SlitGeometry,
                       SlitProfile, TwoBeamProfile, rayleigh_separation)
from .simulate import worker_count

DEFAULT_GRID = 4096


@dataclass(frozen=True)
class FwhmResult:
    fwhm: float
    peak_position: float
    peak_value: float
    left: float
    right: float
    multimodal: bool = False


@dataclass(frozen=True)
class ContrastReport:
    i_max: float
    i_saddle: float
    contrast: float
    peak_position: float
    saddle_position: float | None
    separation: float
    separation_rayleigh: float | None
    no_dip: bool = False


@dataclass(frozen=True)
class FitResult:
    params: dict
    residual: float
    iterations: int
    converged: bool
    gradient_norm: float
    model: str
    detection: str


@dataclass(frozen=True)
class SparrowLimit:
    separation: float
    rayleigh_units: float | None


def _sample(curve, domain, n):
    if callable(curve):
        if domain is None:
            domain = getattr(curve, "domain", None)
        if domain is None:
            raise ConfigurationError("a callable curve needs a domain")
        x = np.linspace(domain[0], domain[1], n)
        return x, np.asarray(curve(x), dtype=float), curve
    x, y = curve
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise ConfigurationError("sampled curves need matching 1-D x and y with >= 3 points")
    order = np.argsort(x)
    return x[order], y[order], None


def _crossing(x, y, i, j, half, fn):
    """Half-max crossing between samples i and j (one above, one below)."""
    xi, xj, yi, yj = x[i], x[j], y[i], y[j]
    if fn is not None:
        try:
            return float(optimize.brentq(lambda t: float(fn(t)) - half, min(xi, xj), max(xi, xj),
                                         xtol=1e-14 * max(1.0, abs(xi))))
        except ValueError:
            pass
    return float(xi + (half - yi) * (xj - xi) / (yj - yi))


def fwhm(curve, domain=None, n_grid: int = DEFAULT_GRID, lobe_floor: float = 0.1) -> FwhmResult:
    """
    Full width at half maximum of the lobe containing the global maximum.

    The maximum is located on an `n_grid` grid and, for callables, refined
    by a bounded Brent search; crossings of callables are polished with
    ``brentq``, sampled curves use linear interpolation.  Above-half-maximum intervals separated by a
    dip that stays above ``lobe_floor * peak`` belong to the same lobe; in
    that case the width spans the outermost crossings and ``multimodal`` is
    set (a coherent profile conditioned on ``k`` below the mean does this).
    """
    x, y, fn = _sample(curve, domain, n_grid)
    if not np.all(np.isfinite(y)):
        raise NoPeakError("curve contains non-finite values")
    i_pk = int(np.argmax(y))
    y_pk = float(y[i_pk])
    if y_pk <= 0 or y_pk == float(np.min(y)):
        raise NoPeakError("curve has no positive, non-flat maximum")
    x_pk = float(x[i_pk])
    if fn is not None and 0 < i_pk < x.size - 1:
        # Brent's bounded search (golden section with parabolic steps)
        res = optimize.minimize_scalar(lambda t: -float(fn(t)), bounds=(x[i_pk - 1], x[i_pk + 1]),
                                       method="bounded", options={"xatol": 1e-12 * (x[-1] - x[0])})
        if -res.fun >= y_pk:
            x_pk, y_pk = float(res.x), float(-res.fun)
    half = 0.5 * y_pk

    above = y >= half
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    starts = [0] if above[0] else []
    ends = []
    for e in edges:
        if above[e + 1]:
            starts.append(e + 1)
        else:
            ends.append(e)
    if above[-1]:
        ends.append(x.size - 1)
    segments = list(zip(starts, ends))
    seg = next(n for n, (a, b) in enumerate(segments) if a <= i_pk <= b)

    first = last = seg
    while first > 0 and y[segments[first - 1][1] + 1:segments[first][0]].min() >= lobe_floor * y_pk:
        first -= 1
    while last < len(segments) - 1 and y[segments[last][1] + 1:segments[last + 1][0]].min() >= lobe_floor * y_pk:
        last += 1
    lo, hi = segments[first][0], segments[last][1]
    if lo == 0 or hi == x.size - 1:
        raise NumericalError("curve does not fall to half maximum inside the domain")
    left = _crossing(x, y, lo - 1, lo, half, fn)
    right = _crossing(x, y, hi, hi + 1, half, fn)
    return FwhmResult(fwhm=right - left, peak_position=x_pk, peak_value=y_pk, left=left, right=right,
                      multimodal=last > first)


def compression_factor(curve_a, curve_b, domain=None) -> float:
    """``fwhm(b) / fwhm(a)``; above 1 when `curve_a` is the narrower one."""
    fa = curve_a if isinstance(curve_a, FwhmResult) else fwhm(curve_a, domain)
    fb = curve_b if isinstance(curve_b, FwhmResult) else fwhm(curve_b, domain)
    return fb.fwhm / fa.fwhm


def _rayleigh_length(geometry):
    if geometry is None:
        return None
    if isinstance(geometry, PinholeGeometry):
        return rayleigh_separation(geometry)
    return float(geometry)


def contrast(curve, separation: float, geometry=None, center: float = 0.0, domain=None,
             locations=None, n_grid: int = DEFAULT_GRID) -> ContrastReport:
    """
    Peak/saddle contrast ``(I_max - I_saddle) / (I_max + I_saddle)`` of a two-beam curve.

    Parameters
    ----------
    curve : callable or (x, y)
        Two-beam profile, detection probability or sampled rates.
    separation : float
        Beam separation in metres; beams sit at ``center -/+ separation/2``.
    geometry : PinholeGeometry or float, optional
        Used only to express the separation in Rayleigh units.
    locations : (x_peak, x_saddle), optional
        For sampled data: read the rates at the samples nearest these
        positions instead of searching.

    Returns
    -------
    ContrastReport
        ``no_dip`` is set, and the contrast is 0, when the curve has no
        interior minimum between the beam centres.
    """
    if not (separation > 0):
        raise ConfigurationError("contrast needs two beams with separation > 0")
    ray = _rayleigh_length(geometry)
    s_ray = separation / ray if ray else None
    c1, c2 = center - separation / 2, center + separation / 2

    if callable(curve) and domain is None and getattr(curve, "domain", None) is None:
        domain = (c1 - separation, c2 + separation)
    x, y, fn = _sample(curve, domain, n_grid)

    if locations is not None:
        if fn is not None:
            i_max, i_sad = float(fn(locations[0])), float(fn(locations[1]))
            xp, xs = float(locations[0]), float(locations[1])
        else:
            ip = int(np.argmin(np.abs(x - locations[0])))
            isd = int(np.argmin(np.abs(x - locations[1])))
            i_max, i_sad, xp, xs = float(y[ip]), float(y[isd]), float(x[ip]), float(x[isd])
        if i_max <= 0:
            raise NoPeakError("peak value must be positive")
        if i_sad >= i_max:
            return ContrastReport(i_max, i_max, 0.0, xp, None, separation, s_ray, no_dip=True)
        return ContrastReport(i_max, max(i_sad, 0.0), (i_max - i_sad) / (i_max + i_sad), xp, xs,
                              separation, s_ray)

    i_pk = int(np.argmax(y))
    x_pk, y_pk = float(x[i_pk]), float(y[i_pk])
    if y_pk <= 0:
        raise NoPeakError("curve has no positive maximum")
    if fn is not None and 0 < i_pk < x.size - 1:
        res = optimize.minimize_scalar(lambda t: -float(fn(t)), bounds=(x[i_pk - 1], x[i_pk + 1]),
                                       method="bounded", options={"xatol": 1e-13 * max(separation, 1e-300)})
        if -res.fun >= y_pk:
            x_pk, y_pk = float(res.x), float(-res.fun)

    no_dip = ContrastReport(y_pk, y_pk, 0.0, x_pk, None, separation, s_ray, no_dip=True)
    # the maxima drift inward from the beam centres near the Sparrow limit, so
    # look for interior local minima rather than the minimum over the interval
    inner = np.flatnonzero((x > c1) & (x < c2))
    inner = inner[(inner > 0) & (inner < x.size - 1)]
    tiny = 1e-12 * y_pk
    is_min = (y[inner] < y[inner - 1] - tiny) & (y[inner] <= y[inner + 1]) | \
             (y[inner] <= y[inner - 1]) & (y[inner] < y[inner + 1] - tiny)
    candidates = inner[is_min]
    if candidates.size == 0:
        return no_dip
    i_min = int(candidates[np.argmin(y[candidates])])
    y_min = float(y[i_min])
    x_min = float(x[i_min])
    if fn is not None:
        res = optimize.minimize_scalar(lambda t: float(fn(t)), bounds=(x[i_min - 1], x[i_min + 1]),
                                       method="bounded", options={"xatol": 1e-13 * separation})
        if res.fun <= y_min:
            x_min, y_min = float(res.x), float(res.fun)
    y_min = max(y_min, 0.0)
    if y_min >= y_pk:
        return no_dip
    return ContrastReport(y_pk, y_min, (y_pk - y_min) / (y_pk + y_min), x_pk, x_min, separation, s_ray)


@dataclass
class ContrastSweep:
    """Contrast table, one row per separation, columns per detection mode."""

    s_rayleigh: np.ndarray
    s_m: np.ndarray
    columns: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict, repr=False)

    def header(self) -> list[str]:
        return ["s_rayleigh"] + list(self.columns) + ["s_m"]

    def rows(self):
        for i, s in enumerate(self.s_rayleigh):
            yield [float(s)] + [float(v[i]) for v in self.columns.values()] + [float(self.s_m[i])]

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([repr(v) for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def two_beam_curves(src: SourceStatistics, geometry: PinholeGeometry, beam_mean: float,
                    separation: float, k_list=(), imbalance: float = 1.0):
    """Callables for the classical, click-detector and per-``k`` two-beam profiles."""
    tb = TwoBeamProfile(AiryProfile(geometry), separation, imbalance)
    curves = {"C_classical": lambda x: classical_mean_profile(tb, beam_mean, x),
              "C_spd": lambda x: spd_click_profile(src, tb, beam_mean, x)}
    for k in k_list:
        curves[f"C_k{k}"] = (lambda kk: (lambda x: conditional_profile(src, tb, kk, x, beam_mean)))(k)
    for fn in curves.values():
        fn.domain = tb.domain
    return tb, curves


def contrast_sweep(src: SourceStatistics, geometry: PinholeGeometry, beam_mean: float, k_list,
                   s_list, imbalance: float = 1.0, threads: int | None = None) -> ContrastSweep:
    """
    Contrast versus separation for the classical, click-detector and per-``k`` profiles.

    `s_list` is in Rayleigh units.  Separations are evaluated in parallel
    when more than one worker thread is allowed; row order always follows
    `s_list`.
    """
    ray = rayleigh_separation(geometry)
    s_rel = np.asarray(list(s_list), dtype=float)
    k_list = [int(k) for k in k_list]

    def one(s):
        _, curves = two_beam_curves(src, geometry, beam_mean, s * ray, k_list, imbalance)
        return {name: contrast(fn, s * ray, geometry) for name, fn in curves.items()}

    workers = min(worker_count(threads), max(1, s_rel.size))
    if workers == 1:
        results = [one(s) for s in s_rel]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, s_rel))
    names = ["C_classical", "C_spd"] + [f"C_k{k}" for k in k_list]
    columns = {n: np.array([r[n].contrast for r in results]) for n in names}
    reports = {n: [r[n] for r in results] for n in names}
    return ContrastSweep(s_rel, s_rel * ray, columns, reports)


def _midpoint_curvature(base: IrradianceProfile, s: float, h: float) -> float:
    c = getattr(base, "center", 0.0)

    def summed(x):
        return base(c + x - s / 2) + base(c + x + s / 2)

    return (summed(h) - 2.0 * summed(0.0) + summed(-h)) / (h * h)


def sparrow_limit(profile, geometry=None) -> SparrowLimit:
    """
    Separation at which two equal beams merge into a flat top.

    Root-finds the zero of the second derivative of the summed profile at
    the midpoint.  `profile` is a single-beam profile or a
    :class:`PinholeGeometry` (Airy beams).
    """
    if isinstance(profile, PinholeGeometry):
        geometry = geometry if geometry is not None else profile
        profile = AiryProfile(profile)
    if isinstance(profile, TwoBeamProfile):
        raise ConfigurationError("sparrow_limit takes a single-beam profile")
    scale = profile.scale
    h = 1e-3 * scale
    s_grid = np.linspace(0.02, 2.0, 200) * scale
    curv = np.array([_midpoint_curvature(profile, s, h) for s in s_grid])
    sign_change = np.flatnonzero((curv[:-1] < 0) & (curv[1:] > 0))
    if sign_change.size == 0:
        raise NumericalError("no flat-top crossover found for this profile")
    i = int(sign_change[0])
    try:
        s_star = optimize.brentq(lambda s: _midpoint_curvature(profile, s, h), s_grid[i], s_grid[i + 1],
                                 xtol=1e-15 * scale, rtol=1e-14)
    except ValueError as exc:
        raise NumericalError(f"Sparrow bracket failed: {exc}") from exc
    ray = _rayleigh_length(geometry)
    return SparrowLimit(float(s_star), float(s_star / ray) if ray else None)


# ---------------------------------------------------------------- fitting

SLIT_PARAMS = ("mu", "scale", "center")
TWO_BEAM_PARAMS = ("mu_beam", "separation", "imbalance", "center", "width_scale")


def detection_transform(mean, detection: str, k: int | None = None):
    """Map a detected-mean profile to what a given detector reports (coherent light)."""
    mean = np.asarray(mean, dtype=float)
    if detection == "classical-mean":
        return mean
    if detection == "conventional-single-photon":
        return -np.expm1(-mean)
    if detection == "number-resolving":
        if k is None:
            raise ConfigurationError("number-resolving fits need k")
        return poisson_pmf(k, mean)
    raise ConfigurationError(f"unknown detection mode {detection!r}")


def slit_model(x, params, geometry: SlitGeometry, detection="classical-mean", k=None):
    prof = SlitProfile(geometry, scale=params["scale"], center=params["center"])
    return detection_transform(params["mu"] * prof(x), detection, k)


def two_beam_model(x, params, geometry: PinholeGeometry, detection="classical-mean", k=None):
    tb = TwoBeamProfile(AiryProfile(geometry), params["separation"], params["imbalance"],
                        center=params["center"], width_scale=params["width_scale"])
    return detection_transform(params["mu_beam"] * tb.raw(x), detection, k)


def fit_profile(x, data, model: str, geometry, detection: str = "classical-mean", k: int | None = None,
                initial: dict | None = None, max_iter: int = 500, xtol: float = 1e-9,
                gtol: float = 1e-6) -> FitResult:
    """
    Least-squares fit of the slit or two-beam model by Nelder-Mead.

    Parameters are rescaled by their initial values (positions by the
    geometry's length scale) so that `xtol` is a relative simplex size.
    The model assumes coherent light for the per-``k`` and click detectors.

    Returns
    -------
    FitResult
        ``converged`` is False, not an exception, when the simplex does not
        shrink below `xtol` within `max_iter` iterations or the objective
        gradient stays above `gtol`.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(data, dtype=float)
    if model == "slit":
        if not isinstance(geometry, SlitGeometry):
            raise ConfigurationError("slit fits need a SlitGeometry")
        names = SLIT_PARAMS
        defaults = {"mu": float(np.max(y)) if detection == "classical-mean" else 1.0,
                    "scale": 1.0, "center": 0.0}
        length = geometry.first_null
        bounds = {"mu": (1e-12, None), "scale": (1e-6, None), "center": (None, None)}

        def predict(p):
            return slit_model(x, p, geometry, detection, k)
    elif model == "two-beam":
        if not isinstance(geometry, PinholeGeometry):
            raise ConfigurationError("two-beam fits need a PinholeGeometry")
        names = TWO_BEAM_PARAMS
        defaults = {"mu_beam": 1.0, "separation": rayleigh_separation(geometry), "imbalance": 1.0,
                    "center": 0.0, "width_scale": 1.0}
        length = rayleigh_separation(geometry)
        bounds = {"mu_beam": (1e-12, None), "separation": (0.0, None), "imbalance": (1e-6, 1.0),
                  "center": (None, None), "width_scale": (1e-6, None)}

        def predict(p):
            return two_beam_model(x, p, geometry, detection, k)
    else:
        raise ConfigurationError(f"unknown model {model!r}")

    if y.shape != x.shape or x.size < 2 * len(names):
        raise ConfigurationError(f"need at least {2 * len(names)} data points for a {model} fit")
    p0 = dict(defaults)
    if initial:
        unknown = set(initial) - set(names)
        if unknown:
            raise ConfigurationError(f"unknown fit parameters {sorted(unknown)}")
        p0.update({n: float(v) for n, v in initial.items()})

    # z-space: p = p0 + z * unit, unit = |p0| (or length for positions)
    unit = np.array([length if n == "center" or p0[n] == 0 else abs(p0[n]) for n in names])
    origin = np.array([p0[n] for n in names])
    signal = float(np.dot(y, y)) or 1.0

    def unpack(z):
        return dict(zip(names, origin + z * unit))

    def objective(z):
        r = predict(unpack(z)) - y
        return float(np.dot(r, r)) / signal

    zb = []
    for n, u, o in zip(names, unit, origin):
        lo, hi = bounds[n]
        zb.append(((lo - o) / u if lo is not None else None, (hi - o) / u if hi is not None else None))

    z = np.zeros(len(names))
    iterations = 0
    success = False
    # restarts guard against a collapsed simplex; the total budget stays max_iter
    for _ in range(4):
        budget = max_iter - iterations
        if budget <= 0:
            break
        simplex = np.vstack([z] + [z + 0.05 * np.eye(len(names))[i] for i in range(len(names))])
        for i, (lo, hi) in enumerate(zb):
            if hi is not None:
                simplex[:, i] = np.where(simplex[:, i] > hi, 2 * z[i] - simplex[:, i], simplex[:, i])
            if lo is not None:
                simplex[:, i] = np.maximum(simplex[:, i], lo)
        res = optimize.minimize(objective, z, method="Nelder-Mead", bounds=zb,
                                options={"maxiter": budget, "xatol": xtol, "fatol": np.inf,
                                         "initial_simplex": simplex})
        iterations += int(res.nit)
        moved = float(np.max(np.abs(res.x - z)))
        z = res.x
        success = bool(res.success)
        if success and moved <= xtol:
            break

    # central-difference gradient of the normalised objective
    h = 1e-6
    grad = np.array([(objective(z + h * e) - objective(z - h * e)) / (2 * h) for e in np.eye(len(names))])
    gnorm = float(np.linalg.norm(grad))
    params = unpack(z)
    residual = objective(z) * signal
    return FitResult(params={n: float(v) for n, v in params.items()}, residual=residual,
                     iterations=iterations, converged=success and gnorm <= gtol,
                     gradient_norm=gnorm, model=model, detection=detection)
