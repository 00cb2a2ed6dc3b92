"""
Normalised irradiance (transmission) profiles of diffraction-limited beams.

Every profile maps a transverse position ``x`` in metres to ``T^2(x)`` in
[0, 1], the quantity that plays the role of a position-dependent
beamsplitter transmission in :mod:`pnr_scope.photon_stats`.  Profiles are
one-dimensional cuts; the Airy pattern is evaluated along a single axis
through its centre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize

from .bessel import J1_FIRST_ZERO, bessel_j1
from .errors import DomainError

RAYLEIGH_FACTOR = 1.22
NORMALISATION_GRID = 4097


def _require_positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class SlitGeometry:
    """Single-slit far field: slit width, wavelength and slit-to-screen distance (m)."""

    slit_width: float
    wavelength: float
    screen_distance: float

    def __post_init__(self):
        _require_positive(slit_width=self.slit_width, wavelength=self.wavelength,
                          screen_distance=self.screen_distance)

    @property
    def first_null(self) -> float:
        """Transverse distance of the first zero, ``lambda*z/d`` (small angle)."""
        return self.wavelength * self.screen_distance / self.slit_width

    def u(self, x):
        """Dimensionless sinc argument ``d*sin(x/z)/lambda``."""
        return self.slit_width * np.sin(np.asarray(x, dtype=float) / self.screen_distance) / self.wavelength


@dataclass(frozen=True)
class PinholeGeometry:
    """
    Circular aperture imaged by a lens.

    ``aperture`` is the pinhole *diameter*; with that reading the first
    Airy zero sits at ``1.22*lambda*f/D``.
    """

    aperture: float
    wavelength: float
    focal_length: float

    def __post_init__(self):
        _require_positive(aperture=self.aperture, wavelength=self.wavelength,
                          focal_length=self.focal_length)

    @property
    def length_scale(self) -> float:
        return self.wavelength * self.focal_length / self.aperture


def slit_sinc2(x, geometry: SlitGeometry):
    """``sinc^2(d*sin(theta)/lambda)`` with ``theta = x/z`` and ``sinc(u) = sin(pi u)/(pi u)``."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("slit_sinc2 requires finite positions")
    out = np.sinc(geometry.u(xa)) ** 2
    return float(out) if out.ndim == 0 else out


def airy_amplitude(u):
    """``2*J1(u)/u`` with the removable singularity at 0 set to 1."""
    ua = np.asarray(u, dtype=float)
    safe = np.where(ua == 0.0, 1.0, ua)
    out = np.where(ua == 0.0, 1.0, 2.0 * bessel_j1(safe) / safe)
    return float(out) if out.ndim == 0 else out


def airy(rho, geometry: PinholeGeometry):
    """
    Airy disk irradiance ``(2 J1(u)/u)^2`` with ``u = pi*D*rho/(lambda*f)``.

    Parameters
    ----------
    rho : float or array_like
        Radial distance(s) from the beam centre in the image plane (m).
    geometry : PinholeGeometry

    Raises
    ------
    DomainError
        For negative or non-finite `rho`.
    """
    ra = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(ra)):
        raise DomainError("airy requires finite radii")
    if np.any(ra < 0):
        raise DomainError("airy radius must be >= 0")
    out = airy_amplitude(math.pi * ra / geometry.length_scale) ** 2
    return float(out) if np.ndim(out) == 0 else out


def gaussian(x, waist: float):
    """Gaussian irradiance ``exp(-2 x^2 / w^2)`` (``w`` is the 1/e^2 radius)."""
    _require_positive(waist=waist)
    xa = np.asarray(x, dtype=float)
    out = np.exp(-2.0 * xa * xa / (waist * waist))
    return float(out) if out.ndim == 0 else out


def rayleigh_separation(geometry: PinholeGeometry) -> float:
    """Rayleigh two-point separation ``1.22*lambda*f/D`` in metres."""
    return RAYLEIGH_FACTOR * geometry.length_scale


def airy_first_zero(geometry: PinholeGeometry) -> float:
    """Exact radius of the first Airy zero, ``j_{1,1}/pi * lambda*f/D``."""
    return J1_FIRST_ZERO / math.pi * geometry.length_scale


class IrradianceProfile:
    """
    Base class for the profile kinds.

    Subclasses implement ``_evaluate`` and set ``kind`` and ``domain``.
    Calling a profile returns ``T^2(x)``.
    """

    kind = "abstract"
    domain: tuple[float, float]
    # characteristic transverse length, used for default grids and steps
    scale: float

    def __call__(self, x):
        out = self._evaluate(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def _evaluate(self, x):
        raise NotImplementedError

    def peak_mean(self, mean: float) -> float:
        """Detected mean at the profile maximum for a per-beam peak mean `mean`."""
        return mean

    def grid(self, n: int = NORMALISATION_GRID):
        return np.linspace(self.domain[0], self.domain[1], n)

    def params(self) -> dict:
        raise NotImplementedError


class SlitProfile(IrradianceProfile):
    """
    Single-slit profile with optional fit parameters.

    ``scale`` multiplies the sinc argument (the angle mapping) and
    ``center`` shifts the pattern.
    """

    kind = "slit-sinc2"

    def __init__(self, geometry: SlitGeometry, scale: float = 1.0, center: float = 0.0,
                 domain=None):
        _require_positive(scale=scale)
        self.geometry = geometry
        self.scale_factor = float(scale)
        self.center = float(center)
        self.scale = geometry.first_null / self.scale_factor
        half = 3.0 * self.scale
        self.domain = tuple(domain) if domain is not None else (center - half, center + half)

    def _evaluate(self, x):
        return np.sinc(self.scale_factor * self.geometry.u(x - self.center)) ** 2

    def params(self):
        g = self.geometry
        return {"kind": self.kind, "slit_width_m": g.slit_width, "wavelength_m": g.wavelength,
                "screen_distance_m": g.screen_distance, "scale": self.scale_factor,
                "center_m": self.center, "domain_m": list(self.domain)}


class AiryProfile(IrradianceProfile):
    kind = "airy"

    def __init__(self, geometry: PinholeGeometry, center: float = 0.0, width_scale: float = 1.0,
                 domain=None):
        _require_positive(width_scale=width_scale)
        self.geometry = geometry
        self.center = float(center)
        self.width_scale = float(width_scale)
        self.scale = rayleigh_separation(geometry) * self.width_scale
        half = 3.0 * self.scale
        self.domain = tuple(domain) if domain is not None else (center - half, center + half)

    def _evaluate(self, x):
        u = math.pi * np.abs(x - self.center) / (self.geometry.length_scale * self.width_scale)
        return airy_amplitude(u) ** 2

    def params(self):
        g = self.geometry
        return {"kind": self.kind, "aperture_m": g.aperture, "wavelength_m": g.wavelength,
                "focal_length_m": g.focal_length, "center_m": self.center,
                "width_scale": self.width_scale, "domain_m": list(self.domain)}


class GaussianProfile(IrradianceProfile):
    kind = "gaussian"

    def __init__(self, waist: float, center: float = 0.0, domain=None):
        _require_positive(waist=waist)
        self.waist = float(waist)
        self.center = float(center)
        self.scale = self.waist
        half = 3.0 * self.waist
        self.domain = tuple(domain) if domain is not None else (center - half, center + half)

    def _evaluate(self, x):
        d = x - self.center
        return np.exp(-2.0 * d * d / (self.waist * self.waist))

    def params(self):
        return {"kind": self.kind, "waist_m": self.waist, "center_m": self.center,
                "domain_m": list(self.domain)}


class TabulatedProfile(IrradianceProfile):
    """Linear interpolation of sampled transmissions; zero outside the table."""

    kind = "tabulated"

    def __init__(self, x, values):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 2:
            raise DomainError("tabulated profile needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(x) <= 0):
            raise DomainError("tabulated positions must be strictly increasing")
        if np.any(values < 0) or np.any(values > 1):
            raise DomainError("tabulated transmissions must lie in [0, 1]")
        self.x = x
        self.values = values
        self.domain = (float(x[0]), float(x[-1]))
        self.scale = (x[-1] - x[0]) / 6.0
        self.center = float(x[np.argmax(values)])

    def _evaluate(self, x):
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def params(self):
        return {"kind": self.kind, "x_m": self.x.tolist(), "values": self.values.tolist()}


class TwoBeamProfile(IrradianceProfile):
    """
    Incoherent sum of two copies of a single-beam profile.

    Beam A (weight 1) is centred at ``center + s/2``; beam B (weight
    ``imbalance``, optional ``width_scale``) at ``center - s/2``.
    ``raw`` returns the unnormalised sum used for detected means; calling
    the profile returns the sum divided by its global maximum.
    """

    kind = "two-beam"

    def __init__(self, base: IrradianceProfile, separation: float, imbalance: float = 1.0,
                 center: float = 0.0, width_scale: float = 1.0, domain=None):
        if isinstance(base, TwoBeamProfile):
            raise DomainError("two-beam base must be a single-beam profile")
        if not (math.isfinite(separation) and separation >= 0):
            raise DomainError(f"separation must be >= 0, got {separation!r}")
        if not (0 < imbalance <= 1):
            raise DomainError(f"imbalance must lie in (0, 1], got {imbalance!r}")
        _require_positive(width_scale=width_scale)
        self.base = base
        self.separation = float(separation)
        self.imbalance = float(imbalance)
        self.center = float(center)
        self.width_scale = float(width_scale)
        self.scale = base.scale
        base_center = getattr(base, "center", 0.0)
        self._base_center = base_center
        lo, hi = base.domain
        half = max(hi - base_center, base_center - lo)
        if domain is None:
            domain = (center - separation / 2 - half, center + separation / 2 + half)
        self.domain = tuple(domain)

    @property
    def beam_centers(self) -> tuple[float, float]:
        return (self.center - self.separation / 2, self.center + self.separation / 2)

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        c = self._base_center
        a = self.base(x - self.center - self.separation / 2 + c)
        b = self.base((x - self.center + self.separation / 2) / self.width_scale + c)
        out = a + self.imbalance * b
        return float(out) if np.ndim(out) == 0 else out

    @cached_property
    def normalisation(self) -> float:
        """Global maximum of :meth:`raw` over the domain."""
        x = self.grid()
        y = self.raw(x)
        i = int(np.argmax(y))
        lo = x[max(i - 1, 0)]
        hi = x[min(i + 1, x.size - 1)]
        res = optimize.minimize_scalar(lambda t: -self.raw(t), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * self.scale})
        return float(max(y[i], -res.fun))

    def _evaluate(self, x):
        return self.raw(x) / self.normalisation

    def peak_mean(self, mean: float) -> float:
        return mean * self.normalisation

    def params(self):
        return {"kind": self.kind, "base": self.base.params(), "separation_m": self.separation,
                "imbalance": self.imbalance, "center_m": self.center,
                "width_scale": self.width_scale, "domain_m": list(self.domain)}


def two_beam(x, base: IrradianceProfile, s: float, r: float = 1.0):
    """``[base(x - s/2) + r*base(x + s/2)] / N`` with ``N`` the global maximum of the sum."""
    return TwoBeamProfile(base, s, r)(x)
