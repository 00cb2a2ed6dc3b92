"""
Photon-number statistics of the illumination and of the detected light.

A spatial irradiance profile ``T^2(x)`` acts like a beamsplitter whose
transmission varies with position.  Detecting ``k`` photons out of ``j``
incident ones then has probability ``C(j, k) T^2k (1 - T^2)^(j-k)``, and the
detected distribution is the source distribution pushed through that
binomial kernel.  :func:`beamsplitter_transform` evaluates the sum directly
for any source; the coherent/thermal/Fock closed forms are kept for tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

FAMILIES = ("coherent", "thermal", "fock", "tabulated")
DETECTION_MODES = ("number-resolving", "conventional-single-photon", "classical-mean")

TAIL_TOLERANCE = 1e-14
LOG_BINOMIAL_ABOVE = 30

_EXACT_LOG_BINOM = np.full((LOG_BINOMIAL_ABOVE + 1, LOG_BINOMIAL_ABOVE + 1), -np.inf)
for _j in range(LOG_BINOMIAL_ABOVE + 1):
    for _k in range(_j + 1):
        _EXACT_LOG_BINOM[_j, _k] = math.log(math.comb(_j, _k))


@dataclass(frozen=True)
class SourceStatistics:
    """
    Photon-number distribution of the source.

    Use the constructors :meth:`coherent`, :meth:`thermal`, :meth:`fock`
    and :meth:`tabulated` rather than the raw fields.
    """

    family: str
    mean_photons: float | None = None
    photon_number: int | None = None
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown source family {self.family!r}")
        if self.family in ("coherent", "thermal"):
            mu = self.mean_photons
            if mu is None or not math.isfinite(mu) or mu <= 0:
                raise DomainError(f"{self.family} source needs a mean > 0, got {mu!r}")
        elif self.family == "fock":
            n = self.photon_number
            if n is None or int(n) != n or n < 0:
                raise DomainError(f"fock source needs an integer N >= 0, got {n!r}")
        else:
            p = np.asarray(self.table, dtype=float)
            if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise DomainError("tabulated source pmf must be non-negative and sum to 1")

    @classmethod
    def coherent(cls, mean: float) -> "SourceStatistics":
        return cls("coherent", mean_photons=float(mean))

    @classmethod
    def thermal(cls, mean: float) -> "SourceStatistics":
        return cls("thermal", mean_photons=float(mean))

    @classmethod
    def fock(cls, n: int) -> "SourceStatistics":
        return cls("fock", photon_number=int(n))

    @classmethod
    def tabulated(cls, probabilities) -> "SourceStatistics":
        return cls("tabulated", table=tuple(float(p) for p in probabilities))

    @property
    def mean(self) -> float:
        if self.family in ("coherent", "thermal"):
            return self.mean_photons
        if self.family == "fock":
            return float(self.photon_number)
        p = np.asarray(self.table)
        return float(np.dot(np.arange(p.size), p))

    def log_pmf(self, j):
        j = np.asarray(j)
        if self.family == "coherent":
            mu = self.mean_photons
            return -mu + j * math.log(mu) - special.gammaln(j + 1)
        if self.family == "thermal":
            mu = self.mean_photons
            return j * math.log(mu) - (j + 1) * math.log1p(mu)
        if self.family == "fock":
            return np.where(j == self.photon_number, 0.0, -np.inf)
        p = np.asarray(self.table)
        inside = (j >= 0) & (j < p.size)
        with np.errstate(divide="ignore"):
            return np.where(inside, np.log(p[np.clip(j, 0, p.size - 1)]), -np.inf)

    def support_cap(self, tol: float = TAIL_TOLERANCE) -> int:
        """Smallest ``j`` with ``P(n > j) < tol``."""
        if self.family == "fock":
            return self.photon_number
        if self.family == "tabulated":
            return len(self.table) - 1
        mu = self.mean_photons
        if self.family == "thermal":
            q = mu / (1.0 + mu)
            # P(n > j) = q^(j+1)
            return max(0, math.ceil(math.log(tol) / math.log(q)) - 1)
        j = np.arange(0, int(mu + 30.0 * math.sqrt(mu) + 60))
        tail = special.pdtrc(j, mu)
        return int(j[np.argmax(tail < tol)])

    def to_dict(self) -> dict:
        d = {"family": self.family}
        if self.family in ("coherent", "thermal"):
            d["mean"] = self.mean_photons
        elif self.family == "fock":
            d["N"] = self.photon_number
        else:
            d["pmf"] = list(self.table)
        return d


@dataclass(frozen=True)
class PhotonNumberDistribution:
    """Probabilities ``p[0..k_cap]`` and the mass above ``k_cap``."""

    probabilities: np.ndarray
    tail: float

    @property
    def k_cap(self) -> int:
        return self.probabilities.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probabilities.size), self.probabilities))


@dataclass(frozen=True)
class DetectionModel:
    """Detector type and, for number resolution, the largest countable ``k``."""

    mode: str = "number-resolving"
    k_max: int = 9

    def __post_init__(self):
        if self.mode not in DETECTION_MODES:
            raise DomainError(f"unknown detection mode {self.mode!r}")
        if self.mode == "number-resolving" and (int(self.k_max) != self.k_max or self.k_max < 1):
            raise DomainError(f"k_max must be an integer >= 1, got {self.k_max!r}")


def _check_k(k):
    ka = np.asarray(k)
    if not np.issubdtype(ka.dtype, np.integer):
        if not np.all(ka == np.floor(ka)):
            raise DomainError(f"photon number must be an integer, got {k!r}")
    if np.any(ka < 0):
        raise DomainError(f"photon number must be >= 0, got {k!r}")
    return ka.astype(np.int64)


def _check_t2(t2):
    t2a = np.asarray(t2, dtype=float)
    if not np.all(np.isfinite(t2a)) or np.any(t2a < 0) or np.any(t2a > 1):
        raise DomainError("transmission T^2 must lie in [0, 1]")
    return t2a


def source_pmf(src: SourceStatistics, k):
    """
    Probability of `k` photons in the undetected source.

    coherent ``e^-mu mu^k/k!``, thermal ``mu^k/(1+mu)^(k+1)``, Fock ``delta_{k,N}``.
    """
    ka = _check_k(k)
    out = np.exp(src.log_pmf(ka))
    return float(out) if out.ndim == 0 else out


def _log_binom(j, k):
    j = np.asarray(j, dtype=np.int64)
    small = j <= LOG_BINOMIAL_ABOVE
    exact = _EXACT_LOG_BINOM[np.clip(j, 0, LOG_BINOMIAL_ABOVE), min(k, LOG_BINOMIAL_ABOVE)]
    big = special.gammaln(j + 1.0) - special.gammaln(k + 1.0) - special.gammaln(j - k + 1.0)
    return np.where(small, exact, big)


def beamsplitter_transform(src: SourceStatistics, t2, k: int, tol: float = TAIL_TOLERANCE):
    """
    Probability of detecting `k` photons behind transmission `t2`.

    Evaluates ``sum_{j>=k} P_src(j) C(j,k) T2^k (1-T2)^(j-k)`` term by term,
    extending ``j`` until the source tail mass falls below `tol`.

    Parameters
    ----------
    src : SourceStatistics
    t2 : float or array_like
        Transmission(s) in [0, 1]; arrays are evaluated element-wise.
    k : int
        Detected photon number.

    Returns
    -------
    float or ndarray
        Same shape as `t2`.
    """
    t2a = _check_t2(t2)
    k = int(_check_k(k))
    j_max = src.support_cap(tol)
    if k > j_max:
        out = np.zeros_like(t2a)
        return float(out) if out.ndim == 0 else out
    j = np.arange(k, j_max + 1)
    log_weight = src.log_pmf(j) + _log_binom(j, k)
    tt = t2a[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = log_weight + special.xlogy(k, tt) + special.xlog1py(j - k, -tt)
    out = np.exp(log_terms).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def detected_distribution(src: SourceStatistics, t2: float, k_cap: int | None = None,
                          tol: float = TAIL_TOLERANCE) -> PhotonNumberDistribution:
    """Full detected distribution at a single transmission, truncated at `k_cap`."""
    t2 = float(_check_t2(t2))
    if k_cap is None:
        k_cap = src.support_cap(tol)
    probs = np.array([beamsplitter_transform(src, t2, k, tol) for k in range(k_cap + 1)])
    return PhotonNumberDistribution(probs, max(0.0, 1.0 - float(probs.sum())))


def _effective(src: SourceStatistics, peak_mean: float):
    """Source and extra uniform transmission giving detected mean `peak_mean` at T^2 = 1."""
    if not (math.isfinite(peak_mean) and peak_mean > 0):
        raise DomainError(f"peak mean must be > 0, got {peak_mean!r}")
    if src.family == "coherent":
        return SourceStatistics.coherent(peak_mean), 1.0
    if src.family == "thermal":
        return SourceStatistics.thermal(peak_mean), 1.0
    eta = peak_mean / src.mean if src.mean > 0 else math.inf
    if eta > 1.0 + 1e-12:
        raise DomainError(
            f"{src.family} source with mean {src.mean:g} cannot deliver detected mean {peak_mean:g}")
    return src, min(eta, 1.0)


def detected_transmission(profile, x):
    """``T^2(x)`` of `profile`, using the normalised sum for two-beam profiles."""
    return np.clip(np.asarray(profile(x), dtype=float), 0.0, 1.0)


def conditional_profile(src: SourceStatistics, profile, k: int, x_grid, peak_mean: float):
    """
    Probability of detecting exactly `k` photons at each position.

    The source is rescaled so that the detected mean at the profile maximum
    equals ``profile.peak_mean(peak_mean)``: for single beams that is
    `peak_mean` itself, for a two-beam profile `peak_mean` is the per-beam
    peak and the detected mean is ``peak_mean * raw_sum(x)``.
    """
    eff, eta = _effective(src, profile.peak_mean(peak_mean))
    t2 = detected_transmission(profile, x_grid)
    return beamsplitter_transform(eff, eta * t2, k)


def classical_mean_profile(profile, peak_mean: float, x_grid):
    """Expected detected photon number per pulse, ``peak_mean * T^2(x)``."""
    if hasattr(profile, "raw"):
        return peak_mean * np.asarray(profile.raw(x_grid), dtype=float)
    return peak_mean * np.asarray(profile(x_grid), dtype=float)


def spd_click_profile(src: SourceStatistics, profile, peak_mean: float, x_grid):
    """Click probability ``1 - p_0(x)`` of a detector that cannot count photons."""
    return 1.0 - conditional_profile(src, profile, 0, x_grid, peak_mean)


# Closed forms of the detected distribution.  These are used as independent
# references in tests and as fast model functions in fitting.

def poisson_pmf(k, mean):
    k = np.asarray(k, dtype=float)
    mean = np.asarray(mean, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(special.xlogy(k, mean) - mean - special.gammaln(k + 1))
    return out


def thermal_pmf(k, mean):
    k = np.asarray(k, dtype=float)
    mean = np.asarray(mean, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(special.xlogy(k, mean) - (k + 1) * np.log1p(mean))
    return out


def binomial_pmf(k, n, p):
    k = np.asarray(k, dtype=float)
    p = np.asarray(p, dtype=float)
    valid = (k >= 0) & (k <= n)
    kk = np.where(valid, k, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = special.gammaln(n + 1) - special.gammaln(kk + 1) - special.gammaln(n - kk + 1)
        out = np.exp(logc + special.xlogy(kk, p) + special.xlog1py(n - kk, -p))
    return np.where(valid, out, 0.0)
