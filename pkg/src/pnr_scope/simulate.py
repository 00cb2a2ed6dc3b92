"""
Seeded Monte Carlo emulation of a photon-number-resolving transverse scan.

Each scan position gets its own random stream derived from the master
seed and the position index, so results do not depend on how many worker
threads process the positions or in which order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .photon_stats import DetectionModel, SourceStatistics, _effective, detected_transmission

THREADS_ENV = "PNR_SCOPE_THREADS"


def worker_count(threads: int | None = None) -> int:
    """Thread count from the argument, else ``PNR_SCOPE_THREADS``, else the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigurationError(f"thread count must be >= 1, got {threads}")
    return threads


@dataclass(frozen=True)
class ScanPlan:
    """Scan positions (m), pulses per position, detector model and master seed."""

    x_positions: tuple[float, ...]
    pulses_per_position: int
    detection: DetectionModel
    seed: int

    def __post_init__(self):
        x = np.asarray(self.x_positions, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ConfigurationError("scan plan needs at least 2 positions")
        if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
            raise ConfigurationError("scan positions must be finite and strictly increasing")
        if int(self.pulses_per_position) != self.pulses_per_position or self.pulses_per_position < 1:
            raise ConfigurationError("pulses_per_position must be an integer >= 1")
        if self.detection.mode != "number-resolving":
            raise ConfigurationError("the scan records photon numbers; use a number-resolving detector")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must be an integer in [0, 2**64)")
        object.__setattr__(self, "x_positions", tuple(float(v) for v in x))

    @property
    def k_max(self) -> int:
        return self.detection.k_max

    def to_dict(self) -> dict:
        return {"x_positions_m": list(self.x_positions),
                "pulses_per_position": int(self.pulses_per_position),
                "detection": {"mode": self.detection.mode, "k_max": int(self.detection.k_max)},
                "seed": int(self.seed)}


@dataclass(frozen=True)
class CountTable:
    """
    Photon-number histograms, one row per scan position.

    ``counts[i, k]`` is the number of pulses at position ``i`` with exactly
    ``k`` detected photons (``k <= k_max``); ``overflow[i]`` counts pulses
    with more than ``k_max``.
    """

    x: np.ndarray
    counts: np.ndarray
    overflow: np.ndarray
    total: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("x", "counts", "overflow", "total"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.x.size:
            raise ConfigurationError("counts must have one row per position")
        if np.any(self.counts.sum(axis=1) + self.overflow != self.total):
            raise ConfigurationError("counts and overflow must partition the pulses at every position")

    @property
    def k_max(self) -> int:
        return self.counts.shape[1] - 1

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.overflow, other.overflow)
                and np.array_equal(self.total, other.total))

    def to_csv(self, fh=None) -> str:
        """Write ``x_m, k0..k{kmax}, overflow, total``; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x_m"] + [f"k{k}" for k in range(self.k_max + 1)] + ["overflow", "total"])
        for i, x in enumerate(self.x):
            w.writerow([repr(float(x))] + [int(c) for c in self.counts[i]]
                       + [int(self.overflow[i]), int(self.total[i])])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "CountTable":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        n_k = sum(1 for h in header if h.startswith("k"))
        data = np.array([[float(v) for v in r] for r in body])
        return cls(x=data[:, 0], counts=data[:, 1:1 + n_k].astype(np.int64),
                   overflow=data[:, 1 + n_k].astype(np.int64), total=data[:, 2 + n_k].astype(np.int64))

    def to_json(self) -> str:
        doc = {"scenario": self.metadata,
               "x_m": self.x.tolist(),
               "counts": self.counts.tolist(),
               "overflow": self.overflow.tolist(),
               "total": self.total.tolist()}
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CountTable":
        doc = json.loads(text)
        return cls(x=np.asarray(doc["x_m"], dtype=float), counts=np.asarray(doc["counts"], dtype=np.int64),
                   overflow=np.asarray(doc["overflow"], dtype=np.int64),
                   total=np.asarray(doc["total"], dtype=np.int64), metadata=doc.get("scenario", {}))


def position_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for scan position `index`."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def sample_detected(rng: np.random.Generator, src: SourceStatistics, transmission: float, size: int):
    """
    Exact draws of the detected photon number behind `transmission`.

    coherent: Poisson; thermal: geometric by inverse transform; Fock and
    tabulated sources: binomial thinning of the incident number.
    """
    if src.family == "coherent":
        return rng.poisson(src.mean_photons * transmission, size)
    if src.family == "thermal":
        m = src.mean_photons * transmission
        if m <= 0:
            return np.zeros(size, dtype=np.int64)
        q = m / (1.0 + m)
        u = rng.random(size)
        return np.floor(np.log1p(-u) / math.log(q)).astype(np.int64)
    if src.family == "fock":
        return rng.binomial(src.photon_number, transmission, size)
    p = np.asarray(src.table)
    incident = rng.choice(p.size, size=size, p=p)
    return rng.binomial(incident, transmission)


def run_scan(src: SourceStatistics, profile, peak_mean: float, plan: ScanPlan,
             threads: int | None = None, order=None) -> CountTable:
    """
    Simulate ``plan.pulses_per_position`` pulses at every scan position.

    Parameters
    ----------
    src : SourceStatistics
    profile : IrradianceProfile
    peak_mean : float
        Detected mean at the profile maximum (per beam for two-beam profiles).
    plan : ScanPlan
    threads : int, optional
        Worker threads; defaults to ``PNR_SCOPE_THREADS`` or the CPU count.
    order : sequence of int, optional
        Execution order of position indices.  Only affects scheduling.

    Returns
    -------
    CountTable
    """
    if not isinstance(plan, ScanPlan):
        raise ConfigurationError("plan must be a ScanPlan")
    eff, eta = _effective(src, profile.peak_mean(peak_mean))
    x = np.asarray(plan.x_positions)
    t2 = eta * detected_transmission(profile, x)
    n = int(plan.pulses_per_position)
    k_max = plan.k_max

    def one(i):
        k = sample_detected(position_rng(plan.seed, i), eff, float(t2[i]), n)
        hist = np.bincount(np.minimum(k, k_max + 1), minlength=k_max + 2)
        return i, hist

    indices = list(range(x.size)) if order is None else [int(i) for i in order]
    if sorted(indices) != list(range(x.size)):
        raise ConfigurationError("order must be a permutation of the position indices")
    workers = min(worker_count(threads), x.size)
    if workers == 1:
        results = [one(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, indices))

    hists = np.zeros((x.size, k_max + 2), dtype=np.int64)
    for i, hist in results:
        hists[i] = hist
    metadata = {"source": src.to_dict(), "profile": profile.params(), "peak_mean": peak_mean,
                "plan": plan.to_dict()}
    return CountTable(x=x, counts=hists[:, :k_max + 1], overflow=hists[:, k_max + 1],
                      total=np.full(x.size, n, dtype=np.int64), metadata=metadata)


def reconstruct_classical(table: CountTable):
    """Mean detected photon number per pulse, ``sum_k k n_k / total`` (overflow ignored)."""
    k = np.arange(table.k_max + 1)
    return table.counts @ k / table.total


def reconstruct_spd(table: CountTable):
    """Click fraction of a non-resolving detector; overflow pulses count as clicks."""
    return (table.total - table.counts[:, 0]) / table.total


def per_k_profiles(table: CountTable) -> dict[int, np.ndarray]:
    """Map ``k -> counts[:, k] / total`` for ``k = 0..k_max``."""
    return {k: table.counts[:, k] / table.total for k in range(table.k_max + 1)}
