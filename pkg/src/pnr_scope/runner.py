"""
Pipelines behind ``pnr-scope run``: turn a validated scenario into tables.

Each pipeline returns a :class:`RunResult` holding CSV text per output file,
the metadata document and summary lines.  Nothing is written here; the CLI
does the I/O.  Floats are written with ``repr`` so outputs are byte-stable.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (compression_factor, contrast, contrast_sweep, fit_profile, fwhm,
                       sparrow_limit, two_beam_curves)
from .photon_stats import (DetectionModel, SourceStatistics, classical_mean_profile,
                           conditional_profile, spd_click_profile)
from .profiles import (AiryProfile, GaussianProfile, PinholeGeometry, SlitGeometry, SlitProfile,
                       TwoBeamProfile, rayleigh_separation)
from .scenario import sweep_values
from .simulate import (ScanPlan, per_k_profiles, reconstruct_classical, reconstruct_spd,
                       run_scan)

PROFILE_HEADER = ["series", "k", "x_m", "value"]


@dataclass
class RunResult:
    name: str
    tables: dict = field(default_factory=dict)   # suffix -> csv text
    meta: dict = field(default_factory=dict)
    summary: list = field(default_factory=list)

    def files(self) -> dict:
        out = {f"{self.name}_{suffix}.csv": text for suffix, text in self.tables.items()}
        out[f"{self.name}_meta.json"] = json.dumps(self.meta, indent=2, sort_keys=True) + "\n"
        return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _source(entry: dict) -> SourceStatistics:
    fam = entry["family"]
    if fam == "fock":
        return SourceStatistics.fock(entry["N"])
    mean = entry.get("mean", entry.get("peak_mean", entry.get("beam_mean")))
    return SourceStatistics(fam, mean_photons=float(mean))


def _positions(doc: dict, default_step: float, default_half: float):
    scan = doc.get("scan", {})
    if "positions_m" in scan:
        return np.asarray(scan["positions_m"], dtype=float)
    step = scan.get("step_m", default_step)
    half = scan.get("half_width_m", default_half)
    n = int(math.floor(half / step + 1e-9))
    return np.arange(-n, n + 1) * step


def _plan(doc: dict, x, k_max: int):
    scan = doc.get("scan", {})
    if not scan.get("pulses"):
        return None
    return ScanPlan(tuple(x), int(scan["pulses"]), DetectionModel("number-resolving", k_max), int(scan["seed"]))


def _rounded(d: dict) -> dict:
    return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in d.items()}


def _profile_rows(series, k, x, values):
    return [(series, k, xi, vi) for xi, vi in zip(x, values)]


def run_single_slit(doc: dict, threads=None) -> RunResult:
    g = doc["geometry"]
    geom = SlitGeometry(g["slit_width_m"], g["wavelength_m"], g["screen_distance_m"])
    prof = SlitProfile(geom)
    src_doc = doc["source"]
    src = _source(src_doc)
    mu = float(src_doc["peak_mean"])
    k_max = doc["detection"]["k_max"]
    x = _positions(doc, 50e-6, 2e-3)
    res = RunResult(doc["name"])

    rows = _profile_rows("classical", None, x, classical_mean_profile(prof, mu, x))
    rows += _profile_rows("spd", None, x, spd_click_profile(src, prof, mu, x))
    for k in range(k_max + 1):
        rows += _profile_rows("pnr", k, x, conditional_profile(src, prof, k, x, mu))

    f_cl = fwhm(prof)
    f_spd = fwhm(lambda t: spd_click_profile(src, prof, mu, t), prof.domain)
    fw_rows, fw_meta = [], {}
    for k in range(1, k_max + 1):
        r = fwhm(lambda t, kk=k: conditional_profile(src, prof, kk, t, mu), prof.domain)
        fw_rows.append((k, r.fwhm, compression_factor(r, f_cl), compression_factor(r, f_spd)))
        fw_meta[str(k)] = {"fwhm_m": r.fwhm, "multimodal": r.multimodal}
    res.tables["fwhm"] = _csv(["k", "fwhm_m", "compression_vs_classical", "compression_vs_spd"], fw_rows)

    derived = {"fwhm_classical_m": f_cl.fwhm, "fwhm_spd_m": f_spd.fwhm,
               "fwhm_classical_u": f_cl.fwhm / geom.first_null, "fwhm_by_k": fw_meta,
               "first_null_m": geom.first_null}
    res.summary.append(f"classical FWHM {f_cl.fwhm * 1e3:.4f} mm, click-detector FWHM {f_spd.fwhm * 1e3:.4f} mm")
    res.summary.append(" k   FWHM (mm)   vs classical   vs SPD")
    for k, w, cc, cs in fw_rows:
        res.summary.append(f"{k:2d}   {w * 1e3:9.4f}   {cc:12.3f}   {cs:6.3f}")

    plan = _plan(doc, x, k_max)
    fit_target = ("analytic", classical_mean_profile(prof, mu, x))
    if plan is not None:
        table = run_scan(src, prof, mu, plan, threads=threads)
        res.tables["counts"] = table.to_csv()
        mc_cl = reconstruct_classical(table)
        mc_spd = reconstruct_spd(table)
        rows += _profile_rows("mc_classical", None, x, mc_cl)
        rows += _profile_rows("mc_spd", None, x, mc_spd)
        for k, rate in per_k_profiles(table).items():
            rows += _profile_rows("mc_pnr", k, x, rate)
        fit_target = ("monte_carlo", mc_cl)
        derived["monte_carlo"] = {"plan": plan.to_dict(), "overflow_total": int(table.overflow.sum())}

    if "fit" in doc.get("analysis", []):
        fr = fit_profile(x, fit_target[1], "slit", geom)
        derived["fit"] = {"data": fit_target[0], "params": _rounded(fr.params), "residual": fr.residual,
                          "iterations": fr.iterations, "converged": fr.converged}
        res.summary.append(f"fit to {fit_target[0]} classical profile: mu = {fr.params['mu']:.4f}, "
                           f"scale = {fr.params['scale']:.4f}, converged = {fr.converged}")

    res.tables["profiles"] = _csv(PROFILE_HEADER, rows)
    res.meta = {"scenario": doc, "derived": derived, "version": __version__,
                "conventions": {"peak_mean": "detected mean photon number per pulse at the profile maximum"}}
    return res


def run_two_beam(doc: dict, threads=None) -> RunResult:
    g = doc["geometry"]
    geom = PinholeGeometry(g["aperture_m"], g["wavelength_m"], g["focal_length_m"])
    ray = rayleigh_separation(geom)
    src_doc = doc["source"]
    src = _source(src_doc)
    mu = float(src_doc["beam_mean"])
    r = float(src_doc.get("imbalance", 1.0))
    k_max = doc["detection"]["k_max"]
    k_list = doc.get("k_list", list(range(4, k_max + 1)))
    s_list = sweep_values(doc)
    res = RunResult(doc["name"])

    sweep = contrast_sweep(src, geom, mu, k_list, s_list, imbalance=r, threads=threads)
    res.tables["contrast"] = sweep.to_csv()

    s_prof = float(doc.get("profile_separation_rayleigh", 1.0)) * ray
    tb, curves = two_beam_curves(src, geom, mu, s_prof, k_list, r)
    x = _positions(doc, 50e-6, s_prof / 2 + 2 * ray)
    rows = _profile_rows("classical", None, x, classical_mean_profile(tb, mu, x))
    rows += _profile_rows("classical_normalized", None, x, tb(x))
    rows += _profile_rows("spd", None, x, spd_click_profile(src, tb, mu, x))
    for k in k_list:
        rows += _profile_rows("pnr", k, x, conditional_profile(src, tb, k, x, mu))

    sparrow = sparrow_limit(geom)
    at_profile = {}
    for name, fn in curves.items():
        rep = contrast(fn, s_prof, geom)
        at_profile[name] = {"contrast": rep.contrast, "no_dip": rep.no_dip,
                            "peak_position_m": rep.peak_position, "saddle_position_m": rep.saddle_position}
    derived = {"rayleigh_m": ray, "sparrow_m": sparrow.separation, "sparrow_rayleigh": sparrow.rayleigh_units,
               "profile_separation_m": s_prof, "profile_separation_rayleigh": s_prof / ray,
               "contrast_at_profile_separation": at_profile,
               "means": {"per_beam_peak_mean": mu, "sum_peak_mean": tb.peak_mean(mu),
                         "normalisation": tb.normalisation}}

    plan = _plan(doc, x, k_max)
    if plan is not None:
        table = run_scan(src, tb, mu, plan, threads=threads)
        res.tables["counts"] = table.to_csv()
        rates = per_k_profiles(table)
        rows += _profile_rows("mc_classical", None, x, reconstruct_classical(table))
        rows += _profile_rows("mc_spd", None, x, reconstruct_spd(table))
        for k, rate in rates.items():
            rows += _profile_rows("mc_pnr", k, x, rate)
        mc = {}
        series = {"C_classical": reconstruct_classical(table), "C_spd": reconstruct_spd(table)}
        series.update({f"C_k{k}": rates[k] for k in k_list})
        for name, y in series.items():
            ref = contrast(curves[name], s_prof, geom)
            if ref.no_dip:
                continue
            rep = contrast((x, y), s_prof, geom, locations=(ref.peak_position, ref.saddle_position))
            mc[name] = {"contrast": rep.contrast, "model_contrast": ref.contrast}
        derived["monte_carlo"] = {"plan": plan.to_dict(), "contrast": mc}

    res.tables["profiles"] = _csv(PROFILE_HEADER, rows)
    res.meta = {"scenario": doc, "derived": derived, "version": __version__,
                "conventions": {"beam_mean": "detected mean at each beam's own peak; the detected mean "
                                             "of the sum is beam_mean * unnormalised sum",
                                "classical_normalized": "summed irradiance divided by its global maximum"}}

    res.summary.append(f"Rayleigh separation {ray * 1e3:.4f} mm, Sparrow limit {sparrow.rayleigh_units:.4f} Rayleigh")
    names = sweep.header()[1:-1]
    res.summary.append("s/R    " + " ".join(f"{n[2:]:>9s}" for n in names))
    for row in sweep.rows():
        res.summary.append(f"{row[0]:<6.3f} " + " ".join(f"{v:9.4f}" for v in row[1:-1]))
    return res


def run_stats_compare(doc: dict, threads=None) -> RunResult:
    w = float(doc["geometry"]["waist_m"])
    prof = GaussianProfile(w)
    src_doc = doc["source"]
    mean = float(src_doc["mean"])
    k = int(src_doc["k"])
    x = _positions(doc, w / 50, 2 * w)
    res = RunResult(doc["name"])

    rows = _profile_rows("classical", None, x, classical_mean_profile(prof, mean, x))
    f_cl = fwhm(prof)
    fw_rows = [("classical", None, f_cl.fwhm, 1.0)]
    for fam_doc in src_doc["families"]:
        src = _source({**fam_doc, "mean": fam_doc.get("mean", mean)})
        label = fam_doc["family"]
        rows += _profile_rows(label, k, x, conditional_profile(src, prof, k, x, mean))
        r = fwhm(lambda t, s=src: conditional_profile(s, prof, k, t, mean), prof.domain)
        fw_rows.append((label, k, r.fwhm, compression_factor(r, f_cl)))
    res.tables["profiles"] = _csv(PROFILE_HEADER, rows)
    res.tables["fwhm"] = _csv(["series", "k", "fwhm_m", "compression_vs_classical"], fw_rows)
    res.meta = {"scenario": doc, "version": __version__,
                "derived": {"fwhm_m": {row[0]: row[2] for row in fw_rows},
                            "fwhm_waists": {row[0]: row[2] / w for row in fw_rows}}}
    res.summary.append(f"Gaussian waist {w * 1e3:.4f} mm, detected mean {mean:g}, k = {k}")
    for label, _, width, comp in fw_rows:
        res.summary.append(f"{label:10s} FWHM {width / w:.4f} w   compression vs classical {comp:.3f}")
    return res


PIPELINES = {"single-slit": run_single_slit, "two-beam": run_two_beam, "stats-compare": run_stats_compare}


def run_scenario(doc: dict, threads=None) -> RunResult:
    return PIPELINES[doc["experiment"]](doc, threads=threads)
