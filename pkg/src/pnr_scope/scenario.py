"""
Scenario files: JSON documents describing one experiment to reproduce.

:func:`validate` checks a parsed document against :data:`SCHEMA` and then
applies physics sanity checks; it returns diagnostics instead of raising so
that the CLI can report every problem at once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

SCHEMA_VERSION = 1

_positive = {"type": "number", "exclusiveMinimum": 0}
_source = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["coherent", "thermal", "fock"]},
        "N": {"type": "integer", "minimum": 0},
        "mean": _positive,
    },
}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "experiment", "geometry", "source", "detection"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "experiment": {"enum": ["single-slit", "two-beam", "stats-compare"]},
        "geometry": {"type": "object"},
        "source": {"type": "object"},
        "detection": {
            "type": "object",
            "required": ["k_max"],
            "properties": {"k_max": {"type": "integer", "minimum": 1}},
        },
        "scan": {
            "type": "object",
            "properties": {
                "positions_m": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "step_m": _positive,
                "half_width_m": _positive,
                "pulses": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            },
            "dependentRequired": {"pulses": ["seed"], "step_m": ["half_width_m"]},
        },
        "analysis": {"type": "array", "items": {"enum": ["fwhm", "contrast", "sweep", "fit"]}},
        "sweep": {
            "type": "object",
            "properties": {
                "s_rayleigh": {"type": "array", "items": _positive, "minItems": 1},
                "start": _positive, "stop": _positive, "step": _positive,
            },
        },
        "k_list": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "profile_separation_rayleigh": _positive,
        "output": {"type": "object", "properties": {"dir": {"type": "string"}}},
    },
    "allOf": [
        {
            "if": {"properties": {"experiment": {"const": "single-slit"}}},
            "then": {"properties": {
                "geometry": {"required": ["slit_width_m", "wavelength_m", "screen_distance_m"],
                             "properties": {"slit_width_m": _positive, "wavelength_m": _positive,
                                            "screen_distance_m": _positive}},
                "source": {**_source, "required": ["family", "peak_mean"],
                           "properties": {**_source["properties"], "peak_mean": _positive}},
            }},
        },
        {
            "if": {"properties": {"experiment": {"const": "two-beam"}}},
            "then": {"properties": {
                "geometry": {"required": ["aperture_m", "wavelength_m", "focal_length_m"],
                             "properties": {"aperture_m": _positive, "wavelength_m": _positive,
                                            "focal_length_m": _positive}},
                "source": {**_source, "required": ["family", "beam_mean"],
                           "properties": {**_source["properties"], "beam_mean": _positive,
                                          "imbalance": {"type": "number", "exclusiveMinimum": 0,
                                                        "maximum": 1}}},
            }, "required": ["sweep"]},
        },
        {
            "if": {"properties": {"experiment": {"const": "stats-compare"}}},
            "then": {"properties": {
                "geometry": {"required": ["waist_m"], "properties": {"waist_m": _positive}},
                "source": {"required": ["mean", "k", "families"],
                           "properties": {"mean": _positive, "k": {"type": "integer", "minimum": 0},
                                          "families": {"type": "array", "minItems": 1,
                                                       "items": _source}}},
            }},
        },
    ],
}


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    field: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.field}: {self.message}"


class ScenarioParseError(Exception):
    pass


def bundled_names() -> list[str]:
    pkg = resources.files("pnr_scope") / "scenarios"
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".json"))


def resolve(path_or_name: str) -> Path:
    """A path on disk, or the name of a bundled scenario (with or without ``.json``)."""
    p = Path(path_or_name)
    if p.exists():
        return p
    name = p.name[:-5] if p.name.endswith(".json") else p.name
    if name in bundled_names():
        with resources.as_file(resources.files("pnr_scope") / "scenarios" / f"{name}.json") as f:
            return Path(f)
    return p


def load(path_or_name) -> dict:
    path = resolve(str(path_or_name))
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError(f"{path}: top level must be a JSON object")
    return doc


def _field(error) -> str:
    parts = [str(p) for p in error.absolute_path]
    if error.validator == "required":
        missing = error.message.split("'")[1]
        parts.append(missing)
    elif error.validator == "dependentRequired":
        parts.append(error.message.split("'")[1])
    return ".".join(parts) or "<root>"


def sweep_values(doc: dict) -> list[float]:
    sw = doc.get("sweep", {})
    if "s_rayleigh" in sw:
        return [float(v) for v in sw["s_rayleigh"]]
    start, stop, step = sw["start"], sw["stop"], sw["step"]
    n = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def validate(doc: dict) -> list[Diagnostic]:
    """Schema errors followed by physics errors and warnings."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    diags = [Diagnostic("error", _field(e), e.message)
             for e in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))]
    if diags:
        return diags

    exp = doc["experiment"]
    k_max = doc["detection"]["k_max"]
    src = doc["source"]
    scan = doc.get("scan", {})

    for i, fam in enumerate(src.get("families", [src])):
        where = f"source.families.{i}" if "families" in src else "source"
        if fam["family"] == "fock" and "N" not in fam:
            diags.append(Diagnostic("error", f"{where}.N", "fock sources need the photon number N"))
    if exp == "single-slit" and src["family"] == "fock" and "N" in src and src["peak_mean"] > src["N"]:
        diags.append(Diagnostic("error", "source.peak_mean",
                                f"a Fock state with N={src['N']} cannot give detected mean {src['peak_mean']}"))
    if exp == "stats-compare":
        for i, fam in enumerate(src["families"]):
            if fam["family"] == "fock" and fam.get("N", 0) < src["mean"]:
                diags.append(Diagnostic("error", f"source.families.{i}.N",
                                        f"N must be >= the detected mean {src['mean']}"))
        if src["k"] > k_max:
            diags.append(Diagnostic("error", "source.k", f"k={src['k']} exceeds detection.k_max={k_max}"))
        if scan.get("pulses"):
            diags.append(Diagnostic("warning", "scan.pulses", "stats-compare is analytic only; pulses ignored"))
    if exp == "two-beam":
        if src["family"] == "fock":
            diags.append(Diagnostic("error", "source.family",
                                    "two-beam scenarios add two independent beams; use coherent or thermal"))
        for k in doc.get("k_list", []):
            if k > k_max:
                diags.append(Diagnostic("error", "k_list", f"k={k} exceeds detection.k_max={k_max}"))
        sw = doc["sweep"]
        if "s_rayleigh" not in sw and not all(key in sw for key in ("start", "stop", "step")):
            diags.append(Diagnostic("error", "sweep", "give s_rayleigh or start/stop/step"))
        else:
            if "start" in sw and sw["stop"] < sw["start"]:
                diags.append(Diagnostic("error", "sweep.stop", "stop must not be below start"))
            else:
                from .analysis import sparrow_limit
                from .profiles import PinholeGeometry
                g = doc["geometry"]
                sparrow = sparrow_limit(PinholeGeometry(g["aperture_m"], g["wavelength_m"],
                                                        g["focal_length_m"])).rayleigh_units
                low = [s for s in sweep_values(doc) if s < sparrow]
                if low:
                    diags.append(Diagnostic(
                        "warning", "sweep",
                        f"separations {low} Rayleigh lie below the Sparrow limit ({sparrow:.3f}): the summed "
                        "profile is a flat top with no dip, so every contrast there is 0"))
    if "positions_m" in scan:
        pos = scan["positions_m"]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            diags.append(Diagnostic("error", "scan.positions_m", "positions must be strictly increasing"))
    elif scan.get("pulses") and exp != "stats-compare" and "step_m" not in scan:
        diags.append(Diagnostic("error", "scan.step_m", "Monte Carlo needs positions_m or step_m/half_width_m"))
    if "fit" in doc.get("analysis", []) and exp == "stats-compare":
        diags.append(Diagnostic("warning", "analysis", "fit is not available for stats-compare; ignored"))
    return diags
