"""
Scenario files: JSON model definitions, presets and validation.

A scenario names the uncoupled channels, the coupling parameters and the
grids used by the command-line tools.  Validation reports every problem at
once: schema violations first, then physics constraints found while
building the models.
"""

from __future__ import annotations

import copy
import inspect
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import onechannel
from .coupling import CouplingParams, DiagonalModel, TransformedModel
from .errors import SusyChannelsError, ValidationError
from .scattering import CoupledJost

__all__ = ["Scenario", "PRESETS", "SCHEMA", "parse_scenario", "load_scenario", "grid"]

ARTIFACTS = ["potential", "smatrix", "spectrum", "verify", "diagnose", "closed_form"]

_GRID = {
    "type": "object",
    "additionalProperties": False,
    "required": ["min", "max", "count"],
    "properties": {
        "min": {"type": "number", "exclusiveMinimum": 0},
        "max": {"type": "number", "exclusiveMinimum": 0},
        "count": {"type": "integer", "minimum": 1},
        "spacing": {"enum": ["linear", "log"]},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "channels", "coupling"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "channels": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["family", "params"],
                "properties": {
                    "family": {"enum": sorted(onechannel.FAMILIES)},
                    "params": {"type": "object"},
                    "l": {"type": "integer", "minimum": 0},
                },
            },
        },
        "coupling": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kappa"],
            "properties": {
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "q": {"type": "number"},
                "x": {"type": "number"},
                "M": {"type": "integer", "minimum": 0},
                "Q": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "X0": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            },
        },
        "k_grid": _GRID,
        "r_grid": _GRID,
        "outputs": {"type": "array", "items": {"enum": ARTIFACTS}, "uniqueItems": True},
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_grid": _GRID,
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "radii": {"type": "array", "minItems": 1,
                          "items": {"type": "number", "minimum": 20}},
            },
        },
        "spectrum": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "search_box": {"type": "array", "minItems": 4, "maxItems": 4,
                               "items": {"type": "number"}},
            },
        },
        "override_physics_checks": {"type": "boolean"},
    },
}

DEFAULT_K_GRID = {"min": 1e-3, "max": 10.0, "count": 400, "spacing": "linear"}
DEFAULT_R_GRID = {"min": 0.05, "max": 10.0, "count": 400, "spacing": "linear"}
DEFAULT_VERIFY = {"k_grid": {"min": 0.1, "max": 5.0, "count": 20, "spacing": "linear"},
                  "tolerance": 1e-6, "radii": [30.0, 45.0, 60.0]}


def grid(cfg: dict) -> np.ndarray:
    """Grid points from a {min, max, count, spacing} mapping."""
    lo, hi, n = float(cfg["min"]), float(cfg["max"]), int(cfg["count"])
    if cfg.get("spacing", "linear") == "log":
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


@dataclass
class Scenario:
    """A validated scenario.  ``raw`` is the normalized JSON mapping."""

    name: str
    raw: dict
    channels: tuple = field(repr=False, default=())
    params: CouplingParams | None = None

    @property
    def N(self) -> int:
        return len(self.raw["channels"])

    @property
    def k_grid(self):
        return grid(self.raw["k_grid"])

    @property
    def r_grid(self):
        return grid(self.raw["r_grid"])

    @property
    def verify_k_grid(self):
        return grid(self.raw["verify"]["k_grid"])

    @property
    def outputs(self):
        return list(self.raw["outputs"])

    def model(self, override_physics_checks: bool | None = None):
        """TransformedModel for two channels, CoupledJost otherwise."""
        override = self.raw.get("override_physics_checks", False) if override_physics_checks is None \
            else override_physics_checks
        diag = DiagonalModel(self.channels)
        if self.N != 2 or self.params.is_general:
            return CoupledJost(diag, self.params)
        return TransformedModel(diag, self.params, override_physics_checks=override)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True) + "\n"

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.raw == other.raw


def _normalize(raw: dict) -> dict:
    out = copy.deepcopy(raw)
    out.setdefault("k_grid", dict(DEFAULT_K_GRID))
    out.setdefault("r_grid", dict(DEFAULT_R_GRID))
    for g in (out["k_grid"], out["r_grid"]):
        g.setdefault("spacing", "linear")
        g["min"], g["max"] = float(g["min"]), float(g["max"])
    out.setdefault("outputs", ["potential", "smatrix", "spectrum", "verify", "diagnose"])
    ver = out.setdefault("verify", {})
    for key, val in DEFAULT_VERIFY.items():
        ver.setdefault(key, copy.deepcopy(val))
    ver["k_grid"].setdefault("spacing", "linear")
    ver["radii"] = [float(r) for r in ver["radii"]]
    ver["tolerance"] = float(ver["tolerance"])
    out.setdefault("override_physics_checks", False)
    c = out["coupling"]
    for key in ("kappa", "q", "x"):
        if key in c:
            c[key] = float(c[key])
    for ch in out["channels"]:
        ch["params"] = {k: float(v) if isinstance(v, (int, float)) and k != "l" else v
                        for k, v in ch["params"].items()}
        if ch["family"] == "centrifugal" and "l" in ch["params"]:
            ch["params"]["l"] = int(ch["params"]["l"])
    return out


def _family_problems(i, ch):
    fn = onechannel.FAMILIES[ch["family"]]
    names = list(inspect.signature(fn).parameters)
    given = set(ch["params"])
    probs = []
    missing = [n for n in names if n not in given]
    extra = sorted(given - set(names))
    if missing:
        probs.append(f"channels[{i}] ({ch['family']}): missing parameters {missing}")
    if extra:
        probs.append(f"channels[{i}] ({ch['family']}): unknown parameters {extra}")
    return probs


def parse_scenario(data) -> Scenario:
    """Validate a scenario mapping (or JSON text) and build its channels.

    Raises
    ------
    ValidationError
        With ``.problems`` listing every schema and physics violation found.
    """
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    problems = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
                for e in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))]
    if problems:
        # still report parameter problems for channels that are well formed
        chans = data.get("channels") if isinstance(data, dict) else None
        for i, ch in enumerate(chans if isinstance(chans, list) else []):
            if not (isinstance(ch, dict) and ch.get("family") in onechannel.FAMILIES
                    and isinstance(ch.get("params"), dict)):
                continue
            extra = _family_problems(i, ch)
            if not extra:
                try:
                    onechannel.build_family(ch["family"], **ch["params"])
                except (SusyChannelsError, TypeError, ValueError) as exc:
                    extra = [f"channels[{i}] ({ch['family']}): {p}"
                             for p in getattr(exc, "problems", [str(exc)])]
            problems += extra
        raise ValidationError(f"scenario has {len(problems)} problem(s)", problems)
    raw = _normalize(data)
    for key in ("k_grid", "r_grid"):
        if raw[key]["min"] > raw[key]["max"]:
            problems.append(f"{key}: min > max")
    vk = raw["verify"]["k_grid"]
    if vk["min"] > vk["max"]:
        problems.append("verify/k_grid: min > max")

    channels = []
    for i, ch in enumerate(raw["channels"]):
        fam_probs = _family_problems(i, ch)
        if fam_probs:
            problems += fam_probs
            continue
        try:
            model = onechannel.build_family(ch["family"], **ch["params"])
        except SusyChannelsError as exc:
            problems += [f"channels[{i}] ({ch['family']}): {p}" for p in getattr(exc, "problems", [str(exc)])]
            continue
        if "l" in ch and ch["l"] != model.l:
            problems.append(f"channels[{i}]: l={ch['l']} but {ch['family']} has l={model.l}")
        channels.append(model)

    c = raw["coupling"]
    N = len(raw["channels"])
    params = None
    general = "M" in c or "Q" in c or "X0" in c
    if general and ("q" in c or "x" in c):
        problems.append("coupling: give either (q, x) or (M, Q, X0), not both")
    try:
        if general:
            M = int(c.get("M", 1))
            params = CouplingParams(c["kappa"], M=M,
                                    Q=None if "Q" not in c else tuple(map(tuple, c["Q"])),
                                    X0=None if "X0" not in c else tuple(map(tuple, c["X0"])))
            if "Q" in c and np.asarray(c["Q"], float).shape != (N - M, M):
                problems.append(f"coupling/Q: shape must be ({N - M}, {M}) for {N} channels")
            if "X0" in c and np.asarray(c["X0"], float).shape != (M, M):
                problems.append(f"coupling/X0: shape must be ({M}, {M})")
            params.blocks(N)
        else:
            if N != 2:
                problems.append(f"coupling: (q, x) describe two channels, scenario has {N}")
            params = CouplingParams(c["kappa"], c.get("q", 0.0), c.get("x", 1.0))
    except SusyChannelsError as exc:
        problems += [f"coupling: {p}" for p in getattr(exc, "problems", [str(exc)])]

    scen = Scenario(raw["name"], raw, tuple(channels), params)
    if not problems and N == 2 and not params.is_general:
        try:
            scen.model()
        except SusyChannelsError as exc:
            problems += [f"model: {p}" for p in getattr(exc, "problems", [str(exc)])]
    if problems:
        raise ValidationError(f"scenario '{raw['name']}' has {len(problems)} problem(s)", problems)
    return scen


def _preset(name, channels, coupling, description, **extra):
    raw = {"name": name, "description": description, "channels": channels, "coupling": coupling}
    raw.update(extra)
    return raw


def _ch(family, wave, **params):
    return {"family": family, "params": params, "l": wave}


PRESETS = {
    "fig1-trivial": _preset(
        "fig1-trivial",
        [_ch("beta_family", 0, kappa0=1.0, kappa1=2.5, kappa2=3.5, beta=-2.0),
         _ch("beta_family", 0, kappa0=1.0, kappa1=2.5, kappa2=3.5, beta=-1.5)],
        {"kappa": 6.0, "q": 0.5, "x": 25.0},
        "Coupled s-s potential with a trivially coupled S-matrix (beta = -2, -1.5).",
        r_grid={"min": 0.05, "max": 5.0, "count": 400, "spacing": "linear"}),
    "fig2-ss": _preset(
        "fig2-ss",
        [_ch("cosech", 0, kappa=1.5), _ch("cosech", 0, kappa=1.0)],
        {"kappa": 29.0 / 7.0, "q": 0.4, "x": 15.0},
        "Coupled s-s potential with vanishing zero-energy mixing; kappa = 29/7 (4.14286).",
        outputs=["potential", "smatrix", "spectrum", "verify", "diagnose", "closed_form"]),
    "fig3-ss-dashed": _preset(
        "fig3-ss-dashed",
        [_ch("cosech", 0, kappa=1.5), _ch("cosech", 0, kappa=1.0)],
        {"kappa": 13.6667, "q": 1.2, "x": 15.0},
        "Second s-s parameter set as printed (q = 1.2, kappa = 13.6667); "
        "these values do not satisfy the zero-energy decoupling condition.",
        outputs=["potential", "smatrix", "spectrum", "verify", "diagnose", "closed_form"]),
    "fig3-ss-dashed-q08": _preset(
        "fig3-ss-dashed-q08",
        [_ch("cosech", 0, kappa=1.5), _ch("cosech", 0, kappa=1.0)],
        {"kappa": 41.0 / 3.0, "q": 0.8, "x": 15.0},
        "Variant of fig3-ss-dashed with q = 0.8, the value for which kappa = 41/3 "
        "gives vanishing zero-energy mixing.",
        outputs=["potential", "smatrix", "spectrum", "verify", "diagnose", "closed_form"]),
    "fig4-sp": _preset(
        "fig4-sp",
        [_ch("sp_s", 0, kappa0=1.5, kappa1=1.75), _ch("centrifugal", 1, l=1)],
        {"kappa": 3.53, "q": 1.0, "x": 1.0},
        "Coupled s-p potential; channel angular momenta are exchanged.",
        outputs=["potential", "smatrix", "spectrum", "verify", "diagnose", "closed_form"],
        verify={"tolerance": 1e-4}),
    "fig5-sd": _preset(
        "fig5-sd",
        [_ch("sd_s", 0, kappa0=1.0, kappa1=1.5, kappa2=1.75, kappa3=2.0), _ch("sd_d", 2, kappa4=3.0)],
        {"kappa": 5.53, "q": 1.0, "x": 15.0},
        "Coupled s-d potential; channel angular momenta are exchanged.",
        outputs=["potential", "smatrix", "spectrum", "verify", "diagnose", "closed_form"],
        verify={"tolerance": 1e-4}),
    "ntc1": _preset(
        "ntc1",
        [_ch("beta_family", 0, kappa0=1.0, kappa1=2.5, kappa2=3.5, beta=-2.0),
         _ch("beta_family", 0, kappa0=1.0, kappa1=2.5, kappa2=3.5, beta=-1.0)],
        {"kappa": 6.0, "q": 0.5, "x": 25.0},
        "Channels with equal S-matrices but different Jost functions: coupled potential "
        "and Jost matrix, trivially coupled S-matrix."),
}


def load_scenario(ref: str | Path) -> Scenario:
    """Parse a preset name or a path to a JSON scenario file."""
    ref_s = str(ref)
    if ref_s in PRESETS:
        return parse_scenario(copy.deepcopy(PRESETS[ref_s]))
    path = Path(ref_s)
    if not path.is_file():
        raise ValidationError(f"'{ref_s}' is neither a preset ({', '.join(sorted(PRESETS))}) nor a file")
    return parse_scenario(path.read_text(encoding="utf-8"))
