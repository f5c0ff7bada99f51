"""
Command-line front end.

    susy-channels <command> --scenario <path|preset> --out <dir>
                  [--override-physics-checks] [--radii 30,45,60]

Commands: potential, smatrix, spectrum, verify, diagnose.  Every artifact is
written atomically with 17 significant digits, so identical inputs give
byte-identical files.  On failure an ``error.json`` is written to the output
directory and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import oracle, scattering
from .coupling import TransformedModel
from .errors import SusyChannelsError, ValidationError
from .scenario import PRESETS, Scenario, load_scenario

__all__ = ["main", "run", "COMMANDS"]

COMMANDS = ("potential", "smatrix", "spectrum", "verify", "diagnose")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_ERROR = 3


# ---------------------------------------------------------------------------
# deterministic output


def fmt(x) -> str:
    """Fixed float formatting: 17 significant digits."""
    return format(float(x), ".17g")


def _to_json(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_to_json(v, indent + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_to_json(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else json.dumps(str(float(obj)))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, 17-digit floats, trailing newline)."""
    return _to_json(obj) + "\n"


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _two_channel(model, what):
    if not isinstance(model, TransformedModel):
        raise ValidationError(f"{what} needs a two-channel (q, x) scenario")
    return model


def cmd_potential(scen: Scenario, model, out: Path, args):
    model = _two_channel(model, "potential")
    r = scen.r_grid
    V = model.potential(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = V[:, 0, 1] / (V[:, 1, 1] - V[:, 0, 0])
    rows = [(ri, v[0, 0], v[0, 1], v[1, 1], s) for ri, v, s in zip(r, V, sigma)]
    write_atomic(out / "potential.csv", csv_text(["r", "V11", "V12", "V22", "sigma"], rows))
    return EXIT_OK, {"points": len(rows)}


def _closed_form(scen: Scenario, model, k):
    """Closed-form mixing information matching the scenario, or None."""
    chans = scen.raw["channels"]
    fams = [c["family"] for c in chans]
    p = model.params
    if fams == ["cosech", "cosech"]:
        k1, k2 = (c["params"]["kappa"] for c in chans)
        return "tan_2eps_ss", scattering.mixing_ss(k, k1, k2, p.alpha)
    if fams == ["sd_s", "sd_d"] and abs(p.q) == 1:
        kap = [chans[0]["params"][f"kappa{j}"] for j in range(4)] + [chans[1]["params"]["kappa4"]]
        return "tan_2eps_sd", scattering.mixing_sd(k, kap, p.kappa)
    l1, l2 = (int(v) for v in model.diagonal.l)
    case = scattering.classify_case(l1, l2)
    if case == "i" and abs(p.q) == 1:
        return "epsilon_case_i", scattering.mixing_closed_form("i", k, kappa=p.kappa, alpha=p.alpha,
                                                               l1=l1, l2=l2)
    return None


def cmd_smatrix(scen: Scenario, model, out: Path, args):
    model = _two_channel(model, "smatrix")
    k = scen.k_grid
    S, d1, d2, eps, flag = scattering.sweep_model(model, k)
    rows = [(ki, a, b, e, s[0, 0].real, s[0, 0].imag, s[0, 1].real, s[0, 1].imag,
             s[1, 1].real, s[1, 1].imag) for ki, a, b, e, s in zip(k, d1, d2, eps, S)]
    header = ["k", "delta1", "delta2", "epsilon", "ReS11", "ImS11", "ReS12", "ImS12", "ReS22", "ImS22"]
    write_atomic(out / "smatrix.csv", csv_text(header, rows))
    info = {"points": len(rows), "degenerate_points": int(flag.sum())}
    if "closed_form" in scen.outputs:
        cf = _closed_form(scen, model, k)
        if cf is not None:
            name, vals = cf
            extracted = np.tan(2 * eps) if name.startswith("tan") else eps
            write_atomic(out / "closed_form.csv",
                         csv_text(["k", name, "extracted"], zip(k, vals, extracted)))
            info["closed_form"] = name
    return EXIT_OK, info


def cmd_spectrum(scen: Scenario, model, out: Path, args):
    box = scen.raw.get("spectrum", {}).get("search_box")
    cat = scattering.spectrum(model, search_box=box)
    alg = scattering._as_algebra(model)
    M, NM = scattering.degeneracies(model)
    doc = {
        "scenario": scen.name,
        "kappa": alg.params.kappa,
        "expected_degeneracy": {"bound_at_i_kappa": M, "virtual_at_minus_i_kappa": NM},
        "catalog": cat.to_dict(),
        "residuals": cat.residuals,
    }
    write_atomic(out / "spectrum.json", dumps(doc))
    return (EXIT_OK if not cat.unresolved else EXIT_CHECK_FAILED), {"bound": len(cat.bound)}


def cmd_verify(scen: Scenario, model, out: Path, args):
    model = _two_channel(model, "verify")
    ver = scen.raw["verify"]
    radii = args.radii or ver["radii"]
    k = scen.verify_k_grid
    reports, summary = oracle.verify_model(model, k, radii=radii, tol=ver["tolerance"])
    doc = {
        "scenario": scen.name,
        "tolerance": ver["tolerance"],
        "base_radii": [float(r) for r in radii],
        "max_deviation": summary["max_deviation"],
        "converged": summary["converged"],
        "failures": summary["failures"],
        "checks": summary["checks"],
        "reports": [r.to_dict() for r in reports],
    }
    write_atomic(out / "verify.json", dumps(doc))
    return (EXIT_OK if summary["converged"] else EXIT_CHECK_FAILED), {
        "max_deviation": summary["max_deviation"]}


def cmd_diagnose(scen: Scenario, model, out: Path, args):
    model = _two_channel(model, "diagnose")
    rep = scattering.diagnostics(model, scen.k_grid, scen.r_grid)
    rep["scenario"] = scen.name
    write_atomic(out / "diagnose.json", dumps(rep))
    return EXIT_OK, {}


HANDLERS = {
    "potential": cmd_potential,
    "smatrix": cmd_smatrix,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "diagnose": cmd_diagnose,
}


def _error_doc(exc, command, scenario_ref):
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "problems": list(getattr(exc, "problems", [str(exc)])),
        "location": getattr(exc, "r", None),
        "command": command,
        "scenario": str(scenario_ref),
    }


def run(command: str, scenario, out_dir, override_physics_checks: bool = False, radii=None) -> int:
    """Run one command; returns the exit status.  Errors go to error.json."""
    out = Path(out_dir)
    ns = argparse.Namespace(radii=radii)
    try:
        if command not in HANDLERS:
            raise ValidationError(f"unknown command '{command}' (choose from {', '.join(COMMANDS)})")
        scen = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
        model = scen.model(override_physics_checks or None)
        status, _ = HANDLERS[command](scen, model, out, ns)
        return status
    except SusyChannelsError as exc:
        doc = _error_doc(exc, command, getattr(scenario, "name", scenario))
        write_atomic(out / "error.json", dumps(doc))
        sys.stderr.write(dumps(doc))
        return EXIT_INVALID if isinstance(exc, ValidationError) else EXIT_ERROR


def _radii(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radii list '{text}'") from None
    if not vals or any(v < 20 for v in vals):
        raise argparse.ArgumentTypeError("radii must be a comma list of values >= 20")
    return vals


def build_parser():
    p = argparse.ArgumentParser(
        prog="susy-channels",
        description="Coupled-channel exactly solvable potentials: sweeps, spectra and verification.",
        epilog=f"presets: {', '.join(sorted(PRESETS))}; SUSY_CHANNELS_THREADS caps parallelism",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="JSON scenario file or preset name")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--override-physics-checks", action="store_true",
                   help="allow q != +-1 when the channel angular momenta differ")
    p.add_argument("--radii", type=_radii, default=None, help="matching radii, e.g. 30,45,60")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.scenario, args.out, args.override_physics_checks, args.radii)


if __name__ == "__main__":
    sys.exit(main())
