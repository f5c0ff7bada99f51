"""
Acceptance suite.  Each test checks one criterion at its stated tolerance
and records a single PASS/FAIL line, printed at the end of the session.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from susy_channels import oracle
from susy_channels import scattering as sc
from susy_channels.coupling import CouplingParams, TransformedModel
from susy_channels.scenario import PRESETS, load_scenario

from conftest import preset

RESULTS = {}


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _wrap(x, period):
    return np.abs((np.asarray(x) + period / 2) % period - period / 2)


def test_criterion_01_oracle_ss():
    m = preset("fig2-ss")[1]
    k = np.linspace(0.1, 5.0, 20)
    t0 = time.perf_counter()
    _, summary = oracle.verify_model(m, k, radii=(30, 45, 60), tol=1e-6, threads=1, checks=False)
    dt = time.perf_counter() - t0
    dev = summary["max_deviation"]
    record(1, dev <= 1e-6 and dt <= 60, f"fig2-ss max|S_num-S| = {dev:.2e} (<= 1e-6), {dt:.1f}s (<= 60s)")


@pytest.mark.parametrize("name", ["fig4-sp", "fig5-sd"])
def test_criterion_02_oracle_sp_sd(name):
    m = preset(name)[1]
    k = np.linspace(0.1, 5.0, 20)
    t0 = time.perf_counter()
    _, summary = oracle.verify_model(m, k, radii=(30, 45, 60), tol=1e-4, checks=False)
    dt = time.perf_counter() - t0
    dev = summary["max_deviation"]
    ok = dev <= 1e-4 and dt <= 180
    RESULTS.setdefault("2parts", {})[name] = (ok, f"{name} {dev:.2e} in {dt:.1f}s")
    parts = RESULTS["2parts"]
    detail = "; ".join(v[1] for v in parts.values()) + " (<= 1e-4, <= 180s each)"
    record(2, all(v[0] for v in parts.values()), detail)


def test_criterion_03_spectral_factorization():
    rng = np.random.default_rng(7)
    worst_zero, worst_ratio = 0.0, 0.0
    for name in sorted(PRESETS):
        alg = sc._as_algebra(preset(name)[1])
        N, M, kap, w = alg.N, alg.M, alg.params.kappa, alg.w_infinity
        for kz in (1j * kap, -1j * kap):
            Fd = alg.diagonal.jost_diagonal(kz)
            scale = np.prod(np.abs(Fd)) * np.linalg.norm(1j * kz * np.eye(N) + w, 2) ** N
            worst_zero = max(worst_zero, abs(np.linalg.det(sc.transformed_jost(alg, kz))) / scale)
        k = rng.uniform(0.01, 20.0, 100) * rng.choice([-1, 1], 100)
        ratio = np.linalg.det(sc.transformed_jost(alg, k)) / np.prod(alg.diagonal.jost_diagonal(k), axis=-1)
        ref = (-1) ** N * (1j * k + kap) ** M * (1j * k - kap) ** (N - M)
        worst_ratio = max(worst_ratio, np.max(np.abs(ratio / ref - 1)))
    record(3, worst_zero <= 1e-10 and worst_ratio <= 1e-10,
           f"all presets: |det F_c(+-i kappa)|/scale = {worst_zero:.1e}, ratio error = {worst_ratio:.1e} (<= 1e-10)")


def test_criterion_04_x_independence():
    scen, m15 = preset("fig2-ss")
    m150 = TransformedModel(m15.diagonal, CouplingParams(m15.kappa, m15.params.q, 150.0))
    k = np.linspace(0.1, 5.0, 20)
    d_an = np.abs(sc.s_matrix(m15, k) - sc.s_matrix(m150, k)).max()
    S15, _, _ = oracle.oracle_smatrix(lambda r: m15.potential(r), m15.nu_tilde, m15.l_tilde, k)
    S150, _, _ = oracle.oracle_smatrix(lambda r: m150.potential(r), m150.nu_tilde, m150.l_tilde, k)
    d_num = np.abs(S15 - S150).max()
    r = np.linspace(0.05, 10, 400)
    dV = np.abs(m15.potential(r) - m150.potential(r)).max()
    record(4, d_an <= 1e-14 and d_num <= 1e-6 and dV >= 1e-2,
           f"x=15 vs 150: analytic {d_an:.1e} (<= 1e-14), oracle {d_num:.1e} (<= 1e-6), max dV = {dV:.2f} (>= 1e-2)")


def test_criterion_05_case_i():
    scen, m = preset("fig4-sp")
    k = scen.k_grid
    _, d1, d2, eps, _ = sc.sweep_model(m, k)
    target = np.pi - np.arctan(k / 1.5) - np.arctan(k / 1.75)
    # multiset comparison modulo pi
    direct = np.maximum(_wrap(d1, np.pi), _wrap(d2 - target, np.pi))
    swapped = np.maximum(_wrap(d2, np.pi), _wrap(d1 - target, np.pi))
    phase_err = np.minimum(direct, swapped).max()
    eps_err = np.abs(eps - np.arctan(k / 3.53)).max()
    record(5, phase_err <= 1e-10 and eps_err <= 1e-10,
           f"fig4-sp eigenphases {phase_err:.1e}, epsilon - arctan(k/3.53) {eps_err:.1e} (<= 1e-10)")


def test_criterion_06_trivial_coupling():
    scen, m = preset("fig1-trivial")
    _, _, _, eps, _ = sc.sweep_model(m, scen.k_grid)
    var = np.var(eps)
    eps_off = np.abs(eps + m.params.alpha / 2).max()
    r = np.linspace(0.5, 3.0, 400)
    V = m.potential(r)
    sigma = V[:, 0, 1] / (V[:, 1, 1] - V[:, 0, 0])
    spread = (sigma.max() - sigma.min()) / np.abs(sigma).max()
    _, n = preset("ntc1")
    kk = np.linspace(0.05, 8, 200)
    route = np.abs(sc.s_matrix(n, kk) - sc.s_matrix_identity(n, kk)).max()
    _, _, _, eps_n, _ = sc.sweep_model(n, kk)
    comm = sc.jost_commutator(n, kk)
    ok = var < 1e-12 and eps_off < 1e-10 and spread > 0.1 and route <= 1e-10 \
        and np.var(eps_n) < 1e-12 and comm > 1e-6
    record(6, ok, f"fig1 var(eps) = {var:.1e}, |eps + alpha/2| = {eps_off:.1e}, sigma spread {spread:.0%}; "
                  f"ntc1 routes {route:.1e}, var(eps) = {np.var(eps_n):.1e}, Jost commutator {comm:.3f}")


def test_criterion_07_closed_form_mixing():
    scen2, m2 = preset("fig2-ss")
    k = scen2.k_grid
    _, _, _, eps2, _ = sc.sweep_model(m2, k)
    err2 = _wrap(2 * eps2 - np.arctan(sc.mixing_ss(k, 1.5, 1.0, m2.params.alpha)), np.pi).max() / 2
    scen5, m5 = preset("fig5-sd")
    k5 = scen5.k_grid
    _, _, _, eps5, _ = sc.sweep_model(m5, k5)
    err5 = _wrap(2 * eps5 - np.arctan(sc.mixing_sd(k5, [1.0, 1.5, 1.75, 2.0, 3.0], 5.53)), np.pi).max() / 2
    kl = np.geomspace(1e-3, 1e-2, 30)
    _, _, _, epsl, _ = sc.sweep_model(m5, kl)
    expo = sc.power_law_exponent(kl, epsl)
    record(7, err2 <= 1e-10 and err5 <= 1e-10 and abs(expo - 2) <= 0.05,
           f"fig2 {err2:.1e}, fig5 {err5:.1e} (<= 1e-10); fig5 low-k exponent {expo:.4f} (2 +- 0.05)")


def test_criterion_08_scattering_length_swap():
    _, m = preset("fig2-ss")
    # pin the phase convention: oracle eigenphases at low k agree with the analytic ones
    kp = np.array([0.1, 0.15, 0.2])
    S_num, _, _ = oracle.oracle_smatrix(lambda r: m.potential(r), m.nu_tilde, m.l_tilde, kp)
    num = np.array([[p.delta1, p.delta2] for p in (sc.eigenphases(S) for S in S_num)])
    _, d1, d2, _, _ = sc.sweep_model(m, kp)
    pin = _wrap(num - np.stack([d1, d2], axis=1), np.pi).max()
    k = np.geomspace(1e-3, 1e-2, 25)
    _, d1, d2, _, _ = sc.sweep_model(m, k)
    out = sc.scattering_lengths(np.stack([d1, d2], axis=1), k)
    inp = np.array([sc.channel_scattering_length(c) for c in m.diagonal.channels])
    ref = np.array([1 / 1.5, 1.0])
    rel = np.abs(out[::-1] / ref - 1).max()
    ok = pin <= 1e-6 and rel <= 5e-3 and np.abs(inp / ref - 1).max() <= 5e-3
    record(8, ok, f"fitted {np.round(out, 5).tolist()} vs channel {np.round(inp, 5).tolist()}: "
                  f"swapped within {rel:.1e} (<= 5e-3); oracle phase pin {pin:.1e}")


def test_criterion_09_levinson():
    drops = sc.phase_drops(preset("fig1-trivial")[1])
    err = abs(drops.sum() - 3 * np.pi)
    record(9, err <= 1e-6, f"fig1 sum of phase drops = {drops.sum() / np.pi:.9f} pi, error {err:.1e} (<= 1e-6)")


def test_criterion_10_invariants():
    worst_s, worst_v = 0.0, 0.0
    checks = {}
    for name in sorted(PRESETS):
        scen, m = preset(name)
        S = sc.s_matrix(m, scen.k_grid)
        worst_s = max(worst_s, np.abs(S @ S.conj().swapaxes(-1, -2) - np.eye(2)).max(),
                      np.abs(S - S.swapaxes(-1, -2)).max())
        V = m.potential(scen.r_grid)
        worst_v = max(worst_v, np.abs(V - V.swapaxes(-1, -2)).max())
        inv = oracle._invariant_checks(m, lambda r: m.potential(r), m.nu_tilde, m.l_tilde)
        for key in ("origin_behaviour", "intertwining"):
            ok, val = inv[key]()
            checks[key] = max(checks.get(key, 0.0), val)
    t0 = time.perf_counter()
    props = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                            str(Path(__file__).with_name("test_properties.py"))],
                           capture_output=True, text=True)
    dt = time.perf_counter() - t0
    ok = (worst_s <= 1e-10 and worst_v <= 1e-10 and checks["origin_behaviour"] <= 1e-2
          and checks["intertwining"] <= 1e-5 and props.returncode == 0 and dt <= 300)
    record(10, ok, f"S {worst_s:.1e}, V sym {worst_v:.1e} (<= 1e-10); r w + nu {checks['origin_behaviour']:.1e} "
                   f"(<= 1e-2); intertwining {checks['intertwining']:.1e} (<= 1e-5); "
                   f"property tests {'green' if props.returncode == 0 else 'red'} in {dt:.0f}s (<= 300s)")
