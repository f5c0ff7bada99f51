"""
Independent numerical check of the analytic scattering layer.

The transformed potential is treated as an opaque matrix evaluator: the
regular solution is integrated outward from the origin with an adaptive
high-order Runge-Kutta scheme, matched to Riccati-Hankel functions at a few
radii, and the resulting S-matrices are extrapolated in 1/R.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationError, MatchingError, SusyChannelsError
from .specfun import double_factorial, riccati_hankel

__all__ = [
    "integrate_regular",
    "extract_smatrix",
    "richardson",
    "OracleReport",
    "oracle_smatrix",
    "bound_state_check",
    "verify_model",
    "thread_count",
    "residual_tail",
]

DEFAULT_RADII = (30.0, 45.0, 60.0)
COND_LIMIT = 1e12


def thread_count() -> int:
    """Worker count from SUSY_CHANNELS_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("SUSY_CHANNELS_THREADS", "1")))
    except ValueError:
        return 1


def _initial_data(nu, r0):
    nu = np.asarray(nu, dtype=int)
    norm = np.array([1.0 / double_factorial(2 * n + 1) for n in nu])
    psi = np.diag(norm * r0 ** (nu + 1.0))
    dpsi = np.diag(norm * (nu + 1.0) * r0 ** nu)
    return psi, dpsi


def _mesh(a, radii, h):
    """Uniform steps of at most h from a, landing exactly on every radius."""
    pts = [a]
    for b in radii:
        n = max(1, int(np.ceil((b - pts[-1]) / h)))
        pts.extend(np.linspace(pts[-1], b, n + 1)[1:])
    return np.asarray(pts)


def _quarter(mesh):
    q = np.empty(4 * (mesh.size - 1) + 1)
    q[::4] = mesh
    steps = np.diff(mesh)
    for j in (1, 2, 3):
        q[j::4] = mesh[:-1] + 0.25 * j * steps
    return q


def _checked(V, r):
    vals = np.asarray(V(r), dtype=float)
    ok = np.all(np.isfinite(vals), axis=(1, 2))
    if not ok.all():
        bad = float(r[~ok][0])
        raise IntegrationError(f"potential is not finite near r={bad:.6g}", r=bad)
    return vals


def _rk4(Vq, E, psi0, dpsi0, nodes_step):
    """Classical RK4 on a mesh; Vq holds V at nodes and midpoints alternately."""
    K = E.size
    N = psi0.shape[0]
    eye = np.eye(N)
    y = np.broadcast_to(psi0, (K, N, N)).copy()
    dy = np.broadcast_to(dpsi0, (K, N, N)).copy()
    out = [(y.copy(), dy.copy())]
    Es = E[:, None, None] * eye
    for i, h in enumerate(nodes_step):
        Qa = Vq[2 * i] - Es
        Qm = Vq[2 * i + 1] - Es
        Qb = Vq[2 * i + 2] - Es
        k1, l1 = dy, Qa @ y
        k2, l2 = dy + 0.5 * h * l1, Qm @ (y + 0.5 * h * k1)
        k3, l3 = dy + 0.5 * h * l2, Qm @ (y + 0.5 * h * k2)
        k4, l4 = dy + h * l3, Qb @ (y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        dy = dy + h / 6 * (l1 + 2 * l2 + 2 * l3 + l4)
        out.append((y, dy))
    return out


def integrate_regular(V: Callable, nu_tilde, k, r0: float = 1e-4, R=60.0,
                      tol: float = 1e-5, energy=None, step_scale: float = 0.08,
                      max_refine: int = 3, rho: float = 0.02, return_error=False):
    """Integrate the regular matrix solution of -psi'' + V psi = E psi.

    Fixed-order (RK4) stepping on a mesh adapted to the local wavelength,
    run at steps h and h/2 and combined by Richardson extrapolation.  The
    mesh is refined until |y_{h/2} - y_h| / 15, the error of the plain h/2
    solution relative to the solution size at the outer radius, is below
    ``tol``; the extrapolated result returned is several orders better.

    Parameters
    ----------
    V : callable
        Vectorized evaluator: ``V(r)`` for an array ``r`` of shape (n,)
        returns an (n, N, N) real symmetric array.
    nu_tilde : sequence of int
        Singularity indices at the origin; fixes the Frobenius start
        ``psi(r0) = r0**(nu+1) / (2 nu + 1)!!``.
    k : float or array_like
        Wavenumbers; all are integrated together with ``E = k**2``.
    r0 : float
        Starting radius, in [1e-5, 1e-3].
    R : float or sequence of float
        Radius (or radii) at which the solution is returned, R >= 20 for
        scattering use.
    energy : array_like, optional
        Energies to use instead of ``k**2`` (e.g. negative for bound states).

    Returns
    -------
    psi, dpsi : ndarray
        Shapes ``(len(R), len(k), N, N)``; squeezed to match scalar inputs.
    """
    if not 1e-5 <= r0 <= 1e-3:
        raise IntegrationError(f"r0 must lie in [1e-5, 1e-3], got {r0}")
    scalar_k = np.ndim(k) == 0 and energy is None
    scalar_R = np.ndim(R) == 0
    radii = np.atleast_1d(np.asarray(R, dtype=float))
    order = np.argsort(radii)
    sorted_R = radii[order]
    if energy is None:
        E = np.atleast_1d(np.asarray(k, dtype=float)) ** 2
    else:
        E = np.atleast_1d(np.asarray(energy, dtype=float))
    psi0, dpsi0 = _initial_data(nu_tilde, r0)

    probe = np.concatenate([np.geomspace(r0, 1.0, 200), np.linspace(1.0, sorted_R[-1], 400)])
    Vp = _checked(V, probe)
    big = np.abs(Vp).max(axis=(1, 2))[probe >= 0.5].max(initial=0.0)
    h = min(0.02, step_scale / np.sqrt(max(np.abs(E).max(), big, 1.0)))


    # geometric prefix near the origin: evaluated once, reused by every refinement
    n_geo = int(np.ceil(np.log(min(1.0, sorted_R[0]) / r0) / np.log1p(rho)))
    geo = r0 * (1 + rho) ** np.arange(n_geo + 1)
    geo_q = _quarter(geo)
    V_geo = _checked(V, geo_q)

    for _ in range(max_refine + 1):
        m = int(np.searchsorted(geo * rho, h))
        m = max(1, min(m, geo.size - 1))
        tail = _mesh(geo[m], sorted_R, h)
        mesh = np.concatenate([geo[:m], tail])
        quarter = _quarter(mesh)
        Vq = np.concatenate([V_geo[: 4 * m], _checked(V, quarter[4 * m:])])
        steps = np.diff(mesh)
        coarse = _rk4(Vq[::2], E, psi0, dpsi0, steps)
        fine = _rk4(Vq, E, psi0, dpsi0, np.repeat(0.5 * steps, 2))
        idx = np.searchsorted(mesh, sorted_R)
        pc = np.stack([coarse[i][0] for i in idx])
        dc = np.stack([coarse[i][1] for i in idx])
        pf = np.stack([fine[2 * i][0] for i in idx])
        df = np.stack([fine[2 * i][1] for i in idx])
        psi = (16 * pf - pc) / 15
        dpsi = (16 * df - dc) / 15
        if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(dpsi))):
            raise IntegrationError("non-finite solution", r=float(sorted_R[-1]))
        scale = np.abs(pf).max(axis=(-1, -2), keepdims=True) + np.abs(df).max(axis=(-1, -2), keepdims=True)
        err = float(np.max((np.abs(pf - pc).max(axis=(-1, -2), keepdims=True)
                            + np.abs(df - dc).max(axis=(-1, -2), keepdims=True)) / scale) / 15)
        if err <= tol:
            break
        h *= 0.5
    inv = np.argsort(order)
    psi, dpsi = psi[inv], dpsi[inv]
    if scalar_k:
        psi, dpsi = psi[:, 0], dpsi[:, 0]
    if scalar_R:
        psi, dpsi = psi[0], dpsi[0]
    if return_error:
        return psi, dpsi, err
    return psi, dpsi


def extract_smatrix(psi, dpsi, R: float, l_tilde, k: float, return_jost=False):
    """Match psi = h(-kR) A + h(kR) B at R and return S = P (-B A^{-1}) P.

    ``A`` and ``B`` are proportional to F(k) and F(-k); the proportionality
    constant cancels in S.
    """
    l_tilde = np.asarray(l_tilde, dtype=int)
    N = l_tilde.size
    hp = np.empty(N, complex)
    dhp = np.empty(N, complex)
    hm = np.empty(N, complex)
    dhm = np.empty(N, complex)
    for j, l in enumerate(l_tilde):
        v, d = riccati_hankel(int(l), k * R)
        hp[j], dhp[j] = v, k * d
        v, d = riccati_hankel(int(l), -k * R)
        hm[j], dhm[j] = v, -k * d
    system = np.block([[np.diag(hm), np.diag(hp)], [np.diag(dhm), np.diag(dhp)]])
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise MatchingError(f"matching system ill-conditioned (cond={cond:.3g}); try a larger R")
    sol = np.linalg.solve(system, np.vstack([psi, dpsi]).astype(complex))
    A, B = sol[:N], sol[N:]
    if np.linalg.cond(A) > COND_LIMIT:
        raise MatchingError("regular-solution coefficient matrix is singular at this k")
    P = 1j ** l_tilde
    S = P[:, None] * (-B @ np.linalg.inv(A)) * P[None, :]
    if return_jost:
        return S, A, B
    return S


def richardson(radii, values):
    """Polynomial extrapolation in 1/R to R = infinity (Neville at x = 0)."""
    x = 1.0 / np.asarray(radii, dtype=float)
    table = [np.asarray(v, dtype=complex) for v in values]
    n = len(table)
    for m in range(1, n):
        table = [(x[i + m] * table[i] - x[i] * table[i + 1]) / (x[i + m] - x[i])
                 for i in range(n - m)]
    return table[0]


@dataclass
class OracleReport:
    k: float
    matching_radii: list
    S_num: np.ndarray
    deviation: float
    converged: bool
    unitarity: float = float("nan")
    deviations_by_radius: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def to_dict(self):
        S = np.asarray(self.S_num, dtype=complex)
        return {
            "k": float(self.k),
            "matching_radii": [float(r) for r in self.matching_radii],
            "S_num": [[[float(z.real), float(z.imag)] for z in row] for row in S],
            "deviation": float(self.deviation),
            "deviations_by_radius": [float(d) for d in self.deviations_by_radius],
            "unitarity": float(self.unitarity),
            "converged": bool(self.converged),
            "failures": list(self.failures),
        }


def _k_groups(ks, ratio):
    """Index groups of sorted wavenumbers with max/min <= ratio."""
    order = np.argsort(ks)
    groups, cur = [], [order[0]]
    for i in order[1:]:
        if ks[i] > ratio * ks[cur[0]]:
            groups.append(np.array(cur))
            cur = []
        cur.append(i)
    groups.append(np.array(cur))
    return groups


class _CachedV:
    """Memoizes an opaque potential evaluator on exact radius arrays."""

    def __init__(self, V):
        self.V = V
        self.store = {}

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        key = r.tobytes()
        if key not in self.store:
            self.store[key] = np.asarray(self.V(r), dtype=float)
        return self.store[key]


def residual_tail(V, l_tilde, R: float) -> float:
    """max |r^2 (V - l(l+1)/r^2)| at R: size of the non-centrifugal tail."""
    lt = np.asarray(l_tilde, dtype=float)
    dV = np.asarray(V(np.array([R], dtype=float)), dtype=float)[0] - np.diag(lt * (lt + 1)) / R ** 2
    return float(np.abs(dV).max() * R ** 2)


TAIL_THRESHOLD = 1e-7
TAIL_KR = 100.0


def oracle_smatrix(V: Callable, nu_tilde, l_tilde, k, radii=DEFAULT_RADII,
                   r0: float = 1e-4, tol: float = 1e-5, threads=None, tail="auto"):
    """Numerical S(k) per matching radius and extrapolated to R = infinity.

    When the potential keeps a power-law residual beyond the centrifugal
    term (``tail="auto"`` detects it at the outer radius), the matching
    radii are scaled per group of wavenumbers so that k R >= 100; the 1/R
    extrapolation then removes the smooth part of the truncation error and
    the oscillating remainder is small.

    Returns ``(S_inf, S_by_radius, radii_used)`` with shapes (K, N, N),
    (len(radii), K, N, N) and (K, len(radii)).
    """
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    radii = np.asarray(sorted(float(r) for r in radii))
    N = len(l_tilde)
    Vc = _CachedV(V)
    if tail == "auto":
        tail = residual_tail(Vc, l_tilde, radii[-1]) > TAIL_THRESHOLD
    S_R = np.empty((len(radii), ks.size, N, N), complex)
    used = np.empty((ks.size, len(radii)))
    groups = _k_groups(ks, 2.0) if tail else [np.argsort(ks)]

    def work(idx):
        scale = max(1.0, TAIL_KR / (ks[idx].min() * radii[0])) if tail else 1.0
        Rs = radii * scale
        psi, dpsi = integrate_regular(Vc, nu_tilde, ks[idx], r0=r0, R=Rs, tol=tol)
        for a, R in enumerate(Rs):
            for b, i in enumerate(idx):
                S_R[a, i] = extract_smatrix(psi[a, b], dpsi[a, b], R, l_tilde, ks[i])
        used[idx] = Rs

    nthreads = thread_count() if threads is None else threads
    if nthreads > 1 and len(groups) > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            list(pool.map(work, groups))
    else:
        for g in groups:
            work(g)
    if len(radii) > 1:
        S_inf = np.stack([richardson(used[i], S_R[:, i]) for i in range(ks.size)])
    else:
        S_inf = S_R[0]
    return S_inf, S_R, used


def bound_state_check(V: Callable, nu_tilde, l_tilde, kappa: float, R: float = 8.0,
                      r0: float = 1e-4, detune: float = 0.05):
    """Shooting test for a square-integrable solution at E = -kappa**2.

    The regular solution at R is split into growing and decaying parts with
    h(-i kappa R) and h(i kappa R).  A bound state makes the growing
    coefficient matrix singular.  Returns (ratio at kappa, ratio detuned),
    where ratio is the smallest over the largest singular value.
    """
    out = []
    for kap in (kappa, kappa * (1 + detune)):
        psi, dpsi = integrate_regular(V, nu_tilde, None, r0=r0, R=R, energy=[-kap ** 2])
        psi, dpsi = psi[0], dpsi[0]
        N = len(l_tilde)
        grow = np.empty(N)
        dgrow = np.empty(N)
        dec = np.empty(N)
        ddec = np.empty(N)
        for j, l in enumerate(l_tilde):
            v, d = riccati_hankel(int(l), -1j * kap * R)
            grow[j], dgrow[j] = v.real, (-1j * kap * d).real
            v, d = riccati_hankel(int(l), 1j * kap * R)
            dec[j], ddec[j] = v.real, (1j * kap * d).real
        # both Hankel combinations are real on the imaginary axis for integer l
        A = np.empty((N, N))
        for j in range(N):
            det = grow[j] * ddec[j] - dgrow[j] * dec[j]
            A[j] = (psi[j] * ddec[j] - dpsi[j] * dec[j]) / det
        sv = np.linalg.svd(A, compute_uv=False)
        out.append(float(sv[-1] / sv[0]))
    return tuple(out)


def verify_model(model, k_grid, radii=DEFAULT_RADII, tol: float = 1e-6, r0: float = 1e-4,
                 int_tol: float = 1e-5, threads=None, analytic=None, checks=True):
    """Compare oracle and analytic S-matrices on a k grid.

    Returns ``(reports, summary)``.  Failures are recorded in the reports
    and the summary; nothing is raised.
    """
    from . import scattering  # analytic reference only, never fed into the integration

    k_grid = np.atleast_1d(np.asarray(k_grid, dtype=float))
    l_tilde = list(model.l_tilde)
    nu_tilde = list(model.nu_tilde)

    def V(r):
        return model.potential(np.asarray(r, dtype=float))

    summary = {"failures": [], "checks": {}}
    try:
        S_an = scattering.s_matrix(model, k_grid) if analytic is None else np.asarray(analytic)
    except SusyChannelsError as exc:
        S_an = np.full((k_grid.size, 2, 2), np.nan + 0j)
        summary["failures"].append(f"analytic S-matrix: {exc}")
    try:
        S_inf, S_R, used = oracle_smatrix(V, nu_tilde, l_tilde, k_grid, radii, r0=r0,
                                          tol=int_tol, threads=threads)
        oracle_error = None
    except SusyChannelsError as exc:
        S_inf = np.full((k_grid.size, 2, 2), np.nan + 0j)
        S_R = np.full((len(radii), k_grid.size, 2, 2), np.nan + 0j)
        used = np.tile(np.asarray(radii, dtype=float), (k_grid.size, 1))
        oracle_error = f"oracle: {exc}"
        summary["failures"].append(oracle_error)

    reports = []
    for i, k in enumerate(k_grid):
        S = S_inf[i]
        dev = float(np.abs(S - S_an[i]).max())
        unit = float(np.abs(S @ S.conj().T - np.eye(2)).max())
        by_R = [float(np.abs(S_R[a, i] - S_an[i]).max()) for a in range(len(radii))]
        fails = []
        if oracle_error:
            fails.append(oracle_error)
        if not dev <= tol:
            fails.append(f"deviation {dev:.3g} > {tol:g}")
        if not unit <= 1e-6:
            fails.append(f"oracle unitarity {unit:.3g} > 1e-6")
        reports.append(OracleReport(float(k), [float(x) for x in used[i]], S, dev, not fails, unit, by_R, fails))

    if checks:
        for name, fn in _invariant_checks(model, V, nu_tilde, l_tilde).items():
            try:
                ok, value = fn()
            except SusyChannelsError as exc:
                ok, value = False, str(exc)
            summary["checks"][name] = {"passed": bool(ok), "value": value}
            if not ok:
                summary["failures"].append(f"{name} failed ({value})")
    summary["max_deviation"] = float(max((r.deviation for r in reports), default=float("nan")))
    summary["converged"] = bool(all(r.converged for r in reports) and not summary["failures"])
    return reports, summary


def _fd_second(fn, r, h):
    """Fourth-order central second derivative."""
    return (-fn(r + 2 * h) + 16 * fn(r + h) - 30 * fn(r) + 16 * fn(r - h) - fn(r - 2 * h)) / (12 * h ** 2)


def _invariant_checks(model, V, nu_tilde, l_tilde):
    kap = model.kappa

    def origin():
        r = 1e-3
        w, _ = model.superpotential(np.array([r]))
        val = float(np.abs(np.diag(r * w[0]) + np.asarray(model.diagonal.nu)).max())
        return val <= 1e-2, val

    def intertwining():
        rs = np.array([0.7, 1.6, 3.2])
        worst = 0.0
        h = 1e-3
        for k in (0.7, 1.9):
            def f(r):
                return model.jost_solution(k, np.atleast_1d(r))[0]
            for r in rs:
                lhs = -_fd_second(f, r, h) + model.potential(np.array([r])) @ f(r) - k ** 2 * f(r)
                worst = max(worst, float(np.abs(lhs).max() / np.abs(f(r)).max()))
        return worst <= 1e-5, worst

    def bound_column():
        rs = np.array([0.8, 1.5, 2.5])
        h = 1e-3
        worst = 0.0
        for r in rs:
            def phi(x):
                return model.bound_state_solution(np.atleast_1d(x))[..., 0]
            lhs = -_fd_second(phi, r, h) + model.potential(np.array([r])) @ phi(r)[0] + kap ** 2 * phi(r)
            worst = max(worst, float(np.abs(lhs).max() / np.abs(phi(r)).max()))
        return worst <= 1e-5, worst

    def shooting():
        at, off = bound_state_check(V, nu_tilde, l_tilde, kap)
        return at <= 1e-6 and off > 1e-4, [at, off]

    return {"origin_behaviour": origin, "intertwining": intertwining,
            "bound_state_column": bound_column, "bound_state_shooting": shooting}
