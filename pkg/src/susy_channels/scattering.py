"""
Analytic scattering layer for coupling-transformed models.

Everything here follows from w_infinity and the diagonal Jost functions:
F_c(k) = -(ik + w_inf) F_d(k), S(k) = P F_c(-k) F_c(k)^{-1} P with
P = diag(i^l~).  No potential is evaluated in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .coupling import CouplingParams, DiagonalModel, TransformedModel, w_infinity
from .errors import ContractError, DomainError, ValidationError

__all__ = [
    "CoupledJost",
    "transformed_jost",
    "transformed_jost_matrix",
    "s_matrix",
    "s_matrix_identity",
    "ScatteringPoint",
    "eigenphases",
    "phase_sweep",
    "tan_two_epsilon",
    "mixing_closed_form",
    "mixing_ss",
    "mixing_sd",
    "SpectralCatalog",
    "spectrum",
    "diagnostics",
    "scattering_lengths",
    "phase_drops",
    "kappa_for_zero_mixing",
    "classify_case",
    "degeneracies",
    "sweep_model",
]


@dataclass(frozen=True)
class CoupledJost:
    """Algebraic view of a coupling transformation, for any number of channels."""

    diagonal: DiagonalModel
    params: CouplingParams

    def __post_init__(self):
        if not isinstance(self.diagonal, DiagonalModel):
            object.__setattr__(self, "diagonal", DiagonalModel(tuple(self.diagonal)))

    @property
    def N(self):
        return self.diagonal.N

    @property
    def w_infinity(self):
        return w_infinity(self.params, self.N)

    @property
    def M(self):
        return self.params.blocks(self.N)[0]


def _as_algebra(model) -> CoupledJost:
    if isinstance(model, CoupledJost):
        return model
    if isinstance(model, TransformedModel):
        return CoupledJost(model.diagonal, model.params)
    raise TypeError(f"expected a TransformedModel or CoupledJost, got {type(model)!r}")


def transformed_jost_matrix(w_inf, fd_diag, k):
    """-(ik I + w_inf) diag(fd_diag), vectorized over k."""
    k = np.asarray(k, dtype=complex)
    w_inf = np.asarray(w_inf)
    N = w_inf.shape[0]
    fd = np.asarray(fd_diag)
    left = -(1j * k[..., None, None] * np.eye(N) + w_inf)
    return left * fd[..., None, :]


def transformed_jost(model, k):
    """Transformed Jost matrix F_c(k) for any number of channels."""
    alg = _as_algebra(model)
    k = np.asarray(k, dtype=complex)
    for c in alg.diagonal.channels:
        for p in c.jost.poles:
            if np.any(np.abs(k - p) < 1e-14):
                raise DomainError(f"k={p} is a pole of F_d ({c.family})")
    return transformed_jost_matrix(alg.w_infinity, alg.diagonal.jost_diagonal(k), k)


def _l_tilde(model):
    if isinstance(model, TransformedModel):
        return np.array(model.l_tilde)
    return np.array(model.diagonal.l)


def s_matrix(model, k):
    """S(k) = P F_c(-k) F_c(k)^{-1} P with P = diag(i^l~), for real k > 0."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise DomainError("S-matrix is evaluated at real k > 0")
    Fp = transformed_jost(model, k)
    Fm = transformed_jost(model, -k)
    det = np.linalg.det(Fp)
    if np.any(np.abs(det) < 1e-300):
        raise DomainError("F_c(k) is singular")
    P = 1j ** _l_tilde(model)
    S = np.linalg.solve(Fp.swapaxes(-1, -2), Fm.swapaxes(-1, -2)).swapaxes(-1, -2)
    return P[:, None] * S * P[None, :]


def s_matrix_identity(model, k):
    """S from the diagonal phase shifts and w_inf (independent algebra route).

    S_c = P (w_inf - ik) (-1)^l S_d (w_inf + ik)^{-1} P, with
    S_d = diag(exp(2 i delta_d)) built from the channel phase shifts.
    """
    k = np.asarray(k, dtype=float)
    alg = _as_algebra(model)
    N = alg.N
    w = alg.w_infinity
    sd = np.stack([np.exp(2j * c.phase_shift(k)) * (-1) ** c.l for c in alg.diagonal.channels], axis=-1)
    I = np.eye(N)
    left = w - 1j * k[..., None, None] * I
    right = np.linalg.inv(w + 1j * k[..., None, None] * I)
    S = left @ (sd[..., :, None] * right)
    P = 1j ** _l_tilde(model)
    return P[:, None] * S * P[None, :]


# ---------------------------------------------------------------------------
# eigenphases and mixing angle


class ScatteringPoint(NamedTuple):
    k: float
    S: np.ndarray
    delta1: float
    delta2: float
    epsilon: float
    degenerate: bool = False


def _rot(eps):
    c, s = np.cos(eps), np.sin(eps)
    return np.array([[c, s], [-s, c]])


def _nearest(value, target, period):
    return value + period * np.round((target - value) / period)


def eigenphases(S, prev: ScatteringPoint | None = None, k: float = float("nan"), tol=1e-8):
    """Blatt-Biedenharn parameters (delta1, delta2, epsilon) of a 2x2 S.

    ``R(eps)^T S R(eps) = diag(exp(2i delta1), exp(2i delta2))`` with
    ``R = [[cos, sin], [-sin, cos]]``.  Without ``prev`` the mixing angle is
    taken in (-pi/4, pi/4] and the phases in (-pi/2, pi/2]; with ``prev``
    the branch closest to the previous point is chosen.
    """
    S = np.asarray(S, dtype=complex)
    if S.shape != (2, 2):
        raise ContractError("eigenphases expects a 2x2 matrix")
    scale = max(np.abs(S).max(), 1.0)
    if np.abs(S @ S.conj().T - np.eye(2)).max() > tol or np.abs(S - S.T).max() > tol:
        raise ContractError("S is not unitary and symmetric")
    d = S[1, 1] - S[0, 0]
    o = S[0, 1] + S[1, 0]
    degenerate = max(abs(d), abs(o)) < 1e-13 * scale
    if degenerate:
        eps = 0.0 if prev is None else prev.epsilon
    else:
        c = o if abs(o) > abs(d) else d
        ph = np.conj(c) / abs(c)
        eps = 0.5 * np.arctan2((o * ph).real, (d * ph).real)
        if prev is None:
            eps = _nearest(eps, 0.0, np.pi / 2)
            if eps <= -np.pi / 4:
                eps += np.pi / 2
        else:
            eps = _nearest(eps, prev.epsilon, np.pi / 2)
    R = _rot(eps)
    Dg = R.T @ S @ R
    lam = np.diag(Dg)
    half = np.angle(lam) / 2
    if prev is None:
        d1, d2 = (_nearest(h, 0.0, np.pi) for h in half)
        d1 = d1 + np.pi if d1 <= -np.pi / 2 else d1
        d2 = d2 + np.pi if d2 <= -np.pi / 2 else d2
    else:
        d1 = _nearest(half[0], prev.delta1, np.pi)
        d2 = _nearest(half[1], prev.delta2, np.pi)
    return ScatteringPoint(float(k), S, float(d1), float(d2), float(eps), bool(degenerate))


def phase_sweep(S_values, k_grid, seed: ScatteringPoint | None = None):
    """Continuous (delta1, delta2, epsilon) along an ordered k grid.

    Returns arrays ``delta1, delta2, epsilon, degenerate``.  Degenerate
    points (0/0 mixing angle) get an interpolated epsilon and are flagged.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    pts = []
    prev = seed
    for k, S in zip(k_grid, S_values):
        pt = eigenphases(S, prev, k)
        pts.append(pt)
        prev = pt
    d1 = np.array([p.delta1 for p in pts])
    d2 = np.array([p.delta2 for p in pts])
    eps = np.array([p.epsilon for p in pts])
    flag = np.array([p.degenerate for p in pts])
    if flag.any() and (~flag).sum() >= 2:
        eps[flag] = np.interp(k_grid[flag], k_grid[~flag], eps[~flag])
    return d1, d2, eps, flag


def sweep_model(model, k_grid, anchor_k=None):
    """Analytic eigenphases of a model on a k grid.

    When ``anchor_k`` is given the branch is seeded at that wavenumber and
    continued along a logarithmic path to the first grid point.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    seed = None
    if anchor_k is not None:
        path = np.geomspace(anchor_k, k_grid[0], 400)
        Sp = s_matrix(model, path)
        d1, d2, eps, _ = phase_sweep(Sp, path)
        seed = ScatteringPoint(path[-1], Sp[-1], d1[-1], d2[-1], eps[-1])
    S = s_matrix(model, k_grid)
    return (S,) + phase_sweep(S, k_grid, seed)


# ---------------------------------------------------------------------------
# closed forms


def tan_two_epsilon(case: str, k, kappa: float, alpha: float, Delta, l1: int, l2: int):
    """General closed forms of tan 2 eps for the three l-difference cases.

    ``Delta = delta_{d;2} - delta_{d;1}`` of the diagonal model.
    """
    k = np.asarray(k, dtype=float)
    Delta = np.asarray(Delta, dtype=float)
    ca, sa = np.cos(alpha), np.sin(alpha)
    if case == "i":
        sign = (-1) ** ((l2 - l1 - 1) // 2)
        num = 2 * sign * kappa * sa * (k * np.sin(Delta) - kappa * ca * np.cos(Delta))
        den = 2 * kappa * k * ca * np.cos(Delta) - (k ** 2 - kappa ** 2) * np.sin(Delta)
    elif case in ("ii", "iii"):
        sign = (-1) ** ((l2 - l1) // 2)
        num = 2 * sign * kappa * sa * (kappa * ca * np.sin(Delta) + k * np.cos(Delta))
        den = np.sin(Delta) * (k ** 2 - kappa ** 2 * np.cos(2 * alpha)) - 2 * kappa * k * ca * np.cos(Delta)
    else:
        raise ValidationError(f"unknown case {case!r}")
    return num / den


def classify_case(l1: int, l2: int) -> str:
    if l1 == l2:
        return "iii"
    return "i" if (l2 - l1) % 2 else "ii"


def mixing_closed_form(case: str, k, *, kappa: float, alpha: float = np.pi / 2,
                       l1: int = 0, l2: int = 0, Delta=None):
    """Closed-form mixing information.

    Case ``"i"`` returns eps(k) = (-1)^{(l2-l1-1)/2} arctan(k/kappa).
    Case ``"ii"`` returns tan 2eps = (-1)^{(l2-l1)/2} 2 kappa k cot(Delta) / (k^2 + kappa^2).
    Case ``"iii"`` returns tan 2eps from the general expression.
    Cases i and ii require alpha = pi/2.
    """
    k = np.asarray(k, dtype=float)
    if case in ("i", "ii") and abs(abs(alpha) - np.pi / 2) > 1e-12:
        raise ValidationError(f"case ({case}) needs alpha = pi/2 (q = 1), got alpha={alpha}")
    if case == "i":
        return (-1) ** ((l2 - l1 - 1) // 2) * np.arctan(k / kappa)
    if Delta is None:
        raise ValidationError(f"case ({case}) needs Delta(k)")
    if case == "ii":
        sign = (-1) ** ((l2 - l1) // 2)
        return sign * 2 * kappa * k / (k ** 2 + kappa ** 2) / np.tan(Delta)
    if case == "iii":
        return tan_two_epsilon("iii", k, kappa, alpha, Delta, l1, l2)
    raise ValidationError(f"unknown case {case!r}")


def mixing_ss(k, kappa1: float, kappa2: float, alpha: float):
    """tan 2 eps for two cosech s-waves with kappa fixed by eps(0) = 0."""
    k = np.asarray(k, dtype=float)
    return -2 * k ** 2 * kappa1 * kappa2 * np.tan(alpha) / (
        kappa1 ** 2 * kappa2 ** 2 / np.cos(alpha) ** 2 + k ** 2 * (kappa1 ** 2 + kappa2 ** 2))


def mixing_sd(k, kappas: Sequence[float], kappa: float):
    """tan 2 eps for the s-d example: 2 kappa k / (k^2 + kappa^2) tan(sum arctan(k/kappa_j))."""
    k = np.asarray(k, dtype=float)
    phase = sum(np.arctan(k / kj) for kj in kappas)
    return 2 * kappa * k / (k ** 2 + kappa ** 2) * np.tan(phase)


def kappa_for_zero_mixing(a1: float, a2: float, q: float) -> float:
    """Factorization wavenumber giving eps(0) = 0: cos(alpha) = 1 / ((a2 - a1) kappa)."""
    ca = np.cos(2 * np.arctan(q))
    den = (a2 - a1) * ca
    if den == 0:
        return float("nan")
    return 1.0 / den


# ---------------------------------------------------------------------------
# spectrum


@dataclass
class SpectralCatalog:
    bound: list = field(default_factory=list)       # (kappa_b, degeneracy)
    virtual: list = field(default_factory=list)     # (kappa_v, degeneracy)
    threshold: list = field(default_factory=list)   # (0.0, degeneracy)
    resonances: list = field(default_factory=list)  # (complex k, degeneracy)
    unresolved: list = field(default_factory=list)  # boxes that did not converge
    residuals: dict = field(default_factory=dict)

    def to_dict(self):
        def fmt(z):
            return {"re": float(np.real(z)), "im": float(np.imag(z))}
        return {
            "bound": [{"k": f"{kb:.17g}i", "kappa": float(kb), "degeneracy": int(m)} for kb, m in self.bound],
            "virtual": [{"k": f"-{kv:.17g}i", "kappa": float(kv), "degeneracy": int(m)} for kv, m in self.virtual],
            "threshold": [{"k": "0", "degeneracy": int(m)} for _, m in self.threshold],
            "resonances": [dict(fmt(z), degeneracy=int(m)) for z, m in self.resonances],
            "unresolved": [list(map(float, b)) for b in self.unresolved],
        }


def _entire_det(alg: CoupledJost):
    poles = [p for c in alg.diagonal.channels for p in c.jost.poles]

    def g(k):
        k = np.asarray(k, dtype=complex)
        F = transformed_jost_matrix(alg.w_infinity, alg.diagonal.jost_diagonal(k), k)
        out = np.linalg.det(F)
        for p in poles:
            out = out * (k - p)
        return out

    return g


def _contour(box, n):
    x0, x1, y0, y1 = box
    t = np.linspace(0, 1, n, endpoint=False)
    edges = [x0 + (x1 - x0) * t + 1j * y0,
             x1 + 1j * (y0 + (y1 - y0) * t),
             x1 - (x1 - x0) * t + 1j * y1,
             x0 + 1j * (y1 - (y1 - y0) * t)]
    z = np.concatenate(edges)
    return np.append(z, z[0])


def _moments(g, box, n=256):
    while True:
        z = _contour(box, n)
        val = g(z)
        if np.any(val == 0) or not np.all(np.isfinite(val)):
            return None
        dphi = np.angle(val[1:] / val[:-1])
        if np.abs(dphi).max() < np.pi / 8 or n > 2 ** 16:
            break
        n *= 4
    dlog = np.log(np.abs(val[1:]) / np.abs(val[:-1])) + 1j * dphi
    zm = 0.5 * (z[1:] + z[:-1])
    count = dphi.sum() / (2 * np.pi)
    s1 = np.sum(zm * dlog) / (2j * np.pi)
    s2 = np.sum(zm ** 2 * dlog) / (2j * np.pi)
    return count, s1, s2


def _polish(g, z, m, iters=60):
    h = 1e-6 * max(1.0, abs(z))
    for _ in range(iters):
        gz = g(z)
        if gz == 0:
            break
        dg = (g(z + h) - g(z - h)) / (2 * h)
        if dg == 0:
            break
        step = m * gz / dg
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    return z


def spectrum(model, search_box=None, axis_tol=1e-7, min_size=1e-6):
    """Zeros of det F_c with multiplicities, from argument-principle box counts.

    ``search_box = (re_min, re_max, im_min, im_max)`` in k.  The poles of
    F_d are multiplied out first so the function searched is entire.
    """
    alg = _as_algebra(model)
    g = _entire_det(alg)
    if search_box is None:
        scale = [alg.params.kappa]
        for c in alg.diagonal.channels:
            scale += [abs(z) for z in c.jost.zeros] + [abs(p) for p in c.jost.poles]
        K = 2.0 * max(scale) + 1.0
        search_box = (-K, K * 1.0007, -K * 1.0003, K * 1.0011)
    cat = SpectralCatalog()
    found = []
    stack = [tuple(float(v) for v in search_box)]
    while stack:
        box = stack.pop()
        mom = _moments(g, box)
        x0, x1, y0, y1 = box
        if mom is None:
            # zero on the contour: nudge the box outward slightly
            d = 1e-3 * max(x1 - x0, y1 - y0)
            stack.append((x0 - d * 0.37, x1 + d * 0.53, y0 - d * 0.41, y1 + d * 0.29))
            continue
        count, s1, s2 = mom
        n = int(round(count.real))
        if abs(count - n) > 1e-3 or n < 0:
            if max(x1 - x0, y1 - y0) < min_size:
                cat.unresolved.append(box)
                continue
        if n <= 0:
            continue
        center = s1 / n
        spread = abs(s2 / n - center ** 2)
        size = max(x1 - x0, y1 - y0)
        if spread < (1e-6 * max(1.0, abs(center))) ** 2 or size < min_size:
            found.append((center, n))
            continue
        xm = 0.5 * (x0 + x1) + 1.3e-4 * (x1 - x0)
        ym = 0.5 * (y0 + y1) - 1.7e-4 * (y1 - y0)
        stack += [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
    for center, n in found:
        z = _polish(g, complex(center), n)
        ring = z + 1e-3 * max(1.0, abs(z)) * np.exp(2j * np.pi * np.arange(16) / 16)
        F = transformed_jost(alg, ring) if not _near_pole(alg, ring) else None
        local = np.abs(np.linalg.det(F)).max() if F is not None else np.nan
        try:
            at = abs(np.linalg.det(transformed_jost(alg, z)))
        except DomainError:
            at = np.nan
        cat.residuals[f"{z.real:.12g}{z.imag:+.12g}j"] = float(at / local) if local else float("nan")
        if abs(z.real) <= axis_tol * max(1.0, abs(z)):
            if abs(z.imag) <= axis_tol:
                cat.threshold.append((0.0, n))
            elif z.imag > 0:
                cat.bound.append((float(z.imag), n))
            else:
                cat.virtual.append((float(-z.imag), n))
        else:
            cat.resonances.append((complex(z), n))
    cat.bound.sort()
    cat.virtual.sort()
    return cat


def _near_pole(alg, ks):
    for c in alg.diagonal.channels:
        for p in c.jost.poles:
            if np.any(np.abs(ks - p) < 1e-12):
                return True
    return False


def degeneracies(model):
    """Expected (bound, virtual) multiplicities at +-i kappa: (M, N - M)."""
    alg = _as_algebra(model)
    ev = np.linalg.eigvalsh(alg.w_infinity)
    kap = alg.params.kappa
    return int(np.sum(np.isclose(ev, kap))), int(np.sum(np.isclose(ev, -kap)))


# ---------------------------------------------------------------------------
# diagnostics


def scattering_lengths(deltas, k):
    """Fit tan(delta)/k = -a + b k^2 and return a per column of ``deltas``."""
    k = np.asarray(k, dtype=float)
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float).T).T
    A = np.stack([np.ones_like(k), k ** 2], axis=1)
    out = []
    for col in deltas.T:
        coef, *_ = np.linalg.lstsq(A, np.tan(col) / k, rcond=None)
        out.append(-coef[0])
    return np.array(out)


def channel_scattering_length(channel, k=np.geomspace(1e-3, 1e-2, 25)):
    return float(scattering_lengths(channel.phase_shift(k)[:, None], k)[0])


def phase_drops(model, k_min=1e-8, k_max=1e10, count=8000):
    """delta_j(0) - delta_j(inf) of each eigenchannel along a continuous branch."""
    ks = np.geomspace(k_min, k_max, count)
    _, d1, d2, _, _ = sweep_model(model, ks)
    return np.array([d1[0] - d1[-1], d2[0] - d2[-1]])


def power_law_exponent(k, y):
    """Slope of log|y| against log k."""
    k = np.asarray(k, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    slope, _ = np.polyfit(np.log(k), np.log(y), 1)
    return float(slope)


def jost_commutator(model, ks):
    """Largest commutator norm among F(k_a)^{-1} F(k_b); zero for trivially coupled F."""
    ks = np.asarray(ks, dtype=float)
    F = transformed_jost(model, ks)
    mats = [np.linalg.solve(F[0], F[i]) for i in range(1, len(ks))]
    worst = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            A, B = mats[i], mats[j]
            worst = max(worst, np.abs(A @ B - B @ A).max() / (np.abs(A).max() * np.abs(B).max()))
    return float(worst)


def diagnostics(model: TransformedModel, k_grid, r_grid):
    """Coupling-triviality, low-energy and threshold diagnostics as a dict."""
    k_grid = np.asarray(k_grid, dtype=float)
    r_grid = np.asarray(r_grid, dtype=float)
    if k_grid.size == 0 or r_grid.size == 0:
        raise ValidationError("diagnostics needs nonempty grids")
    rep = {}
    S, d1, d2, eps, flag = sweep_model(model, k_grid)
    good = eps[~flag]
    rep["epsilon_variance"] = float(np.var(good)) if good.size else float("nan")
    rep["epsilon_degenerate_points"] = int(flag.sum())
    rep["s_trivially_coupled"] = bool(rep["epsilon_variance"] < 1e-12)
    V = model.potential(r_grid)
    sigma = V[:, 0, 1] / (V[:, 1, 1] - V[:, 0, 0])
    rep["sigma_variance"] = float(np.var(sigma))
    rep["sigma_relative_variation"] = float((sigma.max() - sigma.min()) / max(np.abs(sigma).mean(), 1e-300))
    rep["v_trivially_coupled"] = bool(rep["sigma_relative_variation"] < 1e-8)
    rep["jost_commutator"] = jost_commutator(model, np.linspace(0.3, 3.0, 5))
    rep["jost_trivially_coupled"] = bool(rep["jost_commutator"] < 1e-10)

    k_low = np.geomspace(1e-3, 1e-2, 25)
    _, l1d1, l1d2, l_eps, _ = sweep_model(model, k_low)
    chans = model.diagonal.channels
    if all(c.l == 0 for c in chans) and all(lt == 0 for lt in model.l_tilde):
        a_in = [channel_scattering_length(c) for c in chans]
        a_out = scattering_lengths(np.stack([l1d1, l1d2], axis=1), k_low).tolist()
        rep["scattering_lengths_in"] = a_in
        rep["scattering_lengths_out"] = a_out
        rep["kappa_for_zero_mixing"] = float(kappa_for_zero_mixing(a_in[0], a_in[1], model.params.q))
    l1, l2 = (int(v) for v in model.diagonal.l)
    rep["case"] = classify_case(l1, l2)
    rep["ere_expected_exponent"] = abs(l2 - l1)
    if np.all(np.abs(l_eps) > 0):
        rep["ere_epsilon_exponent"] = power_law_exponent(k_low, l_eps)
    rep["epsilon_at_low_k"] = float(l_eps[0])
    delta0 = [c.phase_shift(np.array([1e-9]))[0] for c in chans]
    Delta0 = delta0[1] - delta0[0]
    rep["Delta0"] = float(Delta0)
    rep["Delta0_half_integer_pi"] = bool(abs(np.cos(Delta0)) < 1e-6)
    return rep
