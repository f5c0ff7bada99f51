"""
Uncoupled one-channel models built from chains of Darboux transformations.

Every family is a chain of seed solutions applied to a base potential
(zero or pure centrifugal).  The chain is evaluated step by step with the
first-order operator ``L = w - d/dr``; second derivatives never appear
because ``w' = V + kappa**2 - w**2`` and ``(L g)' = (kappa**2 + E) g - w L g``.
All functions are carried with their dominant exponential divided out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .errors import DomainError, InconsistencyError, SingularityError, ValidationError
from .specfun import (
    ExpCombo,
    HankelDecay,
    SeedSolution,
    SinhNode,
    double_factorial,
    hankel_coefficients,
    riccati_hankel_reduced,
)

_MP_DPS = 40

__all__ = [
    "RationalJost",
    "OneChannelModel",
    "FAMILIES",
    "build_family",
    "beta_family",
    "cosech",
    "sp_s",
    "centrifugal",
    "sd_s",
    "sd_d",
    "jost_from_limit",
]


@dataclass(frozen=True)
class RationalJost:
    """F(k) = prefactor * prod(k - zeros) / prod(k - poles)."""

    prefactor: complex
    zeros: tuple = ()
    poles: tuple = ()

    def __post_init__(self):
        for z in self.zeros:
            if any(abs(z - p) < 1e-14 for p in self.poles):
                raise ValidationError(f"zero {z} coincides with a pole")

    def __call__(self, k):
        k = np.asarray(k, dtype=complex)
        num = np.full_like(k, self.prefactor)
        for z in self.zeros:
            num = num * (k - z)
        den = np.ones_like(k)
        for p in self.poles:
            den = den * (k - p)
        if np.any(den == 0):
            raise DomainError("k is a pole of the Jost function")
        return num / den

    def arg_continuous(self, k):
        """arg F(k) for real k > 0 as a sum of factor arguments.

        Each factor arg(k - c) is continuous for k > 0 when c lies on the
        imaginary axis and tends to 0 as k -> infinity.
        """
        k = np.asarray(k, dtype=float)
        out = np.zeros_like(k)
        for z in self.zeros:
            out = out + np.angle(k - z)
        for p in self.poles:
            out = out - np.angle(k - p)
        return out + np.angle(self.prefactor)


@dataclass(frozen=True)
class _Chain:
    base_l: int
    seeds: tuple  # SeedSolution instances, solutions of the base equation
    r_mp: float = 0.15  # below this radius the recursion runs in mpmath

    def base(self, r, k=None):
        """Base potential and, when k is given, scaled base Jost solution."""
        V = self.base_l * (self.base_l + 1) / r ** 2 if self.base_l else np.zeros_like(r)
        if k is None:
            return V, None, None
        if self.base_l == 0:
            G = np.ones(r.shape, dtype=complex)
            Gp = 1j * k * G
        else:
            p, dp = riccati_hankel_reduced(self.base_l, k * r)
            G = p
            Gp = 1j * k * p + k * dp
        return V, G, Gp

    def evaluate_mp(self, r, k=None, raw=False):
        """Same recursion at one radius in extended precision.

        With ``raw=True`` the mpmath numbers are returned unconverted.
        """
        with mp.workdps(_MP_DPS):
            r = mp.mpf(r)
            l = self.base_l
            V = l * (l + 1) / r ** 2
            G = Gp = E = None
            if k is not None:
                k = mp.mpc(k)
                E = k ** 2
                if l == 0:
                    G, Gp = mp.mpc(1), 1j * k
                else:
                    c = hankel_coefficients(l)
                    z = k * r
                    G = sum(mp.mpc(c[m]) * z ** (-m) for m in range(l + 1))
                    dp = sum(-m * mp.mpc(c[m]) * z ** (-m - 1) for m in range(1, l + 1))
                    Gp = 1j * k * G + k * dp
            seeds = [list(s.scaled_mp(r)) for s in self.seeds]
            kappas = [mp.mpf(s.kappa) for s in self.seeds]
            steps = []
            for n, kn in enumerate(kappas):
                u, up = seeds[n]
                w = up / u
                steps.append(u)
                for m in range(n + 1, len(seeds)):
                    g, gp = seeds[m]
                    gt = w * g - gp
                    seeds[m] = [gt, (kn ** 2 - kappas[m] ** 2) * g - w * gt]
                if k is not None:
                    gt = w * G - Gp
                    norm = self.seeds[n].growth * kn - 1j * k
                    G, Gp = gt / norm, ((kn ** 2 + E) * G - w * gt) / norm
                V = -V - 2 * kn ** 2 + 2 * w ** 2
            if raw:
                return V, G, Gp, steps
            cast = lambda x: None if x is None else complex(x)
            return float(V), cast(G), cast(Gp), [float(u) for u in steps]

    def evaluate(self, r, k=None, want_steps=False):
        r = np.asarray(r, dtype=float)
        out = self._evaluate_float(r, k)
        small = r < self.r_mp if self.needs_mp else np.zeros(r.shape, bool)
        if np.any(small):
            V, G, Gp, steps = (np.array(x, copy=True) if x is not None else None for x in out)
            idx = np.nonzero(small)
            for i in zip(*idx):
                v, g, gp, st = self.evaluate_mp(float(r[i]), k)
                V[i] = v
                if k is not None:
                    G[i], Gp[i] = g, gp
                for n, u in enumerate(st):
                    steps[n][i] = u
            out = (V, G, Gp, steps)
        return out if want_steps else out[:3]

    @property
    def needs_mp(self):
        # only chains with at least two seeds cancel catastrophically near 0
        return len(self.seeds) >= 2 or (self.base_l > 0 and len(self.seeds) > 0)

    def _evaluate_float(self, r, k=None):
        V, G, Gp = self.base(r, k)
        E = None if k is None else complex(k) ** 2
        seeds = [list(s.scaled(r)) for s in self.seeds]
        kappas = [s.kappa for s in self.seeds]
        steps = []
        for n, kn in enumerate(kappas):
            u, up = seeds[n]
            w = up / u
            steps.append(u)
            for m in range(n + 1, len(seeds)):
                g, gp = seeds[m]
                gt = w * g - gp
                seeds[m] = [gt, (kn ** 2 - kappas[m] ** 2) * g - w * gt]
            if k is not None:
                gt = w * G - Gp
                norm = self.seeds[n].growth * kn - 1j * k
                G, Gp = gt / norm, ((kn ** 2 + E) * G - w * gt) / norm
            V = -V - 2.0 * kn ** 2 + 2.0 * w ** 2
        return V, G, Gp, np.array(steps) if steps else np.zeros((0,) + r.shape)


@dataclass(frozen=True)
class OneChannelModel:
    """An uncoupled channel: potential, Jost solution and Jost function.

    Attributes
    ----------
    family : str
        Constructor name.
    params : dict
        Constructor parameters.
    l, nu : int
        Asymptotic partial wave and origin singularity index.
    jost : RationalJost
        Closed-form Jost function.
    """

    family: str
    params: dict
    l: int
    nu: int
    jost: RationalJost
    chain: _Chain = field(repr=False)
    checks: dict = field(default_factory=dict, compare=False, repr=False)

    def potential(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("potential is evaluated at r > 0 only")
        return self.chain.evaluate(r)[0]

    def jost_scaled(self, k, r):
        """f(k, r) e^{-ikr} and f'(k, r) e^{-ikr}."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("Jost solution is evaluated at r > 0 only")
        k = complex(k)
        if k == 0:
            raise DomainError("Jost solution at k = 0 is not supported")
        _, G, Gp = self.chain.evaluate(r, k)
        return G, Gp

    def jost_solution(self, k, r):
        """Return f(k, r) and df/dr."""
        G, Gp = self.jost_scaled(k, r)
        e = np.exp(1j * complex(k) * np.asarray(r, dtype=float))
        return G * e, Gp * e

    def jost_function(self, k):
        return self.jost(k)

    def phase_shift(self, k):
        """Continuous phase shift -arg F(k) + l pi/2 for real k > 0.

        The branch is fixed by the large-k limit (l - nu) pi/2 reduced
        to {0, pi/2}.
        """
        k = np.asarray(k, dtype=float)
        d = -(self.jost.arg_continuous(k) - np.angle(self.jost.prefactor))
        return d + ((self.l - self.nu) % 2) * np.pi / 2

    def s_matrix(self, k):
        k = np.asarray(k, dtype=complex)
        return (-1) ** self.l * self.jost(-k) / self.jost(k)


# ---------------------------------------------------------------------------
# construction and self-checks

_R_SCAN = np.geomspace(1e-3, 50.0, 2000)


def _scan_nodes(chain: _Chain, family: str):
    _, _, _, steps = chain.evaluate(_R_SCAN, want_steps=True)
    for n, u in enumerate(steps):
        s = np.sign(u)
        flips = np.nonzero(s[1:] * s[:-1] <= 0)[0]
        if flips.size:
            r0 = float(_R_SCAN[flips[0]])
            raise SingularityError(
                f"{family}: singular potential, Wronskian node near r={r0:.4g} "
                f"(chain step {n})", r=r0)


def jost_from_limit(model: OneChannelModel, k, radii=(1e-2, 1e-3, 1e-4), tol=1e-6):
    """F(k) = lim_{r->0} f(k, r) r^nu / (2 nu - 1)!!, by Richardson extrapolation.

    The correction to the leading term is O(r^2) at worst, so the samples are
    extrapolated as a polynomial in r.
    """
    radii = np.asarray(radii, dtype=float)
    f, _ = model.jost_solution(k, radii)
    vals = f * radii ** model.nu / double_factorial(2 * model.nu - 1)
    # Neville in r
    tab = list(vals)
    xs = list(radii)
    n = len(tab)
    est = [tab[-1]]
    for j in range(1, n):
        for i in range(n - j):
            tab[i] = (xs[i + j] * tab[i] - xs[i] * tab[i + 1]) / (xs[i + j] - xs[i])
        est.append(tab[n - j - 1])
    spread = abs(est[-1] - est[-2])
    scale = max(abs(est[-1]), 1e-300)
    if spread > tol * scale:
        raise InconsistencyError(
            f"{model.family}: Jost limit did not converge (spread {spread:.3g})")
    return complex(est[-1])


def _finalize(family, params, l, nu, jost, chain, k_check=1.3):
    _scan_nodes(chain, family)
    model = OneChannelModel(family, dict(params), l, nu, jost, chain)
    checks = model.checks
    r_small = np.array([1e-3, 1e-4])
    V = model.potential(r_small)
    checks["origin_r2V"] = (r_small ** 2 * V).tolist()
    if np.max(np.abs(r_small ** 2 * V - nu * (nu + 1))) > 1e-2 * max(1, nu * (nu + 1)):
        raise InconsistencyError(f"{family}: r^2 V(r) does not approach nu(nu+1)={nu * (nu + 1)}")
    G, _ = model.jost_scaled(k_check, np.array([30.0, 60.0]))
    checks["asymptotic_unit"] = np.abs(G - 1).tolist()
    if abs(G[-1] - 1) > 1.5 * l * (l + 1) / (2 * k_check * 60) + 1e-8:
        raise InconsistencyError(f"{family}: Jost solution is not normalized to e^(ikr)")
    lim = jost_from_limit(model, k_check)
    ref = complex(jost(k_check))
    checks["jost_limit_relerr"] = abs(lim - ref) / abs(ref)
    if checks["jost_limit_relerr"] > 1e-6:
        raise InconsistencyError(
            f"{family}: Jost limit {lim} disagrees with closed form {ref}")
    return model


def beta_family(kappa0: float, kappa1: float, kappa2: float, beta: float) -> OneChannelModel:
    """-2 (ln W[sinh k0 r, sinh k2 r, e^{k1 r} + beta e^{-k1 r}])''.

    For ``beta < -1`` there is one bound state at k = i kappa1 and
    ``nu = 1``; ``beta = -1`` turns the last seed into a sinh, giving
    ``nu = 3`` and no bound state.
    """
    if not (0 < kappa0 and 0 < kappa1 and 0 < kappa2):
        raise ValidationError("beta_family: all kappa must be positive")
    if beta < -1:
        if not kappa0 < kappa1 < kappa2:
            raise ValidationError("beta_family: requires kappa0 < kappa1 < kappa2 for beta < -1")
        jost = RationalJost(1j, (1j * kappa1,), (-1j * kappa0, -1j * kappa2))
        nu = 1
    elif beta == -1:
        if len({kappa0, kappa1, kappa2}) < 3:
            raise ValidationError("beta_family: kappa values must be distinct")
        jost = RationalJost(-1j, (), (-1j * kappa0, -1j * kappa1, -1j * kappa2))
        nu = 3
    else:
        raise ValidationError("beta_family: requires beta < -1 or beta == -1")
    chain = _Chain(0, (SinhNode(kappa0), SinhNode(kappa2), ExpCombo(kappa1, beta)))
    params = dict(kappa0=kappa0, kappa1=kappa1, kappa2=kappa2, beta=beta)
    return _finalize("beta_family", params, 0, nu, jost, chain)


def cosech(kappa: float) -> OneChannelModel:
    """2 kappa^2 cosech^2(kappa r); F(k) = 1 / (kappa - i k)."""
    if not kappa > 0:
        raise ValidationError("cosech: kappa must be positive")
    jost = RationalJost(1j, (), (-1j * kappa,))
    return _finalize("cosech", dict(kappa=kappa), 0, 1, jost, _Chain(0, (SinhNode(kappa),)))


def sp_s(kappa0: float, kappa1: float) -> OneChannelModel:
    """-2 (ln W[sinh k0 r, sinh k1 r])'';  F(k) = -1 / ((k + i k0)(k + i k1))."""
    if not (kappa0 > 0 and kappa1 > 0) or kappa0 == kappa1:
        raise ValidationError("sp_s: kappa0, kappa1 must be positive and distinct")
    jost = RationalJost(-1.0, (), (-1j * kappa0, -1j * kappa1))
    chain = _Chain(0, (SinhNode(kappa0), SinhNode(kappa1)))
    return _finalize("sp_s", dict(kappa0=kappa0, kappa1=kappa1), 0, 2, jost, chain)


def centrifugal(l: int) -> OneChannelModel:
    """Pure centrifugal barrier l(l+1)/r^2 with f = h_l(kr), F = (i/k)^l."""
    if l < 1 or int(l) != l:
        raise ValidationError("centrifugal: l must be a positive integer")
    l = int(l)
    jost = RationalJost(1j ** l, (), (0.0,) * l)
    return _finalize("centrifugal", dict(l=l), l, l, jost, _Chain(l, ()))


def sd_s(kappa0: float, kappa1: float, kappa2: float, kappa3: float) -> OneChannelModel:
    """-2 kappa0^2 / cosh^2(kappa0 r) dressed by three regular seeds.

    Equivalent to the chain cosh(kappa_j r), j = 0..3, from the zero
    potential; F(k) = -i k / prod_j (k + i kappa_j), with a zero-energy
    virtual state.
    """
    ks = (kappa0, kappa1, kappa2, kappa3)
    if min(ks) <= 0 or len(set(ks)) < 4:
        raise ValidationError("sd_s: kappas must be positive and distinct")
    jost = RationalJost(-1j, (0.0,), tuple(-1j * kj for kj in ks))
    chain = _Chain(0, tuple(ExpCombo(kj, 1.0) for kj in ks))
    params = dict(kappa0=kappa0, kappa1=kappa1, kappa2=kappa2, kappa3=kappa3)
    return _finalize("sd_s", params, 0, 3, jost, chain)


def sd_d(kappa4: float) -> OneChannelModel:
    """6/r^2 - 2 (ln h_2(i kappa4 r))''; F(k) = (i k - kappa4) / k^2."""
    if not kappa4 > 0:
        raise ValidationError("sd_d: kappa4 must be positive")
    jost = RationalJost(1j, (-1j * kappa4,), (0.0, 0.0))
    chain = _Chain(2, (HankelDecay(kappa4, 2),))
    return _finalize("sd_d", dict(kappa4=kappa4), 2, 1, jost, chain)


FAMILIES = {
    "beta_family": beta_family,
    "cosech": cosech,
    "sp_s": sp_s,
    "centrifugal": centrifugal,
    "sd_s": sd_s,
    "sd_d": sd_d,
}


def build_family(family: str, **params) -> OneChannelModel:
    try:
        ctor = FAMILIES[family]
    except KeyError:
        raise ValidationError(f"unknown family {family!r}; known: {sorted(FAMILIES)}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise ValidationError(f"{family}: bad parameters {params}: {exc}") from None
