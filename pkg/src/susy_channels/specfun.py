"""
Closed-form special functions and Wronskian machinery.

Riccati-Hankel functions are evaluated from their finite polynomial form
(integer ``l`` only), which stays exact on the imaginary axis.  Seed
solutions supply analytic derivative towers, always scaled by their
dominant exponential so that Wronskians of many seeds do not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial
from typing import Callable, NamedTuple, Sequence

import mpmath as mp
import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ContractError, DomainError, ValidationError

__all__ = [
    "hankel_coefficients",
    "riccati_hankel",
    "riccati_hankel_reduced",
    "double_factorial",
    "ScaledWronskian",
    "wronskian",
    "SeedSolution",
    "SinhNode",
    "ExpCombo",
    "TanhShifted",
    "HankelDecay",
    "PlaneWave",
]


def double_factorial(n: int) -> int:
    """n!! with the conventions (-1)!! = 0!! = 1."""
    if n <= 0:
        return 1
    out = 1
    for m in range(n, 0, -2):
        out *= m
    return out


def hankel_coefficients(l: int) -> np.ndarray:
    """Coefficients c_m of h_l(z) = e^{iz} sum_m c_m z^{-m}."""
    if l < 0 or int(l) != l:
        raise DomainError(f"l must be a nonnegative integer, got {l!r}")
    l = int(l)
    return np.array(
        [factorial(l + m) / (factorial(m) * factorial(l - m)) * (0.5j) ** m
         for m in range(l + 1)],
        dtype=complex,
    )


def riccati_hankel_reduced(l: int, z):
    """Return p(z) = h_l(z) e^{-iz} and dp/dz.

    p is a polynomial in 1/z, so this stays bounded for complex z where
    e^{iz} itself would overflow.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("riccati_hankel is singular at z = 0")
    c = hankel_coefficients(l)
    zi = 1.0 / z
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    # Horner in 1/z
    for m in range(len(c) - 1, -1, -1):
        p = p * zi + c[m]
    for m in range(len(c) - 1, 0, -1):
        dp = dp * zi - m * c[m]
    dp = dp * zi * zi
    return p, dp


def riccati_hankel(l: int, z):
    """Riccati-Hankel function h_l(z) = i^{l+1} (pi z / 2)^{1/2} H^{(1)}_{l+1/2}(z).

    Parameters
    ----------
    l : int
        Angular momentum, ``l >= 0``.
    z : complex or array_like
        Argument, must be nonzero.

    Returns
    -------
    value, d_dz : complex ndarray
        h_l(z) and its derivative with respect to z.
    """
    z = np.asarray(z, dtype=complex)
    p, dp = riccati_hankel_reduced(l, z)
    e = np.exp(1j * z)
    return p * e, (1j * p + dp) * e


# ---------------------------------------------------------------------------
# Wronskians


class ScaledWronskian(NamedTuple):
    """Wronskian stored as ``scaled * exp(log_scale)``."""

    scaled: np.ndarray
    log_scale: np.ndarray

    @property
    def value(self):
        return self.scaled * np.exp(self.log_scale)


TowerFn = Callable[[np.ndarray, int], tuple]


def wronskian(fns: Sequence, r) -> ScaledWronskian:
    """Wronskian of n functions with analytic derivative towers.

    Each entry of ``fns`` is either a :class:`SeedSolution` (or anything with
    a ``tower(r, order)`` method) or a callable ``(r, order) -> (tower,
    log_scale)`` where ``tower[m]`` is the scaled m-th derivative.  Every
    column is scaled by its own exponential; the log scales add up.
    """
    n = len(fns)
    if n == 0:
        raise ContractError("wronskian needs at least one function")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("wronskian is evaluated at r > 0 only")
    cols = []
    log_scale = np.zeros_like(r)
    for f in fns:
        tower_fn = f.tower if hasattr(f, "tower") else f
        tower, ls = tower_fn(r, n - 1)
        tower = np.asarray(tower)
        if tower.shape[0] < n:
            raise ContractError(
                f"function supplied {tower.shape[0] - 1} derivatives, "
                f"{n - 1} required")
        cols.append(tower[:n])
        log_scale = log_scale + ls
    # shape (..., n, n): row m = m-th derivatives, column j = function j
    mat = np.stack(cols, axis=-1)  # (n, ..., n)
    mat = np.moveaxis(mat, 0, -2)
    det = np.linalg.det(mat)
    return ScaledWronskian(det, log_scale)


# ---------------------------------------------------------------------------
# Seed solutions


@dataclass(frozen=True)
class SeedSolution:
    """Real solution of a one-channel equation at energy -kappa**2.

    ``growth`` is +1 when the seed grows like e^{kappa r} and -1 when it
    decays.  Towers are returned multiplied by e^{-growth kappa r}.
    """

    kappa: float

    growth = 1

    def tower(self, r, order: int):
        raise NotImplementedError

    def log_scale(self, r):
        return self.growth * self.kappa * np.asarray(r, dtype=float)

    def scaled_mp(self, r):
        """Scaled value and derivative at one radius, in mpmath precision."""
        raise NotImplementedError

    def scaled(self, r):
        """Scaled value and first derivative."""
        t, _ = self.tower(r, 1)
        return t[0], t[1]

    def __call__(self, r):
        t, ls = self.tower(r, 1)
        e = np.exp(ls)
        return t[0] * e, t[1] * e


def _hyp_towers(kappa, r, order):
    """Scaled towers of sinh and cosh, both multiplied by e^{-kappa r}."""
    em = np.exp(-2.0 * kappa * r)
    s = 0.5 * (1.0 - em)
    c = 0.5 * (1.0 + em)
    sinh_t = [kappa ** m * (s if m % 2 == 0 else c) for m in range(order + 1)]
    cosh_t = [kappa ** m * (c if m % 2 == 0 else s) for m in range(order + 1)]
    return np.array(sinh_t), np.array(cosh_t)


@dataclass(frozen=True)
class SinhNode(SeedSolution):
    """sinh(kappa r): vanishes at the origin, grows like e^{kappa r}/2."""

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError(f"kappa must be positive, got {self.kappa}")

    def tower(self, r, order):
        r = np.asarray(r, dtype=float)
        s, _ = _hyp_towers(self.kappa, r, order)
        return s, self.log_scale(r)

    def scaled_mp(self, r):
        k = mp.mpf(self.kappa)
        em = mp.exp(-2 * k * r)
        return (1 - em) / 2, k * (1 + em) / 2


@dataclass(frozen=True)
class ExpCombo(SeedSolution):
    """e^{kappa r} + beta e^{-kappa r}; beta = 1 gives 2 cosh, beta = -1 gives 2 sinh."""

    beta: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError(f"kappa must be positive, got {self.kappa}")

    def tower(self, r, order):
        r = np.asarray(r, dtype=float)
        em = np.exp(-2.0 * self.kappa * r)
        t = [self.kappa ** m * (1.0 + (-1) ** m * self.beta * em)
             for m in range(order + 1)]
        return np.array(t), self.log_scale(r)

    def scaled_mp(self, r):
        k = mp.mpf(self.kappa)
        em = mp.exp(-2 * k * r)
        return 1 + self.beta * em, k * (1 - self.beta * em)


@dataclass(frozen=True)
class TanhShifted(SeedSolution):
    """kappa sinh(kappa r) - kappa0 cosh(kappa r) tanh(kappa0 r).

    Regular solution at energy -kappa**2 of the potential
    -2 kappa0**2 / cosh(kappa0 r)**2.
    """

    kappa0: float = 1.0

    def __post_init__(self):
        if not (self.kappa > 0 and self.kappa0 > 0):
            raise ValidationError("kappa and kappa0 must be positive")

    def _tanh_tower(self, r, order):
        # d^m tanh as polynomials in T: P_{m+1} = kappa0 (1 - T^2) P_m'
        T = np.tanh(self.kappa0 * r)
        poly = np.array([0.0, 1.0])
        out = []
        for _ in range(order + 1):
            out.append(P.polyval(T, poly))
            poly = self.kappa0 * P.polymul([1.0, 0.0, -1.0], P.polyder(poly))
        return out

    def tower(self, r, order):
        r = np.asarray(r, dtype=float)
        s, c = _hyp_towers(self.kappa, r, order)
        T = self._tanh_tower(r, order)
        t = []
        for m in range(order + 1):
            ct = sum(comb(m, j) * c[j] * T[m - j] for j in range(m + 1))
            t.append(self.kappa * s[m] - self.kappa0 * ct)
        return np.array(t), self.log_scale(r)


@dataclass(frozen=True)
class HankelDecay(SeedSolution):
    """h_l(i kappa r), real and decaying like e^{-kappa r}."""

    l: int = 0

    growth = -1

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError(f"kappa must be positive, got {self.kappa}")

    def tower(self, r, order):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("HankelDecay is singular at r = 0")
        # v e^{kappa r} = sum_m a_m r^{-m}
        c = hankel_coefficients(self.l)
        a = np.array([(c[m] * (1j * self.kappa) ** (-m)).real
                      for m in range(len(c))])
        t = []
        for _ in range(order + 1):
            t.append(sum(a[m] * r ** (-m) for m in range(len(a))))
            # d/dr [e^{-kr} sum a_m r^-m] = e^{-kr} sum (-k a_m - (m-1) a_{m-1}) r^-m
            nxt = np.zeros(len(a) + 1)
            nxt[: len(a)] -= self.kappa * a
            nxt[1:] -= np.arange(len(a)) * a
            a = nxt
        return np.array(t), self.log_scale(r)

    def scaled_mp(self, r):
        c = hankel_coefficients(self.l)
        k = mp.mpf(self.kappa)
        x = k * r
        v = mp.mpf(0)
        dv = mp.mpf(0)
        for m in range(len(c)):
            am = mp.mpf((c[m] * 1j ** (-m)).real)
            v += am * x ** (-m)
            dv += -am * m * x ** (-m - 1) * k
        return v, dv - k * v


@dataclass(frozen=True)
class PlaneWave:
    """e^{ikr} for real k; unit modulus so no scaling is applied."""

    k: complex

    def tower(self, r, order):
        r = np.asarray(r, dtype=float)
        e = np.exp(1j * self.k * r)
        return np.array([(1j * self.k) ** m * e for m in range(order + 1)]), \
            np.zeros_like(r)
