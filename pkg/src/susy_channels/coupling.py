"""
Coupling transformation of a diagonal two-channel potential.

The transformation function is built from the channel Jost solutions at
imaginary wavenumber,

    u_c(r) = f_d(-i kappa, r) C + f_d(i kappa, r) D,

and the transformed potential is V_c = V_d - 2 w_c' with w_c = u_c' u_c^{-1}.
Columns of u_c grow like e^{kappa r} and decay like e^{-kappa r}; every
evaluation carries them rescaled by diag(e^{-kappa r}, e^{kappa r}), which
leaves w_c unchanged and keeps all entries of order one.

The algebraic objects (C, D, w_infinity) are available for any number of
channels; potentials are evaluated for two channels only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .errors import DomainError, SingularityError, ValidationError
from .onechannel import _MP_DPS, OneChannelModel

__all__ = [
    "CouplingParams",
    "DiagonalModel",
    "TransformedModel",
    "canonical_cd",
    "w_infinity",
    "transformation_function",
    "superpotential",
    "transformed_potential",
    "singularity_scan",
]

DET_THRESHOLD = 1e-12


@dataclass(frozen=True)
class CouplingParams:
    """Factorization wavenumber and mixing data.

    Two channels use ``q`` and ``x``; the general form uses ``M``, ``Q``
    ((N-M) x M) and the symmetric nonsingular ``X0`` (M x M).
    """

    kappa: float
    q: float = 0.0
    x: float = 1.0
    M: int | None = None
    Q: tuple | None = None
    X0: tuple | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError(f"kappa must be positive, got {self.kappa}")
        if self.M is None and self.x == 0:
            raise ValidationError("x must be nonzero (X0 nonsingular)")

    @property
    def alpha(self) -> float:
        return 2.0 * np.arctan(self.q)

    @property
    def is_general(self) -> bool:
        return self.M is not None

    def blocks(self, N: int = 2):
        """Return (M, Q, X0) as arrays."""
        if self.M is None:
            if N != 2:
                raise ValidationError("q/x parameters describe two channels only")
            return 1, np.array([[self.q]], float), np.array([[self.x]], float)
        M = int(self.M)
        if not 0 <= M <= N:
            raise ValidationError(f"M={M} outside [0, {N}]")
        Q = np.zeros((N - M, M)) if self.Q is None else np.asarray(self.Q, float)
        X0 = np.eye(M) if self.X0 is None else np.asarray(self.X0, float)
        if Q.size != (N - M) * M or X0.size != M * M:
            raise ValidationError(f"Q must be ({N - M}, {M}) and X0 ({M}, {M})")
        Q, X0 = Q.reshape(N - M, M), X0.reshape(M, M)
        if not np.allclose(X0, X0.T):
            raise ValidationError("X0 must be symmetric")
        if M and abs(np.linalg.det(X0)) < 1e-14:
            raise ValidationError("X0 must be nonsingular")
        return M, Q, X0


def canonical_cd(params: CouplingParams, N: int = 2):
    """Canonical (C, D) with maximal freedom and D^T C = C^T D."""
    M, Q, X0 = params.blocks(N)
    C = np.zeros((N, N))
    D = np.zeros((N, N))
    C[:M, :M] = np.eye(M)
    C[M:, :M] = Q
    D[:M, :M] = X0
    D[:M, M:] = -Q.T
    D[M:, M:] = np.eye(N - M)
    return C, D


def w_infinity(params: CouplingParams, N: int = 2) -> np.ndarray:
    """Limit of the superpotential at infinity: kappa A diag(I_M, -I_{N-M}) A^{-1}."""
    M, Q, _ = params.blocks(N)
    A = np.eye(N)
    A[:M, M:] = -Q.T
    A[M:, :M] = Q
    sign = np.diag([1.0] * M + [-1.0] * (N - M))
    w = params.kappa * A @ sign @ np.linalg.inv(A)
    return 0.5 * (w + w.T)


@dataclass(frozen=True)
class DiagonalModel:
    """N uncoupled channels."""

    channels: tuple

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def N(self) -> int:
        return len(self.channels)

    @property
    def l(self) -> np.ndarray:
        return np.array([c.l for c in self.channels])

    @property
    def nu(self) -> np.ndarray:
        return np.array([c.nu for c in self.channels])

    def jost_diagonal(self, k):
        """Diagonal entries F_{d;j}(k), shape (..., N)."""
        return np.stack([c.jost(k) for c in self.channels], axis=-1)

    def jost_matrix(self, k):
        d = self.jost_diagonal(k)
        return d[..., :, None] * np.eye(self.N)

    def potential(self, r):
        return np.stack([c.potential(r) for c in self.channels], axis=-1)


def _adj2(U):
    out = np.empty_like(U)
    out[..., 0, 0] = U[..., 1, 1]
    out[..., 1, 1] = U[..., 0, 0]
    out[..., 0, 1] = -U[..., 0, 1]
    out[..., 1, 0] = -U[..., 1, 0]
    return out


def _det2(U):
    return U[..., 0, 0] * U[..., 1, 1] - U[..., 0, 1] * U[..., 1, 0]


@dataclass(frozen=True)
class TransformedModel:
    """Two-channel potential obtained by the coupling transformation.

    Construction validates the parameters and, unless ``scan=False``,
    rejects parameter sets whose transformation function has a node on
    (0, 50].
    """

    diagonal: DiagonalModel
    params: CouplingParams
    override_physics_checks: bool = False
    scan: bool = True
    l_tilde: tuple = field(init=False)
    nu_tilde: tuple = field(init=False)
    warnings: list = field(init=False, default_factory=list, compare=False)

    def __post_init__(self):
        if not isinstance(self.diagonal, DiagonalModel):
            object.__setattr__(self, "diagonal", DiagonalModel(tuple(self.diagonal)))
        diag = self.diagonal
        p = self.params
        if diag.N != 2 or p.is_general:
            raise ValidationError("potential-level evaluation is implemented for two channels with (q, x) only")
        l1, l2 = (int(v) for v in diag.l)
        problems = []
        if np.any(diag.nu < 1):
            problems.append(f"coupling needs nu > 0 in every channel, got nu={tuple(diag.nu)}")
        swap = l1 != l2 and abs(abs(p.q) - 1.0) < 1e-12
        if l1 != l2 and not swap:
            msg = (f"l=({l1},{l2}) differ: q must be +-1 for centrifugal tails, got q={p.q}")
            if self.override_physics_checks:
                self.warnings.append(msg)
            else:
                problems.append(msg)
        kap = p.kappa
        for c in diag.channels:
            for kk in (1j * kap, -1j * kap):
                if any(abs(kk - pole) < 1e-12 for pole in c.jost.poles):
                    problems.append(f"{c.family}: F_d has a pole at k={kk}")
        if not problems:
            Fp = diag.jost_diagonal(1j * kap)
            Fm = diag.jost_diagonal(-1j * kap)
            if np.any(np.abs(Fp) < 1e-14):
                problems.append("det F_d(i kappa) = 0: bound state at the factorization energy")
            else:
                C, D = canonical_cd(p)
                nondeg = np.linalg.det(np.diag(Fm / Fp) @ C + D)
                if abs(nondeg) < 1e-12:
                    problems.append("transformation function is not singular at the origin in every column")
        if problems:
            raise ValidationError("; ".join(problems), problems)
        lt = (l2, l1) if swap else (l1, l2)
        object.__setattr__(self, "l_tilde", lt)
        object.__setattr__(self, "nu_tilde", tuple(int(v) - 1 for v in diag.nu))
        if self.scan:
            bad = singularity_scan(self, 50.0, 10_000)
            if bad:
                raise SingularityError(
                    f"transformation function has {len(bad)} node(s), first in "
                    f"r in [{bad[0][0]:.4g}, {bad[0][1]:.4g}]; increase x", r=bad[0][0])

    @property
    def kappa(self) -> float:
        return self.params.kappa

    @property
    def w_infinity(self) -> np.ndarray:
        return w_infinity(self.params)

    # -- field evaluation ------------------------------------------------

    def _channel_data(self, r):
        kap = self.kappa
        Vd, Gm, Gmp, Gp, Gpp = [], [], [], [], []
        for c in self.diagonal.channels:
            V, g, gp = c.chain.evaluate(r, -1j * kap)
            _, h, hp = c.chain.evaluate(r, 1j * kap)
            Vd.append(V)
            Gm.append(g.real)
            Gmp.append(gp.real)
            Gp.append(h.real)
            Gpp.append(hp.real)
        return Vd, Gm, Gmp, Gp, Gpp

    def scaled_u(self, r):
        """Scaled u_c and u_c' (columns times e^{-kappa r}, e^{kappa r}) and V_d."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("transformation function is singular at r = 0")
        q, x = self.params.q, self.params.x
        Vd, Gm, Gmp, Gp, Gpp = self._channel_data(r)
        e2 = np.exp(-2.0 * self.kappa * r)
        U = np.empty(r.shape + (2, 2))
        Up = np.empty(r.shape + (2, 2))
        # f(-i kappa) = Gm e^{kappa r}, f(i kappa) = Gp e^{-kappa r}
        U[..., 0, 0] = Gm[0] + x * Gp[0] * e2
        U[..., 0, 1] = -q * Gp[0]
        U[..., 1, 0] = q * Gm[1]
        U[..., 1, 1] = Gp[1]
        Up[..., 0, 0] = Gmp[0] + x * Gpp[0] * e2
        Up[..., 0, 1] = -q * Gpp[0]
        Up[..., 1, 0] = q * Gmp[1]
        Up[..., 1, 1] = Gpp[1]
        return U, Up, np.stack(Vd, axis=-1)

    @property
    def r_mp(self) -> float:
        """Radius below which w_c and V_c are formed in extended precision."""
        if any(c.chain.needs_mp for c in self.diagonal.channels):
            return max(c.chain.r_mp for c in self.diagonal.channels)
        return 0.02

    def _w_mp(self, r):
        """w_c, V_d and the scaled u_c at one radius, all in mpmath."""
        q, x, kap = mp.mpf(self.params.q), mp.mpf(self.params.x), mp.mpf(self.kappa)
        with mp.workdps(_MP_DPS):
            rm = mp.mpf(r)
            data = []
            for c in self.diagonal.channels:
                V, g, gp, _ = c.chain.evaluate_mp(r, -1j * self.kappa, raw=True)
                _, h, hp, _ = c.chain.evaluate_mp(r, 1j * self.kappa, raw=True)
                data.append((V, mp.re(g), mp.re(gp), mp.re(h), mp.re(hp)))
            e2 = mp.exp(-2 * kap * rm)
            (V1, gm1, gmp1, gp1, gpp1), (V2, gm2, gmp2, gp2, gpp2) = data
            U = mp.matrix([[gm1 + x * gp1 * e2, -q * gp1], [q * gm2, gp2]])
            Up = mp.matrix([[gmp1 + x * gpp1 * e2, -q * gpp1], [q * gmp2, gpp2]])
            det = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
            adj = mp.matrix([[U[1, 1], -U[0, 1]], [-U[1, 0], U[0, 0]]])
            w = Up * adj / det
            w2 = w * w
            Vc = 2 * w2
            Vc[0, 0] -= V1 + 2 * kap ** 2
            Vc[1, 1] -= V2 + 2 * kap ** 2
            tofl = lambda M: np.array([[float(M[i, j]) for j in range(2)] for i in range(2)])
            return tofl(w), np.array([float(V1), float(V2)]), tofl(U), float(det), tofl(Vc)

    def _w(self, r, check=True, want_potential=False):
        r = np.asarray(r, dtype=float)
        if r.ndim == 0:
            return tuple(x[0] for x in self._w(r[None], check, want_potential))
        if np.any(r <= 0):
            raise DomainError("transformation function is singular at r = 0")
        small = r < self.r_mp
        w = np.empty(r.shape + (2, 2))
        U = np.empty(r.shape + (2, 2))
        Vd = np.empty(r.shape + (2,))
        det = np.empty(r.shape)
        Vc = np.empty(r.shape + (2, 2)) if want_potential else None
        big = ~small
        if np.any(big):
            Ub, Upb, Vdb = self.scaled_u(r[big])
            detb = _det2(Ub)
            if check:
                colscale = np.linalg.norm(Ub[..., :, 0], axis=-1) * np.linalg.norm(Ub[..., :, 1], axis=-1)
                bad = np.abs(detb) < DET_THRESHOLD * colscale
                if np.any(bad):
                    r0 = float(r[big][bad][0])
                    raise SingularityError(f"det u_c vanishes near r={r0:.6g}", r=r0)
            wb = Upb @ _adj2(Ub) / detb[..., None, None]
            w[big], U[big], Vd[big], det[big] = wb, Ub, Vdb, detb
            if want_potential:
                Vb = 2.0 * (wb @ wb)
                Vb[..., 0, 0] -= Vdb[..., 0] + 2.0 * self.kappa ** 2
                Vb[..., 1, 1] -= Vdb[..., 1] + 2.0 * self.kappa ** 2
                Vc[big] = Vb
        for i in zip(*np.nonzero(small)):
            wi, vdi, ui, di, vci = self._w_mp(float(r[i]))
            if check and abs(di) < DET_THRESHOLD * np.linalg.norm(ui[:, 0]) * np.linalg.norm(ui[:, 1]):
                raise SingularityError(f"det u_c vanishes near r={float(r[i]):.6g}", r=float(r[i]))
            w[i], Vd[i], U[i], det[i] = wi, vdi, ui, di
            if want_potential:
                Vc[i] = vci
        if want_potential:
            return w, Vd, U, det, Vc
        return w, Vd, U, det

    def transformation_function(self, r, scaled: bool = False):
        """u_c(r) and u_c'(r); ``scaled=True`` returns the rescaled columns."""
        U, Up, _ = self.scaled_u(r)
        if scaled:
            return U, Up
        r = np.asarray(r, dtype=float)
        s = np.stack([np.exp(self.kappa * r), np.exp(-self.kappa * r)], axis=-1)
        return U * s[..., None, :], Up * s[..., None, :]

    def superpotential(self, r):
        """w_c and w_c' = V_d + kappa^2 - w_c^2."""
        w, Vd, _, _ = self._w(r)
        wp = -w @ w
        wp[..., 0, 0] += Vd[..., 0] + self.kappa ** 2
        wp[..., 1, 1] += Vd[..., 1] + self.kappa ** 2
        return w, wp

    def potential(self, r):
        """V_c = V_d - 2 w_c' = 2 w_c^2 - V_d - 2 kappa^2."""
        *_, V = self._w(r, want_potential=True)
        return V

    def diagonal_potential(self, r):
        return self.diagonal.potential(np.asarray(r, dtype=float))

    def jost_solution(self, k, r):
        """Transformed Jost solution f_c = (w_c f_d - f_d') (w_inf - ik)^{-1}, and f_c'."""
        r = np.asarray(r, dtype=float)
        k = complex(k)
        w, Vd, _, _ = self._w(r)
        f = []
        fp = []
        for c in self.diagonal.channels:
            a, b = c.jost_solution(k, r)
            f.append(a)
            fp.append(b)
        fd = np.zeros(r.shape + (2, 2), complex)
        fdp = np.zeros(r.shape + (2, 2), complex)
        for j in range(2):
            fd[..., j, j] = f[j]
            fdp[..., j, j] = fp[j]
        inv = np.linalg.inv(self.w_infinity - 1j * k * np.eye(2))
        fc = (w @ fd - fdp) @ inv
        # (L f)' = w' f + w f' - f'' = (kappa^2 + k^2) f - w (L f)
        Lf = w @ fd - fdp
        fcp = ((self.kappa ** 2 + k ** 2) * fd - w @ Lf) @ inv
        return fc, fcp

    def bound_state_solution(self, r):
        """Phi = (u_c^T)^{-1}; first column is the bound state at -kappa^2."""
        U, _, _ = self.scaled_u(r)
        r = np.asarray(r, dtype=float)
        inv_t = np.linalg.inv(U).swapaxes(-1, -2)
        s = np.stack([np.exp(-self.kappa * r), np.exp(self.kappa * r)], axis=-1)
        return inv_t * s[..., None, :]


def transformation_function(model: TransformedModel, r):
    return model.transformation_function(r)


def superpotential(model: TransformedModel, r):
    return model.superpotential(r)


def transformed_potential(model: TransformedModel, r):
    return model.potential(r)


def singularity_scan(model: TransformedModel, r_max: float = 50.0, samples: int = 10_000):
    """Intervals of (0, r_max] where det u_c changes sign.

    A tenth of the samples are spent geometrically on [1e-3, 0.15], the rest
    uniformly above.
    """
    if samples < 1000:
        raise ValidationError("singularity_scan needs at least 1000 samples")
    n_in = samples // 10
    r_in = np.geomspace(1e-3, min(0.15, r_max), n_in, endpoint=False)
    r_out = np.linspace(min(0.15, r_max), r_max, samples - n_in)
    r = np.concatenate([r_in, r_out])
    U, _, _ = model.scaled_u(r)
    det = _det2(U)
    s = np.sign(det)
    idx = np.nonzero(s[1:] * s[:-1] <= 0)[0]
    return [(float(r[i]), float(r[i + 1])) for i in idx]
