import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from susy_channels import onechannel as oc
from susy_channels import scattering as sc
from susy_channels.coupling import CouplingParams, DiagonalModel

phase = st.floats(-1.5, 1.5)
kappas = st.lists(st.floats(0.3, 5.0), min_size=4, max_size=4, unique=True)


def _rot(e):
    c, s = np.cos(e), np.sin(e)
    return np.array([[c, s], [-s, c]])


@given(a=phase, b=phase, eps=st.floats(-0.78, 0.78))
def test_eigenphase_round_trip(a, b, eps):
    if abs(np.exp(2j * a) - np.exp(2j * b)) < 0.05:
        return
    R = _rot(eps)
    S = R @ np.diag(np.exp(2j * np.array([a, b]))) @ R.T
    pt = sc.eigenphases(S)
    assert abs(pt.epsilon - eps) < 1e-10
    assert abs(pt.delta1 - a) < 1e-10 and abs(pt.delta2 - b) < 1e-10


def _random_algebra(data, N):
    ks = data.draw(st.lists(st.floats(0.3, 5.0), min_size=N, max_size=N, unique=True))
    kap = data.draw(st.floats(0.5, 6.0))
    if min(abs(kap - k) for k in ks) < 1e-3:
        kap += 0.01
    M = data.draw(st.integers(0, N))
    Q = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=(N - M) * M, max_size=(N - M) * M)))
    X0 = np.eye(M) * data.draw(st.floats(0.5, 20.0))
    params = CouplingParams(kap, M=M, Q=tuple(Q.reshape(N - M, M).tolist()) if M else None,
                            X0=tuple(map(tuple, X0)) if M else None)
    return sc.CoupledJost(DiagonalModel(tuple(oc.cosech(k) for k in ks)), params), kap, M


@settings(max_examples=40, deadline=None)
@given(data=st.data(), N=st.integers(2, 4))
def test_jost_determinant_factorization(data, N):
    alg, kap, M = _random_algebra(data, N)
    k = np.array(data.draw(st.lists(st.floats(-6, 6), min_size=5, max_size=5))) + 0.01
    ratio = np.linalg.det(sc.transformed_jost(alg, k)) / np.prod(alg.diagonal.jost_diagonal(k), axis=-1)
    ref = (-1) ** N * (1j * k + kap) ** M * (1j * k - kap) ** (N - M)
    np.testing.assert_allclose(ratio, ref, rtol=1e-10)


@settings(max_examples=40, deadline=None)
@given(data=st.data(), N=st.integers(2, 4))
def test_s_matrix_unitary_and_symmetric(data, N):
    alg, _, _ = _random_algebra(data, N)
    k = np.linspace(0.05, 10, 25)
    S = sc.s_matrix(alg, k)
    I = np.eye(N)
    assert np.abs(S @ S.conj().swapaxes(-1, -2) - I).max() <= 1e-10
    assert np.abs(S - S.swapaxes(-1, -2)).max() <= 1e-10
    np.testing.assert_allclose(S, sc.s_matrix_identity(alg, k), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(ks=kappas, q=st.floats(-3, 3), x1=st.floats(0.5, 200), x2=st.floats(0.5, 200))
def test_s_matrix_independent_of_x(ks, q, x1, x2):
    diag = DiagonalModel((oc.cosech(ks[0]), oc.cosech(ks[1])))
    kap = ks[2] if abs(ks[2] - ks[0]) > 1e-3 and abs(ks[2] - ks[1]) > 1e-3 else ks[3] + 5.5
    k = np.linspace(0.1, 8, 15)
    S1 = sc.s_matrix(sc.CoupledJost(diag, CouplingParams(kap, q, x1)), k)
    S2 = sc.s_matrix(sc.CoupledJost(diag, CouplingParams(kap, q, x2)), k)
    assert np.abs(S1 - S2).max() <= 1e-14


@settings(max_examples=30, deadline=None)
@given(k1=st.floats(0.3, 4), k2=st.floats(0.3, 4), q=st.floats(-3, 3))
def test_ss_mixing_matches_closed_form(k1, k2, q):
    # the closed form holds when kappa is fixed by vanishing zero-energy mixing
    kap = sc.kappa_for_zero_mixing(1 / k1, 1 / k2, q)
    assume(np.isfinite(kap) and 0.2 < kap < 50 and min(abs(kap - k1), abs(kap - k2)) > 1e-2)
    alg = sc.CoupledJost(DiagonalModel((oc.cosech(k1), oc.cosech(k2))), CouplingParams(kap, q, 10.0))
    k = np.linspace(0.05, 6, 40)
    _, _, eps, flag = sc.phase_sweep(sc.s_matrix(alg, k), k)
    ref = np.arctan(sc.mixing_ss(k, k1, k2, 2 * np.arctan(q)))
    assert np.abs(np.sin(2 * eps[~flag] - ref[~flag])).max() < 1e-10
