import numpy as np
import pytest

from susy_channels import onechannel as oc
from susy_channels import scattering as sc
from susy_channels.coupling import CouplingParams, DiagonalModel
from susy_channels.errors import ContractError, DomainError, ValidationError

from oracle_values import FIG1_BOUND, FIG1_VIRTUAL, FIG2_KAPPA, FIG2_TAN2EPS_INF

K = np.linspace(0.05, 8.0, 120)


def test_ss_jost_determinant_closed_form(models):
    m = models("fig2-ss")
    k = np.array([0.3, 1.0, 2.7]) + 0.2j
    ref = (k ** 2 + m.kappa ** 2) / ((k + 1.5j) * (k + 1.0j))
    np.testing.assert_allclose(np.linalg.det(sc.transformed_jost(m, k)), ref, rtol=1e-12)


def test_two_routes_agree(models):
    for name in ("fig2-ss", "fig4-sp", "fig5-sd", "fig1-trivial"):
        m = models(name)
        np.testing.assert_allclose(sc.s_matrix(m, K), sc.s_matrix_identity(m, K), atol=1e-12)


def test_s_matrix_requires_positive_k(models):
    with pytest.raises(DomainError):
        sc.s_matrix(models("fig2-ss"), np.array([0.0, 1.0]))


def test_mixing_angle_ss_closed_form(models):
    m = models("fig2-ss")
    _, _, _, eps, _ = sc.sweep_model(m, K)
    ref = sc.mixing_ss(K, 1.5, 1.0, m.params.alpha)
    np.testing.assert_allclose(np.tan(2 * eps), ref, atol=1e-10)


def test_mixing_angle_ss_large_k_limit():
    val = sc.mixing_ss(np.array([1e7]), 1.5, 1.0, 2 * np.arctan(0.4))[0]
    assert abs(val - FIG2_TAN2EPS_INF) < 1e-6


def test_case_i_mixing_angle():
    eps = sc.mixing_closed_form("i", np.array([3.53]), kappa=3.53, l1=0, l2=1)
    assert abs(eps[0] - np.pi / 4) < 1e-15
    with pytest.raises(ValidationError):
        sc.mixing_closed_form("i", np.array([1.0]), kappa=3.53, alpha=0.3, l1=0, l2=1)


def test_classify_case():
    assert [sc.classify_case(*ls) for ls in ((0, 0), (0, 1), (0, 2), (1, 3), (2, 3))] == \
        ["iii", "i", "ii", "ii", "i"]


def test_zero_mixing_kappa():
    assert abs(sc.kappa_for_zero_mixing(2 / 3, 1.0, 0.4) - FIG2_KAPPA) < 1e-12
    assert np.isnan(sc.kappa_for_zero_mixing(1.0, 1.0, 0.4))


def test_eigenphase_conventions():
    S = np.diag(np.exp(2j * np.array([0.3, -1.2])))
    pt = sc.eigenphases(S)
    assert pt.degenerate is False
    assert abs(pt.epsilon) < 1e-15
    np.testing.assert_allclose([pt.delta1, pt.delta2], [0.3, -1.2], atol=1e-14)
    with pytest.raises(ContractError):
        sc.eigenphases(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_degenerate_points_flagged():
    S = np.exp(0.8j) * np.eye(2)
    assert sc.eigenphases(S).degenerate


def test_spectrum_fig2(models):
    cat = sc.spectrum(models("fig2-ss"))
    assert [(round(b, 8), d) for b, d in cat.bound] == [(round(FIG2_KAPPA, 8), 1)]
    assert [(round(v, 8), d) for v, d in cat.virtual] == [(round(FIG2_KAPPA, 8), 1)]
    assert not cat.unresolved and not cat.resonances


def test_spectrum_fig1(models):
    cat = sc.spectrum(models("fig1-trivial"))
    assert {round(b, 8): d for b, d in cat.bound} == FIG1_BOUND
    assert {round(v, 8): d for v, d in cat.virtual} == FIG1_VIRTUAL


def test_spectrum_fig5_threshold(models):
    cat = sc.spectrum(models("fig5-sd"))
    assert [round(b, 8) for b, _ in cat.bound] == [5.53]
    assert cat.threshold


def test_general_n_degeneracies():
    chans = (oc.cosech(1.0), oc.cosech(1.5), oc.cosech(2.0))
    alg = sc.CoupledJost(DiagonalModel(chans), CouplingParams(3.0, M=2, Q=((0.3, -0.2),)))
    assert sc.degeneracies(alg) == (2, 1)
    cat = sc.spectrum(alg)
    assert [(round(b, 8), d) for b, d in cat.bound] == [(3.0, 2)]
    assert [(round(v, 8), d) for v, d in cat.virtual] == [(3.0, 1)]


def test_diagnostics_trivial_coupling(models):
    d = sc.diagnostics(models("fig1-trivial"), K, np.linspace(0.5, 3.0, 200))
    assert d["s_trivially_coupled"] and not d["v_trivially_coupled"]
    assert d["epsilon_variance"] < 1e-12


def test_diagnostics_ntc1(models):
    d = sc.diagnostics(models("ntc1"), K, np.linspace(0.5, 3.0, 200))
    assert d["s_trivially_coupled"]
    assert not d["jost_trivially_coupled"]


def test_levinson_fig1(models):
    drops = sc.phase_drops(models("fig1-trivial"))
    assert abs(drops.sum() - 3 * np.pi) < 1e-6


def test_scattering_length_fit_recovers_cosech():
    assert abs(sc.channel_scattering_length(oc.cosech(1.5)) - 1 / 1.5) < 1e-5
