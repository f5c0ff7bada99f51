import numpy as np
import pytest

from susy_channels import onechannel as oc
from susy_channels.errors import DomainError, ValidationError


def test_cosech_jost_function_and_s_matrix():
    m = oc.cosech(1.5)
    k = np.array([0.2, 1.0, 4.0])
    np.testing.assert_allclose(m.jost_function(k), 1 / (1.5 - 1j * k), rtol=1e-14)
    # S = F(-k)/F(k); the barrier is repulsive, so the phase is negative
    np.testing.assert_allclose(m.s_matrix(k), (1.5 - 1j * k) / (1.5 + 1j * k), rtol=1e-14)
    assert np.all(np.angle(m.s_matrix(k)) < 0)
    with pytest.raises(DomainError):
        m.jost_function(-1.5j)


def test_cosech_potential_closed_form():
    m = oc.cosech(1.5)
    r = np.array([0.1, 1.0, 3.0])
    np.testing.assert_allclose(m.potential(r), 2 * 1.5 ** 2 / np.sinh(1.5 * r) ** 2, rtol=1e-12)


def test_cosech_limit_matches_rational_form():
    m = oc.cosech(1.5)
    F = oc.jost_from_limit(m, 1.0)
    assert abs(F - 1 / (1.5 - 1j)) <= 1e-6 * abs(F)


def test_sp_s_zero_energy_value_and_phase():
    m = oc.sp_s(1.5, 1.75)
    assert abs(m.jost_function(0.0) - 1 / (1.5 * 1.75)) < 1e-14
    k = np.linspace(0.05, 8, 50)
    d = m.phase_shift(k)
    ref = np.pi - np.arctan(k / 1.5) - np.arctan(k / 1.75)
    np.testing.assert_allclose(np.mod(d - ref + np.pi / 2, np.pi) - np.pi / 2, 0, atol=1e-12)


def test_sd_s_phase_at_threshold():
    m = oc.sd_s(1.0, 1.5, 1.75, 2.0)
    k = np.array([1e-6, 0.5, 3.0])
    ref = np.pi / 2 - sum(np.arctan(k / kj) for kj in (1.0, 1.5, 1.75, 2.0))
    d = m.phase_shift(k)
    np.testing.assert_allclose(np.mod(d - ref + np.pi / 2, np.pi) - np.pi / 2, 0, atol=1e-12)


def test_centrifugal_jost_function():
    m = oc.centrifugal(1)
    assert abs(m.jost_function(2.0) - 0.5j) < 1e-15
    f, _ = m.jost_solution(2.0, np.array([1.5]))
    kr = 3.0
    assert abs(f[0] - np.exp(1j * kr) * (1 + 1j / kr)) < 1e-13


def test_beta_family_limit_matches_rational_form():
    for beta in (-2.0, -1.0):
        m = oc.beta_family(1.0, 2.5, 3.5, beta)
        for k in (0.3, 1.3):
            assert abs(oc.jost_from_limit(m, k) - m.jost_function(k)) <= 1e-6 * abs(m.jost_function(k))


def test_origin_and_tail_behaviour():
    for m in (oc.cosech(1.0), oc.sp_s(1.5, 1.75), oc.sd_s(1, 1.5, 1.75, 2), oc.sd_d(3.0),
              oc.beta_family(1.0, 2.5, 3.5, -1.0)):
        r = np.array([1e-3])
        assert abs(r[0] ** 2 * m.potential(r)[0] - m.nu * (m.nu + 1)) < 1e-2 * max(1, m.nu * (m.nu + 1))
        tail = 40.0 ** 2 * m.potential(np.array([40.0]))[0]
        # the d-channel seed leaves an r^-3 remainder, hence the loose bound
        assert abs(tail - m.l * (m.l + 1)) < 0.15


def test_jost_solution_solves_radial_equation():
    m = oc.sd_d(3.0)
    k, r, h = 1.1, np.array([0.7, 2.0]), 1e-3
    f = lambda x: m.jost_solution(k, x)[0]
    fpp = (-f(r + 2 * h) + 16 * f(r + h) - 30 * f(r) + 16 * f(r - h) - f(r - 2 * h)) / (12 * h ** 2)
    resid = fpp - (m.potential(r) - k ** 2) * f(r)
    assert np.max(np.abs(resid)) < 1e-6


@pytest.mark.parametrize("family, params", [
    ("cosech", {"kappa": -1.0}),
    ("sp_s", {"kappa0": 1.0, "kappa1": 1.0}),
    ("beta_family", {"kappa0": 1.0, "kappa1": 2.5, "kappa2": 3.5, "beta": 0.5}),
    ("beta_family", {"kappa0": 2.0, "kappa1": 1.0, "kappa2": 3.5, "beta": -2.0}),
    ("centrifugal", {"l": 0}),
    ("nope", {}),
    ("cosech", {"kappa": 1.0, "extra": 2.0}),
])
def test_invalid_parameters_rejected(family, params):
    with pytest.raises(ValidationError):
        oc.build_family(family, **params)
