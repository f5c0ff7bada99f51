import numpy as np
import pytest

from susy_channels import specfun
from susy_channels.errors import ContractError, DomainError, ValidationError

from oracle_values import RICCATI_HANKEL


@pytest.mark.parametrize("l, z, value, deriv", RICCATI_HANKEL)
def test_riccati_hankel_matches_bessel_reference(l, z, value, deriv):
    h, dh = specfun.riccati_hankel(l, z)
    assert abs(h - value) <= 1e-13 * max(1, abs(value))
    assert abs(dh - deriv) <= 1e-13 * max(1, abs(deriv))


def test_riccati_hankel_low_orders_closed_form():
    kr = np.array([0.3, 1.0, 7.5])
    e = np.exp(1j * kr)
    h1, _ = specfun.riccati_hankel(1, kr)
    h2, _ = specfun.riccati_hankel(2, kr)
    np.testing.assert_allclose(h1, e * (1 + 1j / kr), rtol=1e-14)
    np.testing.assert_allclose(h2, e * (1 + 3j / kr - 3 / kr ** 2), rtol=1e-14)


def test_riccati_hankel_imaginary_argument_decays():
    k4, r = 3.0, np.array([0.5, 2.0])
    h2, _ = specfun.riccati_hankel(2, 1j * k4 * r)
    x = k4 * r
    np.testing.assert_allclose(h2, np.exp(-x) * (1 + 3 / x + 3 / x ** 2), rtol=1e-14)


def test_riccati_hankel_rejects_bad_input():
    with pytest.raises(DomainError):
        specfun.riccati_hankel(1, 0.0)
    with pytest.raises(DomainError):
        specfun.riccati_hankel(-1, 1.0)


def test_double_factorial():
    assert [specfun.double_factorial(n) for n in (-1, 0, 1, 5, 6)] == [1, 1, 1, 15, 48]


def test_plane_wave_wronskian():
    k = 1.7
    r = np.linspace(0.1, 20, 7)
    W = specfun.wronskian([specfun.PlaneWave(k), specfun.PlaneWave(-k)], r)
    np.testing.assert_allclose(W.value, -2j * k, rtol=1e-13)


def test_beta_family_wronskian_keeps_its_sign():
    seeds = [specfun.SinhNode(1.0), specfun.SinhNode(3.5), specfun.ExpCombo(2.5, -2.0)]
    r = np.geomspace(1e-3, 50, 3000)
    W = specfun.wronskian(seeds, r)
    # the sign depends on column order; what matters is that it never changes
    assert np.all(np.sign(W.scaled) == np.sign(W.scaled[0]))
    assert np.min(np.abs(W.scaled)) > 1e-3


def test_seed_towers_match_finite_differences():
    r = np.array([0.4, 1.3, 3.0])
    h = 1e-4
    for seed in (specfun.SinhNode(1.5), specfun.ExpCombo(2.0, -3.0),
                 specfun.TanhShifted(2.0, 1.0), specfun.HankelDecay(3.0, 2)):
        t, ls = seed.tower(r, 2)
        full = lambda x: seed.tower(x, 0)[0][0] * np.exp(seed.log_scale(x))
        fd1 = (full(r + h) - full(r - h)) / (2 * h)
        fd2 = (full(r + h) - 2 * full(r) + full(r - h)) / h ** 2
        np.testing.assert_allclose(t[1] * np.exp(ls), fd1, rtol=1e-6)
        np.testing.assert_allclose(t[2] * np.exp(ls), fd2, rtol=1e-5)


def test_seed_validation():
    with pytest.raises(ValidationError):
        specfun.SinhNode(-1.0)
    with pytest.raises(ContractError):
        specfun.wronskian([], 1.0)
    with pytest.raises(DomainError):
        specfun.wronskian([specfun.SinhNode(1.0)], np.array([0.0]))
