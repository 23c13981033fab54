import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from indexlab import specfn
from indexlab.errors import DomainError, PoleError

# 30-digit mpmath values, frozen
LOGGAMMA_ORACLE = {
    1 + 1j: -0.65092319930185633889 - 0.30164032046753319789j,
    0.3 - 2.7j: -3.5198783852427613228 + 0.32430720910645882318j,
    -2.5 + 0.5j: -0.93508562129827747868 - 8.8709628852474591986j,
    10 + 20j: -1.7029804439565110603 + 52.660660425584719482j,
    -0.7 - 3j: -5.1374994158115592651 + 1.8110940709796894546j,
    40 - 30j: 96.140147324970933798 - 112.7779839809793069j,
}
XI_ORACLE = {
    (0.3, 2.1): 0.99994703771353941405 - 0.010291830153932038621j,
    (0.5j, -1.7): 1.7871038288808610966 + 1.230048618989408252j,
    (-0.6, 7.5): 0.92705859581200111027 + 0.37491647060522795533j,
}
VARSIGMA_ORACLE = {
    (0.3, 1.7): -2.458792331140109049 + 0j,
    (1j, 1): -0.82347878764393348014 - 0.56734705983240761685j,
    (0.5j, np.exp(1j * np.pi / 3)): -0.035474733001520478199 - 0.99937057357042029021j,
}


def test_log_gamma_trivial_values():
    assert abs(specfn.log_gamma(1.0)) < 1e-14
    assert abs(specfn.log_gamma(0.5) - np.log(np.sqrt(np.pi))) < 1e-14


@pytest.mark.parametrize("z", list(LOGGAMMA_ORACLE))
def test_log_gamma_against_mpmath(z):
    assert abs(specfn.log_gamma(z) - LOGGAMMA_ORACLE[z]) <= 1e-12 * max(1.0, abs(LOGGAMMA_ORACLE[z]))


def test_log_gamma_matches_scipy_branch():
    re, im = np.meshgrid(np.linspace(-30.35, 40.65, 61), np.linspace(-45.1, 44.9, 61))
    z = (re + 1j * im).ravel()
    z = z[np.abs(z) <= 50]
    ours = specfn.log_gamma(z)
    ref = special.loggamma(z)
    assert np.max(np.abs(ours - ref) / np.maximum(1, np.abs(ref))) < 1e-12


def test_gamma_relative_error():
    z = np.array([0.1 + 0.2j, 3.3, 7.5 - 2j, -3.5 + 0.1j, 15 + 15j])
    ratio = specfn.gamma(z) / special.gamma(z)
    assert np.max(np.abs(ratio - 1)) < 1e-12


@pytest.mark.parametrize("z", [0, -1, -7, -3 + 1e-13])
def test_log_gamma_pole(z):
    with pytest.raises(PoleError):
        specfn.log_gamma(z)


def test_log_gamma_continuous_on_vertical_line():
    # the cut runs along (-inf, 0]; lines right of it and half-lines above it are smooth
    y = np.linspace(-40, 40, 4001)
    for x in (0.2, 5.0):
        v = specfn.log_gamma(x + 1j * y)
        assert np.max(np.abs(np.diff(v.imag))) < 0.5
    v = specfn.log_gamma(-2.3 + 1j * np.linspace(1e-3, 40, 4001))
    assert np.max(np.abs(np.diff(v.imag))) < 0.5


def test_xi_basic():
    assert abs(specfn.xi(0.7, 0.0) - 1) < 1e-15
    assert abs(abs(specfn.xi(0.5, 1.3)) - 1) < 1e-12
    assert abs(specfn.xi(0.3, 2.1) * specfn.xi(0.3, -2.1) - 1) < 1e-12


@pytest.mark.parametrize("key", list(XI_ORACLE))
def test_xi_against_mpmath(key):
    assert abs(specfn.xi(*key) - XI_ORACLE[key]) < 1e-12


def test_xi_domain():
    with pytest.raises(DomainError):
        specfn.xi(-1.0, 1.0)
    with pytest.raises(DomainError):
        specfn.xi(-1.5 + 1j, 1.0)


def test_xi_no_overflow():
    v = specfn.xi(0.5, np.array([300.0, -1e4]))
    assert np.all(np.isfinite(v))
    assert np.allclose(np.abs(v), 1, atol=1e-10)


def test_xi_pair_limit():
    assert specfn.xi_pair_limit(0.3, 0.3, 1) == 1
    assert abs(specfn.xi_pair_limit(0.5, 0.3, -1) - np.exp(-1j * np.pi * 0.2 / 2)) < 1e-15
    far = specfn.xi(0.5, -100.0) * specfn.xi(0.3, 100.0)
    assert abs(far - specfn.xi_pair_limit(0.5, 0.3, -1)) <= 1e-3
    far = specfn.xi(0.5, 100.0) * specfn.xi(0.3, -100.0)
    assert abs(far - specfn.xi_pair_limit(0.5, 0.3, 1)) <= 1e-3


def test_varsigma():
    assert specfn.varsigma(0.5, 0) == 0
    assert abs(specfn.varsigma(0.5, 1) + 2) < 1e-13
    assert abs(abs(specfn.varsigma(1j, 1)) - 1) < 1e-12
    with pytest.raises(PoleError):
        specfn.varsigma(1.0, 1)


@pytest.mark.parametrize("key", list(VARSIGMA_ORACLE))
def test_varsigma_against_mpmath(key):
    assert abs(specfn.varsigma(*key) - VARSIGMA_ORACLE[key]) < 1e-12


def test_g_pm_values():
    assert abs(specfn.g_pm(1.0, 0.0, -1) - 1) < 1e-14
    assert specfn.g_pm_limit(1.0, 1, 1) == pytest.approx(np.exp(np.pi))
    assert specfn.g_pm_limit(1.0, -1, 1) == pytest.approx(np.exp(-np.pi))
    assert abs(specfn.g_pm(1.0, 60.0, 1) - np.exp(np.pi)) < 1e-12
    assert np.isfinite(specfn.g_pm(2.0, np.array([-1e3, 1e3]), 1)).all()


def test_g_pm_equals_xi_product():
    xs = np.linspace(-10, 10, 401)
    for n in (0.3, 0.7, 2.0):
        for s in (1, -1):
            ref = specfn.xi(s * 1j * n, -xs) * specfn.xi(-s * 1j * n, xs)
            assert np.max(np.abs(specfn.g_pm(n, xs, s) - ref) / np.abs(ref)) < 1e-10


def test_reflection_identity():
    re, im = np.meshgrid(np.linspace(-0.39, 0.39, 17), np.linspace(-5, 5, 31))
    z = (re + 1j * im).ravel()
    lhs = np.exp(specfn.log_gamma(z + 0.5) + specfn.log_gamma(-z + 0.5))
    assert np.max(np.abs(lhs * np.cos(np.pi * z) / np.pi - 1)) < 1e-10


@pytest.mark.parametrize("n", [0.3, 1.0, 2.0])
def test_cosh_identity(n):
    x = np.linspace(-20, 20, 801)
    lhs = specfn.g_pm(n, x, -1) + specfn.g_pm(n, x + 2 * n, 1)
    assert np.max(np.abs(lhs - 2 * np.cosh(np.pi * n))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(m=st.floats(-0.99, 0.99).filter(lambda v: abs(v) > 1e-3), x=st.floats(-50, 50))
def test_xi_unit_modulus_and_inverse(m, x):
    v = specfn.xi(m, x)
    assert abs(abs(v) - 1) < 1e-12
    assert abs(v * specfn.xi(m, -x) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(n=st.floats(0.05, 3.0), x=st.floats(-30, 30))
def test_xi_adjoint_symmetry(n, x):
    assert abs(np.conj(specfn.xi(1j * n, x)) - specfn.xi(-1j * n, -x)) < 1e-12
