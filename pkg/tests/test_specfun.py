import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexdp.errors import DomainError
from simplexdp.specfun import digamma, log_beta, log_gamma, log_multivariate_beta, trigamma

mpmath.mp.dps = 40

GRID = np.concatenate(
    [
        np.geomspace(1e-6, 0.5, 40),
        np.linspace(0.5, 3.0, 101),
        np.geomspace(3.0, 1e7, 60),
    ]
)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_log_gamma_matches_mpmath():
    worst = max(rel(log_gamma(x), float(mpmath.loggamma(x))) for x in GRID if abs(x - 1) > 1e-9 and abs(x - 2) > 1e-9)
    assert worst < 1e-13


def test_log_gamma_near_its_zeros():
    for x in (1 + 1e-8, 1 - 1e-6, 2 + 1e-7, 2 - 3e-5, 1.2, 1.8):
        want = float(mpmath.loggamma(x))
        assert rel(log_gamma(x), want) < 1e-13
    assert log_gamma(1.0) == 0.0
    assert log_gamma(2.0) == 0.0


def test_digamma_matches_mpmath():
    for x in GRID:
        want = float(mpmath.digamma(x))
        assert abs(digamma(x) - want) <= 5e-13 * max(abs(want), 1e-3)


def test_trigamma_matches_mpmath():
    for x in GRID:
        want = float(mpmath.psi(1, x))
        assert rel(trigamma(x), want) < 1e-13


def test_log_beta_matches_mpmath():
    rng = np.random.default_rng(0)
    for _ in range(300):
        a, b = 10 ** rng.uniform(-3, 5, size=2)
        want = float(mpmath.log(mpmath.beta(a, b)))
        assert abs(log_beta(a, b) - want) <= 1e-13 * max(1.0, abs(want))


def test_log_beta_large_arguments_keep_precision():
    # the difference of two large log-gammas would lose ~8 digits here
    a, b = 3.5, 2.0e6
    want = float(mpmath.log(mpmath.beta(a, b)))
    assert rel(log_beta(a, b), want) < 1e-13


def test_known_values():
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-15)
    assert digamma(1.0) == pytest.approx(-0.5772156649015329, rel=1e-14)
    assert trigamma(1.0) == pytest.approx(math.pi**2 / 6, rel=1e-15)
    assert log_beta(1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_beta(2.0, 3.0) == pytest.approx(math.log(1 / 12), rel=1e-14)


def test_vectorised_and_scalar_types():
    x = np.array([[0.5, 1.5], [2.5, 30.0]])
    for f in (log_gamma, digamma, trigamma):
        out = f(x)
        assert out.shape == x.shape
        assert isinstance(f(2.5), float)
        np.testing.assert_array_equal(out.ravel(), [f(v) for v in x.ravel()])
    assert log_beta(np.array([1.0, 2.0]), 3.0).shape == (2,)


def test_multivariate_beta():
    y = np.array([0.5, 2.0, 7.5])
    want = sum(float(mpmath.loggamma(v)) for v in y) - float(mpmath.loggamma(y.sum()))
    assert log_multivariate_beta(y) == pytest.approx(want, rel=1e-13)
    batch = np.vstack([y, y[::-1]])
    np.testing.assert_allclose(log_multivariate_beta(batch), [want, want], rtol=1e-13)
    with pytest.raises(DomainError):
        log_multivariate_beta(np.array([1.0]))


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_domain_errors(bad):
    for f in (log_gamma, digamma, trigamma):
        with pytest.raises(DomainError):
            f(bad)
    with pytest.raises(DomainError):
        log_beta(1.0, bad)


positive = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(positive)
def test_gamma_recurrence(x):
    # log Gamma(x + 1) = log Gamma(x) + log x
    assert log_gamma(x + 1) == pytest.approx(log_gamma(x) + math.log(x), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(positive)
def test_digamma_recurrence(x):
    assert digamma(x + 1) == pytest.approx(digamma(x) + 1 / x, rel=1e-11, abs=1e-11)


@settings(max_examples=200, deadline=None)
@given(positive)
def test_trigamma_recurrence(x):
    assert trigamma(x) == pytest.approx(trigamma(x + 1) + 1 / x**2, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(positive, positive)
def test_log_beta_symmetry_and_recurrence(a, b):
    assert log_beta(a, b) == log_beta(b, a)
    # B(a + 1, b) = B(a, b) a / (a + b)
    lhs = log_beta(a + 1, b)
    rhs = log_beta(a, b) + math.log(a) - math.log(a + b)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.05, max_value=1e4))
def test_digamma_is_derivative_of_log_gamma(x):
    h = 1e-5 * x
    fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h)
    assert fd == pytest.approx(digamma(x), rel=1e-5, abs=1e-5)


@settings(max_examples=200, deadline=None)
@given(positive, positive)
def test_scalar_and_array_paths_agree(a, b):
    assert log_gamma(a) == pytest.approx(log_gamma(np.array([a]))[0], rel=1e-15, abs=1e-300)
    assert log_beta(a, b) == pytest.approx(log_beta(np.array([a]), np.array([b]))[0], rel=1e-15, abs=1e-300)
