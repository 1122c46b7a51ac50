import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinlab.spectral import (POINCARE_CONSTANT, grad, inner, inv_helmholtz, inv_helmholtz_sqrt, l2_sq,
                             lemma22_check, random_trig_polynomial, second_derivative, transform,
                             inverse_transform, wavenumbers)

N = 64
X = np.arange(N) / N
TWO_PI = 2 * math.pi


def test_constant_is_fixed_by_helmholtz():
    u = np.full(N, 3.25)
    np.testing.assert_allclose(inv_helmholtz(u), u, rtol=1e-15)
    np.testing.assert_allclose(inv_helmholtz_sqrt(u), u, rtol=1e-15)
    np.testing.assert_allclose(grad(u), 0.0, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_single_mode_multipliers(k):
    c = np.cos(TWO_PI * k * X)
    s = np.sin(TWO_PI * k * X)
    np.testing.assert_allclose(inv_helmholtz(c), c / (1 + 4 * math.pi ** 2 * k * k), atol=1e-15)
    np.testing.assert_allclose(inv_helmholtz_sqrt(s), s / math.sqrt(1 + 4 * math.pi ** 2 * k * k), atol=1e-15)
    np.testing.assert_allclose(grad(c), -TWO_PI * k * s, atol=1e-12)
    np.testing.assert_allclose(second_derivative(c), -(TWO_PI * k) ** 2 * c, atol=1e-10)


def test_sqrt_twice_is_inverse(rng):
    u = random_trig_polynomial(N, 12, rng)
    np.testing.assert_allclose(inv_helmholtz_sqrt(inv_helmholtz_sqrt(u)), inv_helmholtz(u), rtol=1e-12, atol=1e-15)


def test_grad_has_zero_mean(rng):
    u = random_trig_polynomial(N, 10, rng)
    du = grad(u)
    assert abs(du.mean()) < 1e-15 * np.abs(du).max()


def test_nyquist_mode_has_no_derivative():
    u = np.cos(math.pi * N * X)  # alternating +-1
    np.testing.assert_allclose(grad(u), 0.0, atol=1e-12)


def test_transform_round_trip(rng):
    u = rng.standard_normal(N)
    np.testing.assert_allclose(inverse_transform(transform(u)), u, atol=1e-14)
    assert transform(np.ones(N))[0] == pytest.approx(1.0)
    assert wavenumbers(8).tolist() == [0, 1, 2, 3, 4]


def test_inner_and_norm():
    c = np.cos(TWO_PI * X)
    assert l2_sq(c) == pytest.approx(0.5, rel=1e-14)
    assert abs(inner(c, np.sin(TWO_PI * X))) < 1e-15


def test_constant_value():
    assert POINCARE_CONSTANT == pytest.approx(4 * math.pi ** 2 / (1 + 4 * math.pi ** 2))
    assert POINCARE_CONSTANT > 0.75


def test_single_mode_saturates_coercivity():
    rep = lemma22_check(np.cos(TWO_PI * X))
    assert rep.coerc_lhs == pytest.approx(POINCARE_CONSTANT * 0.5, rel=1e-12)
    assert abs(rep.margins[2]) < 1e-12
    assert rep.holds()


def test_constant_field_all_sides_zero():
    rep = lemma22_check(np.full(N, 2.0))
    assert rep.grad_lhs == 0 and rep.coerc_lhs == 0 and rep.coerc_rhs == 0
    assert rep.hess_lhs < 1e-28
    assert rep.holds()


def test_higher_mode_is_strict():
    rep = lemma22_check(np.cos(2 * TWO_PI * X))
    assert min(rep.margins) > 1e-3


def test_thousand_random_polynomials():
    rng = np.random.default_rng(1)
    worst = min(min(lemma22_check(random_trig_polynomial(N, int(rng.integers(1, N // 4 + 1)), rng)).margins)
                for _ in range(1000))
    assert worst >= -1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2 * (N // 4) + 1))
def test_fourier_estimates_property(coefs):
    u = np.full(N, coefs[0])
    for k in range(1, (len(coefs) - 1) // 2 + 1):
        u += coefs[2 * k - 1] * np.cos(TWO_PI * k * X) + coefs[2 * k] * np.sin(TWO_PI * k * X)
    assert lemma22_check(u).holds(1e-12)
