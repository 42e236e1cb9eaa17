import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gaussradon.bargmann import (
    HolomorphicSeries,
    imaginary_leakage,
    sb_forward,
    sb_inverse,
    sb_monte_carlo,
    sb_norm,
    sb_quadrature,
)
from gaussradon.errors import EngineUnavailableError, NonRealFunctionError
from gaussradon.hermite import HermiteSeries, point_function, random_series


def x_squared():
    return HermiteSeries.from_monomials(1, {(2,): 1.0})


def test_forward_examples():
    F = sb_forward(x_squared())
    # x^2 = He_2 + He_0  ->  z^2 + 1
    assert F.coeffs == {(2,): 1 + 0j, (0,): 1 + 0j}
    G = sb_forward(HermiteSeries.from_monomials(2, {(1, 1): 1.0}))
    assert G.coeffs == {(1, 1): 1 + 0j}


@pytest.mark.parametrize("alpha", [1.0, 1j, 1 + 1j])
def test_forward_matches_integral(alpha):
    F = sb_forward(x_squared())
    q = sb_quadrature(x_squared(), [alpha], level=32)
    assert q.value == pytest.approx(alpha**2 + 1, abs=1e-10)
    assert F([alpha]) == pytest.approx(alpha**2 + 1, abs=1e-14)


def test_forward_two_dims():
    f = HermiteSeries.from_monomials(2, {(1, 1): 1.0})
    q = sb_quadrature(f, [1.0, 2.0], level=32)
    assert q.value == pytest.approx(2.0, abs=1e-10)
    assert q.reliable


def test_inverse_examples():
    F = HolomorphicSeries(1, {(3,): 1.0})
    f = sb_inverse(F)
    # He_3 = x^3 - 3x
    assert f.to_monomials().coeffs == pytest.approx({(3,): 1.0, (1,): -3.0})
    with pytest.raises(NonRealFunctionError):
        sb_inverse(HolomorphicSeries(1, {(1,): 1j}))
    assert imaginary_leakage(HolomorphicSeries(1, {(1,): 1 + 1e-7j})) == pytest.approx(1e-7)
    sb_inverse(HolomorphicSeries(1, {(1,): 1 + 1e-7j}))


@pytest.mark.parametrize("seed", range(8))
def test_round_trip(seed):
    f = random_series(np.random.default_rng(seed), 3, 5)
    g = sb_inverse(sb_forward(f))
    assert g.coeffs == f.coeffs


def test_quadrature_examples():
    one = point_function("one", 2)
    q = sb_quadrature(one, [0.7 - 0.2j, 1.1j], level=32)
    assert q.value == pytest.approx(1.0, abs=1e-12) and q.error < 1e-12
    x1 = point_function("coord:1", 1)
    assert sb_quadrature(x1, [0.5 + 0.5j], level=32).value == pytest.approx(0.5 + 0.5j, abs=1e-12)


def test_quadrature_reliability_flag():
    f = point_function("coord:1", 1)
    assert sb_quadrature(f, [2.0], level=8).reliable
    assert not sb_quadrature(f, [3.0], level=16).reliable
    assert sb_quadrature(f, [3.0], level=32).reliable
    with pytest.raises(ValueError):
        sb_quadrature(f, [1.0], level=4)
    with pytest.raises(EngineUnavailableError):
        sb_quadrature(point_function("one", 7), np.zeros(7), level=8)


def _polar_norm_sq(F):
    def integrand(theta, r):
        z = r * np.exp(1j * theta)
        return abs(F([z])) ** 2 * math.exp(-r * r) * r / math.pi

    val, _ = integrate.dblquad(integrand, 0, 12, 0, 2 * math.pi, epsabs=1e-12, epsrel=1e-12)
    return val


@pytest.mark.parametrize(
    "coeffs",
    [{(0,): 1.0}, {(1,): 2.0}, {(3,): 1.0, (0,): -0.5}, {(2,): 1 + 1j, (1,): -0.3j}],
)
def test_norm_against_polar_integral(coeffs):
    F = HolomorphicSeries(1, coeffs)
    assert sb_norm(F) ** 2 == pytest.approx(_polar_norm_sq(F), rel=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_unitarity(seed):
    f = random_series(np.random.default_rng(seed), int(1 + seed % 3), 6)
    assert abs(sb_norm(sb_forward(f)) - f.l2_norm()) <= 1e-8


@pytest.mark.parametrize("seed", range(10))
def test_quadrature_matches_coefficients(seed):
    rng = np.random.default_rng(100 + seed)
    d = int(rng.integers(1, 4))
    f = random_series(rng, d, 8 if d < 3 else 5)
    F = sb_forward(f)
    for _ in range(5):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        z *= rng.uniform(0, 3) / np.linalg.norm(z)
        q = sb_quadrature(f, z, level=32)
        assert abs(q.value - F(z)) <= 1e-8 * max(1.0, abs(F(z)))


def test_quadrature_linear_bitwise():
    rng = np.random.default_rng(3)
    f, g = random_series(rng, 2, 3), random_series(rng, 2, 3)
    z = np.array([0.3 + 0.1j, -0.4j])
    lhs = sb_forward(2.0 * f + g)(z)
    rhs = 2.0 * sb_forward(f)(z) + sb_forward(g)(z)
    assert abs(lhs - rhs) <= 1e-13


@pytest.mark.parametrize("seed", range(3))
def test_monte_carlo_real_points(seed):
    f = HermiteSeries.from_monomials(2, {(2, 0): 1.0, (0, 1): -0.5})
    z = np.array([0.4, -0.3])
    value, se = sb_monte_carlo(f, z, seed=seed, samples=200_000)
    assert abs(value - sb_forward(f)(z).real) <= 3 * se


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=5))
def test_holomorphic_json_round_trip(terms):
    F = HolomorphicSeries(1, {(k,): complex(a, b) for k, a, b in terms})
    G = HolomorphicSeries.loads(F.dumps())
    assert G.coeffs == F.coeffs
