import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_flat
from gaussradon import flats as fl
from gaussradon.errors import DegreeOverflowError
from gaussradon.hermite import (
    HermiteSeries,
    coordinate,
    expect_under,
    gauss_hermite,
    gaussian_moment,
    he_monomial_coeffs,
    he_values,
    multi_indices,
    norm_sq,
    point_function,
    random_series,
)


def test_evaluate_examples():
    assert HermiteSeries(1, {(2,): 1.0}).evaluate([0.0]) == -1.0
    one = HermiteSeries.constant(3)
    np.testing.assert_array_equal(one.evaluate(np.random.default_rng(0).standard_normal((4, 3))), 1.0)
    assert HermiteSeries(2, {(1, 1): 1.0}).evaluate([3.0, -2.0]) == -6.0


def test_he_coefficients_match_numpy():
    # independent oracle: numpy's HermiteE -> power series conversion
    for k in range(16):
        ref = np.polynomial.hermite_e.herme2poly([0] * k + [1])
        ours = np.zeros(k + 1)
        for e, c in he_monomial_coeffs(k):
            ours[e] = c
        np.testing.assert_array_equal(ours, ref)


@pytest.mark.parametrize("j", range(13))
@pytest.mark.parametrize("k", range(13))
def test_orthogonality(j, k):
    level = (j + k) // 2 + 1
    x, w = gauss_hermite(level)
    h = he_values(x, max(j, k))
    val = w @ (h[:, j] * h[:, k])
    expected = math.factorial(k) if j == k else 0.0
    # tolerance scaled by the norms |He_j| |He_k|; cancellation in the node sums is
    # at the 1e-17 relative level, i.e. ~1e-9 absolute once j, k reach 12
    scale = math.sqrt(math.factorial(j) * math.factorial(k))
    assert abs(val - expected) <= 1e-9 * scale


def test_graded_lex_order():
    assert list(multi_indices(2, 2)) == [(2, 0), (1, 1), (0, 2)]
    assert list(multi_indices(1, 3)) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert len(list(multi_indices(4, 4))) == math.comb(7, 3)


def test_moment_examples():
    assert gaussian_moment([0.0], [[1.0]], (2,)) == 1.0
    assert gaussian_moment([0, 0], np.eye(2), (1, 1)) == 0.0
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    val = gaussian_moment(u, np.eye(2) - np.outer(u, u), (1, 1))
    assert val == pytest.approx(0.0, abs=1e-15)
    x = fl.sample(fl.gaussian_on(fl.hyperplane(1.0, u)), seed=2, count=200_000)
    prod = x[:, 0] * x[:, 1]
    assert abs(prod.mean() - val) <= 3 * prod.std(ddof=1) / math.sqrt(prod.size)


def test_moment_known_values():
    # E[x^4] = 3 s^4 + 6 m^2 s^2 + m^4 for N(m, s^2)
    m, s2 = 0.7, 2.0
    assert gaussian_moment([m], [[s2]], (4,)) == pytest.approx(3 * s2**2 + 6 * m**2 * s2 + m**4)


def test_expect_under_examples():
    t = 1.3
    f = coordinate(3, 0, 2)
    assert expect_under(f, fl.make_flat([(1, 0, 0)], (t, 0, 0))) == pytest.approx(t * t, abs=1e-14)
    for d in (2, 3, 5):
        u = np.random.default_rng(d).standard_normal(d)
        flat = fl.hyperplane(t, u)
        assert expect_under(norm_sq(d), flat) == pytest.approx(t * t + d - 1, abs=1e-12)
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    assert expect_under(HermiteSeries(2, {(1, 1): 1.0}), fl.hyperplane(1.0, u)) == pytest.approx(0.0, abs=1e-14)


def _via_moments(f, flat):
    mono = f.to_monomials()
    return sum(c * gaussian_moment(flat.offset, flat.projector, m) for m, c in mono.coeffs.items())


@pytest.mark.parametrize("seed", range(15))
def test_two_paths_agree(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    f = random_series(rng, d, 4)
    for flat in (fl.whole_space(d), random_flat(rng, d)):
        assert expect_under(f, flat) == pytest.approx(_via_moments(f, flat), abs=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_parseval_mc(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    f = random_series(rng, d, 4, n_terms=6)
    x = fl.sample(fl.gaussian_on(fl.whole_space(d)), seed=seed, count=200_000)
    sq = f.evaluate(x) ** 2
    assert abs(sq.mean() - f.l2_norm() ** 2) <= 3 * sq.std(ddof=1) / math.sqrt(sq.size)


def test_degree_cap():
    f = HermiteSeries(1, {(31,): 1.0})
    with pytest.raises(DegreeOverflowError):
        expect_under(f, fl.whole_space(1))
    assert expect_under(HermiteSeries(1, {(30,): 1.0}), fl.whole_space(1)) == 0.0


def test_high_degree_evaluation_stable():
    x = np.linspace(-4, 4, 9)
    ours = he_values(x, 30)[:, 30]
    ref = np.polynomial.hermite_e.hermeval(x, [0] * 30 + [1])
    np.testing.assert_allclose(ours, ref, rtol=1e-12)


exps = st.lists(st.integers(0, 4), min_size=3, max_size=3).map(tuple)


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(exps, st.floats(-5, 5, allow_nan=False), max_size=6))
def test_monomial_roundtrip(coeffs):
    f = HermiteSeries(3, coeffs)
    back = HermiteSeries.from_monomials(3, f.to_monomials().coeffs)
    keys = set(f.coeffs) | set(back.coeffs)
    assert all(abs(f.coeff(m) - back.coeff(m)) <= 1e-9 * (1 + abs(f.coeff(m))) for m in keys)
    x = np.array([[0.3, -1.1, 2.0]])
    assert f.to_monomials()(x)[0] == pytest.approx(f.evaluate(x)[0], rel=1e-9, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(exps, st.floats(-1e3, 1e3, allow_nan=False), max_size=6))
def test_serialization_roundtrip(coeffs):
    f = HermiteSeries(3, coeffs)
    g = HermiteSeries.loads(f.dumps())
    assert g.dim == 3 and g.coeffs == f.coeffs


def test_shifted_matches_pointwise():
    rng = np.random.default_rng(4)
    f = random_series(rng, 3, 3)
    s = rng.standard_normal(3)
    x = rng.standard_normal((5, 3))
    np.testing.assert_allclose(f.shifted(s).evaluate(x), f.evaluate(x + s), rtol=1e-10, atol=1e-10)


def test_point_function_registry():
    x = np.array([[1.0, -2.0, 0.5], [0.0, 0.0, 3.0]])
    np.testing.assert_array_equal(point_function("one", 3)(x), [1, 1])
    np.testing.assert_array_equal(point_function("coord:2", 3)(x), [-2.0, 0.0])
    np.testing.assert_allclose(point_function("norm_sq", 3)(x), [5.25, 9.0])
    np.testing.assert_allclose(point_function("exp_linear:1,0,-1", 3)(x), np.exp([0.5, -3.0]))
    np.testing.assert_array_equal(point_function("indicator_ball:2.5", 3)(x), [1.0, 0.0])
    for name in ("one", "coord:3", "norm_sq"):
        pf = point_function(name, 3)
        np.testing.assert_allclose(pf.series.evaluate(x), pf(x), atol=1e-12)
    for bad in ("coord:0", "coord:4", "exp_linear:1,2", "indicator_ball:-1", "nope"):
        with pytest.raises(ValueError):
            point_function(bad, 3)
