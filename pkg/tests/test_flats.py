import math

import numpy as np
import pytest

from conftest import random_flat
from gaussradon import flats as fl
from gaussradon.errors import DegenerateBasisError, InconsistentOffsetError


def test_axis_hyperplane():
    flat = fl.make_flat([(1, 0, 0)], (2, 0, 0))
    assert flat.dim == 3 and flat.codim == 1
    np.testing.assert_array_equal(flat.offset, [2, 0, 0])


def test_diagonal_hyperplane_offset():
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    flat = fl.make_flat([(1, 1)], (0.5, 0.5))
    np.testing.assert_allclose(flat.normals[0], u, atol=1e-15)
    assert flat.offset @ u == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    ref = fl.hyperplane(1 / math.sqrt(2), u)
    np.testing.assert_allclose(ref.offset, flat.offset, atol=1e-15)


def test_parallel_normals_rejected():
    with pytest.raises(DegenerateBasisError):
        fl.make_flat([(1, 0), (1, 1e-13)])


def test_zero_normal_rejected():
    with pytest.raises(DegenerateBasisError):
        fl.make_flat([(0, 0)])


def test_offset_outside_normal_span():
    with pytest.raises(InconsistentOffsetError):
        fl.make_flat([(1, 0)], (1, 1e-6))
    flat = fl.make_flat([(1, 0)], (1, 1e-10))
    assert flat.offset_residual == pytest.approx(1e-10)
    assert flat.offset[1] == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_flat_invariants(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 7))
    flat = random_flat(rng, d)
    N = flat.normals
    np.testing.assert_allclose(N @ N.T, np.eye(flat.codim), atol=1e-10)
    assert np.linalg.norm(flat.offset - N.T @ (N @ flat.offset)) <= 1e-10
    P = flat.projector
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(P, P.T, atol=1e-10)
    np.testing.assert_allclose(P @ flat.offset, 0, atol=1e-10)
    assert np.trace(P) == pytest.approx(d - flat.codim, abs=1e-10)
    E = flat.tangent_basis
    np.testing.assert_allclose(E @ E.T, np.eye(d - flat.codim), atol=1e-10)
    np.testing.assert_allclose(E @ N.T, 0, atol=1e-10)


def test_char_functional_examples():
    a = 1.7
    g = fl.gaussian_on(fl.make_flat([(1, 0)], (a, 0)))
    assert fl.char_functional(g, [1, 0]) == pytest.approx(np.exp(1j * a), abs=1e-15)
    assert fl.char_functional(g, [0, 1]) == pytest.approx(np.exp(-0.5), abs=1e-15)
    k = np.array([0.3, -1.2, 0.5])
    w = fl.gaussian_on(fl.whole_space(3))
    assert fl.char_functional(w, k) == pytest.approx(np.exp(-0.5 * k @ k), abs=1e-15)


def test_point_flat_samples_equal_offset():
    p = np.array([0.4, -1.0, 2.0])
    x = fl.sample(fl.gaussian_on(fl.point(p)), seed=3, count=50)
    assert np.all(x == p)


def test_hyperplane_concentration():
    x = fl.sample(fl.gaussian_on(fl.make_flat([(1, 0)], (3, 0))), seed=1, count=1000)
    assert np.max(np.abs(x[:, 0] - 3.0)) <= 1e-12


def test_whole_space_mean_clt():
    n = 100_000
    x = fl.sample(fl.gaussian_on(fl.whole_space(3)), seed=11, count=n)
    assert np.all(np.abs(x.mean(axis=0)) <= 5 / math.sqrt(n))


def test_sampling_deterministic_and_thread_independent():
    g = fl.gaussian_on(fl.hyperplane(0.5, [1, 2, 2]))
    a = fl.sample(g, seed=9, count=70_000)
    b = fl.sample(g, seed=9, count=70_000, threads=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, fl.sample(g, seed=10, count=70_000))


@pytest.mark.parametrize("seed", range(5))
def test_translation_identity_exact(seed):
    rng = np.random.default_rng(seed)
    flat = random_flat(rng, 4, n=2)
    base = flat.centered()
    xs = fl.sample(fl.gaussian_on(flat), seed=seed, count=2000)
    x0 = fl.sample(fl.gaussian_on(base), seed=seed, count=2000)
    assert np.array_equal(xs, x0 + flat.offset)


@pytest.mark.parametrize("seed", range(5))
def test_concentration_random(seed):
    rng = np.random.default_rng(100 + seed)
    flat = random_flat(rng, 5, offset_scale=3.0)
    x = fl.sample(fl.gaussian_on(flat), seed=seed, count=5000)
    if flat.codim:
        assert np.max(np.abs(x @ flat.normals.T - flat.normals @ flat.offset)) <= 1e-12


def test_pw_mean_var_examples():
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    g = fl.gaussian_on(fl.hyperplane(2.5, u))
    m, v = fl.pw_mean_var(g, u)
    assert m == pytest.approx(2.5) and v == pytest.approx(0.0, abs=1e-15)

    g = fl.gaussian_on(fl.make_flat([(1, 0, 0)], (4, 0, 0)))
    h = np.array([0.0, 2.0, -1.0])
    assert fl.pw_mean_var(g, h) == pytest.approx((0.0, 5.0))


def test_pw_mean_var_diagonal_with_sampling():
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    g = fl.gaussian_on(fl.hyperplane(1.0, u))
    m, v = fl.pw_mean_var(g, [1.0, 0.0])
    assert m == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert v == pytest.approx(0.5, abs=1e-15)
    n = 200_000
    x = fl.sample(g, seed=5, count=n)[:, 0]
    assert abs(x.mean() - m) <= 3 * math.sqrt(v / n)
    assert abs(x.var(ddof=1) - v) <= 3 * v * math.sqrt(2 / n)


@pytest.mark.parametrize("seed", range(3))
def test_non_isometry(seed):
    rng = np.random.default_rng(seed)
    flat = fl.make_flat([rng.standard_normal(3)], dim=3)
    h, k = rng.standard_normal(3), rng.standard_normal(3)
    # push h and k toward the normal so the two inner products differ visibly
    h = h + 2 * flat.normals[0]
    k = k + 2 * flat.normals[0]
    n = 200_000
    x = fl.sample(fl.gaussian_on(flat), seed=seed, count=n)
    prod = (x @ h) * (x @ k)
    target = flat.project(h) @ flat.project(k)
    se = prod.std(ddof=1) / math.sqrt(n)
    assert abs(prod.mean() - target) <= 3 * se
    assert abs(prod.mean() - h @ k) > 10 * se


@pytest.mark.parametrize("seed", range(4))
def test_char_functional_law(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 6))
    flat = random_flat(rng, d)
    g = fl.gaussian_on(flat)
    n = 100_000
    x = fl.sample(g, seed=seed, count=n)
    k = rng.standard_normal((20, d))
    emp = fl.empirical_char_functional(x, k)
    assert np.all(np.abs(emp - fl.char_functional(g, k)) <= 5 / math.sqrt(n))
