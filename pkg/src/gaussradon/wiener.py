"""Truncated Karhunen-Loeve model of Brownian motion on [0, 1].

``W(t) = sum_{k<=m} z_k e_k(t)`` with ``e_k(t) = sqrt(2) sin(w_k t) / w_k`` and
``w_k = (k - 1/2) pi``. The ``e_k`` are orthonormal in the Cameron-Martin
inner product ``<f, g> = int f' g'``, so the KL coordinates ``z_k`` are the
images of the ``e_k`` under the Paley-Wiener map and the m-dimensional
coordinate space carries the standard Gaussian. Conditioning on ``z_k = t``
is the hyperplane ``t e_k + e_k^perp`` of that space.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import rng
from .disintegration import disintegration_check
from .hermite import HermiteSeries, PointFunction
from .radon import radon_profile

FUNCTIONALS = ("endpoint", "integral_sq")


@dataclass(frozen=True, eq=False)
class KLModel:
    m: int = 200
    n_grid: int = 512

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("truncation order must be at least 1")
        if self.n_grid < 2:
            raise ValueError("time grid needs at least two points")

    @cached_property
    def freqs(self):
        return (np.arange(1, self.m + 1) - 0.5) * math.pi

    @cached_property
    def grid(self):
        return np.linspace(0.0, 1.0, self.n_grid)

    @cached_property
    def trapezoid_weights(self):
        h = 1.0 / (self.n_grid - 1)
        w = np.full(self.n_grid, h)
        w[[0, -1]] = h / 2
        return w

    def basis(self, t):
        """``e_k(t)`` for each time, shape ``(len(t), m)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return math.sqrt(2.0) * np.sin(np.outer(t, self.freqs)) / self.freqs

    def basis_derivative(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return math.sqrt(2.0) * np.cos(np.outer(t, self.freqs))

    def cameron_martin_gram(self, nodes=2048):
        """``int_0^1 e_j' e_k'`` by Gauss-Legendre quadrature."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        t, w = 0.5 * (x + 1.0), 0.5 * w
        dB = self.basis_derivative(t)
        return dB.T @ (w[:, None] * dB)

    def truncated_variance(self, t):
        """``Var W_m(t) = sum_k e_k(t)^2``; the untruncated value is ``t``."""
        return np.sum(self.basis(t) ** 2, axis=1)

    def truncated_covariance(self, s, t):
        return float(self.basis(s)[0] @ self.basis(t)[0])


def sample_path(model, seed, count, times=None):
    """Paths ``sum_k z_k e_k`` at ``times`` (default: the model grid)."""
    times = model.grid if times is None else np.atleast_1d(np.asarray(times, dtype=float))
    B = model.basis(times)
    return np.concatenate([z @ B.T for z in rng.normal_chunks(seed, count, model.m)], axis=0)


def quadratic_form_series(G):
    """Hermite series of ``z -> z^T G z`` for symmetric ``G``."""
    G = np.asarray(G, dtype=float)
    m = G.shape[0]
    coeffs = {(0,) * m: float(np.trace(G))}
    for j in range(m):
        key = [0] * m
        key[j] = 2
        coeffs[tuple(key)] = float(G[j, j])
        for l in range(j + 1, m):
            key = [0] * m
            key[j] = key[l] = 1
            coeffs[tuple(key)] = 2.0 * float(G[j, l])
    return HermiteSeries(m, coeffs)


def functional(model, name):
    """Path functional as a function of the KL coordinates."""
    if name == "endpoint":
        a = model.basis(1.0)[0]
        series = HermiteSeries(model.m, {tuple(int(i == j) for i in range(model.m)): float(a[j]) for j in range(model.m)})
        return PointFunction(model.m, lambda z: z @ a, name, series)
    if name == "integral_sq":
        B = model.basis(model.grid)
        w = model.trapezoid_weights
        G = B.T @ (w[:, None] * B)

        def integral_sq(z):
            paths = z @ B.T
            return (paths * paths) @ w

        return PointFunction(model.m, integral_sq, name, quadratic_form_series(G))
    if name == "endpoint_sq":
        a = model.basis(1.0)[0]
        return PointFunction(model.m, lambda z: (z @ a) ** 2, name, quadratic_form_series(np.outer(a, a)))
    raise ValueError(f"unknown functional {name!r}; expected one of {FUNCTIONALS}")


def functional_radon(model, name, k, offsets, engine="exact", seed=None, samples=None, threads=1):
    """Profile of ``E[F(W) | z_k = t]`` for a registry functional (``k`` is 1-based)."""
    if name not in FUNCTIONALS:
        raise ValueError(f"unknown functional {name!r}; expected one of {FUNCTIONALS}")
    if not 1 <= k <= model.m:
        raise ValueError(f"direction index {k} outside 1..{model.m}")
    F = functional(model, name)
    u = np.zeros(model.m)
    u[k - 1] = 1.0
    return radon_profile(F, u, offsets, engine, seed=seed, samples=samples, threads=threads)


def endpoint_disintegration(model, k=1, level=12):
    """Disintegration check for ``W(1)^2`` over the KL coordinate ``z_k``."""
    F = functional(model, "endpoint_sq")
    u = np.zeros(model.m)
    u[k - 1] = 1.0
    return disintegration_check(F, [u], inner_engine="exact", outer_engine="quadrature", level=level)
