"""Affine subspaces of R^d and the Gaussian measures concentrated on them.

A flat ``M_p = p + M_0`` is stored through an orthonormal basis of the
orthogonal complement of ``M_0`` (its *normals*) and an offset ``p`` lying in
the span of the normals. The Gaussian measure carried by the flat has mean
``p`` and covariance ``I - N N^T``, the orthogonal projector onto ``M_0``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import rng
from .errors import DegenerateBasisError, InconsistentOffsetError

ORTHO_TOL = 1e-10
RANK_TOL = 1e-12
OFFSET_TOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Flat:
    """Affine subspace ``offset + span(normals)^perp``.

    Attributes
    ----------
    normals : ndarray, shape (n, d)
        Orthonormal rows spanning the complement of the direction space.
    offset : ndarray, shape (d,)
        Point of the flat lying in the span of ``normals``.
    offset_residual : float
        Norm of the component of the caller's offset that was projected away.
    """

    normals: np.ndarray
    offset: np.ndarray
    offset_residual: float = 0.0

    @property
    def dim(self):
        return self.offset.shape[0]

    @property
    def codim(self):
        return self.normals.shape[0]

    @cached_property
    def projector(self):
        """Orthogonal projector onto the direction space ``M_0``."""
        N = self.normals
        return _frozen(np.eye(self.dim) - N.T @ N)

    @cached_property
    def tangent_basis(self):
        """Orthonormal basis of ``M_0`` as rows, shape ``(d - n, d)``."""
        d, n = self.dim, self.codim
        if n == 0:
            return _frozen(np.eye(d))
        if n == d:
            return _frozen(np.empty((0, d)))
        _, _, vt = np.linalg.svd(self.normals, full_matrices=True)
        return _frozen(vt[n:])

    def project(self, x):
        """Remove the normal components: ``x - N N^T x`` (row-wise)."""
        x = np.asarray(x, dtype=float)
        if self.codim == 0:
            return x.copy()
        return x - (x @ self.normals.T) @ self.normals

    def normal_coords(self, x):
        return np.asarray(x, dtype=float) @ self.normals.T

    def translated(self, offset):
        """Same normals (bit for bit), new offset projected onto their span."""
        p = np.asarray(offset, dtype=float)
        N = self.normals
        p_proj = N.T @ (N @ p) if self.codim else np.zeros(self.dim)
        residual = float(np.linalg.norm(p - p_proj))
        if residual > OFFSET_TOL:
            raise InconsistentOffsetError(
                f"offset is not in the span of the normals (residual {residual:.3g})"
            )
        return Flat(N, _frozen(p_proj), residual)

    def centered(self):
        return Flat(self.normals, _frozen(np.zeros(self.dim)))

    def __repr__(self):
        return f"Flat(dim={self.dim}, codim={self.codim}, offset={self.offset.tolist()})"


def _orthonormalize(vectors):
    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        scale = np.linalg.norm(w)
        if scale == 0.0:
            raise DegenerateBasisError("normal vectors must be nonzero")
        w = w / scale
        # two passes of modified Gram-Schmidt
        for _ in range(2):
            for q in basis:
                w = w - (q @ w) * q
        r = np.linalg.norm(w)
        if r <= RANK_TOL:
            raise DegenerateBasisError(
                f"normals are linearly dependent (residual {r:.3g} <= {RANK_TOL:g})"
            )
        basis.append(w / r)
    return basis


def make_flat(normals, offset=None, dim=None):
    """Build a :class:`Flat`, orthonormalizing ``normals``.

    ``offset`` must lie in the span of the normals; it is projected onto that
    span and the residual recorded. Residuals above ``1e-8`` mean the caller
    passed a point outside the complement of the direction space.
    """
    normals = [np.asarray(v, dtype=float) for v in normals]
    if dim is None:
        if normals:
            dim = normals[0].shape[0]
        elif offset is not None:
            dim = np.asarray(offset).shape[0]
        else:
            raise ValueError("cannot infer ambient dimension")
    for v in normals:
        if v.shape != (dim,):
            raise ValueError(f"normal of shape {v.shape} in ambient dimension {dim}")
    if len(normals) > dim:
        raise DegenerateBasisError(f"{len(normals)} normals in dimension {dim}")
    basis = _orthonormalize(normals)
    N = np.array(basis).reshape(len(basis), dim)
    gram = N @ N.T
    if not np.allclose(gram, np.eye(len(basis)), atol=ORTHO_TOL, rtol=0):
        raise DegenerateBasisError("orthonormalization lost accuracy")

    p = np.zeros(dim) if offset is None else np.asarray(offset, dtype=float)
    if p.shape != (dim,):
        raise ValueError(f"offset of shape {p.shape} in ambient dimension {dim}")
    p_proj = N.T @ (N @ p) if len(basis) else np.zeros(dim)
    residual = float(np.linalg.norm(p - p_proj))
    if residual > OFFSET_TOL:
        raise InconsistentOffsetError(
            f"offset is not in the span of the normals (residual {residual:.3g})"
        )
    return Flat(_frozen(N), _frozen(p_proj), residual)


def hyperplane(t, u):
    """The hyperplane ``t u + u^perp`` for a unit vector ``u``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    return make_flat([u], t * u)


def whole_space(dim):
    return make_flat([], np.zeros(dim), dim=dim)


def point(p):
    """Zero-dimensional flat ``{p}``."""
    p = np.asarray(p, dtype=float)
    return make_flat(np.eye(p.shape[0]), p)


@dataclass(frozen=True, eq=False)
class SubspaceGaussian:
    """Gaussian with mean ``flat.offset`` and covariance the projector onto ``M_0``."""

    flat: Flat

    @property
    def dim(self):
        return self.flat.dim

    @property
    def mean(self):
        return self.flat.offset

    @property
    def covariance(self):
        return self.flat.projector


def gaussian_on(flat):
    return SubspaceGaussian(flat)


def _as_gaussian(g):
    return g if isinstance(g, SubspaceGaussian) else SubspaceGaussian(g)


def char_functional(g, k):
    """``exp(i<p,k> - |P_{M_0} k|^2 / 2)``; ``k`` may be a stack of rows."""
    g = _as_gaussian(g)
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != g.dim:
        raise ValueError(f"frequency of dimension {k.shape[-1]}, expected {g.dim}")
    pk = g.flat.project(k)
    return np.exp(1j * (k @ g.mean) - 0.5 * np.sum(pk * pk, axis=-1))


def sample(g, seed, count, keys=(), threads=1):
    """Draw ``count`` points ``p + P_{M_0} z`` with ``z`` standard normal.

    The normal coordinates of every draw equal those of ``p`` up to rounding.
    With the same seed, samples from ``M_p`` are exactly those from ``M_0``
    shifted by ``p``.
    """
    g = _as_gaussian(g)
    if count < 1:
        raise ValueError("count must be positive")
    flat = g.flat
    if flat.codim == flat.dim:
        base = np.zeros((count, flat.dim))
    else:
        z = rng.standard_normal(seed, count, flat.dim, keys=keys, threads=threads)
        base = flat.project(z)
    return base + flat.offset


def empirical_char_functional(samples, k):
    k = np.atleast_2d(np.asarray(k, dtype=float))
    return np.exp(1j * (samples @ k.T)).mean(axis=0)


def pw_mean_var(g, h):
    """Mean and variance of ``x -> <h, x>`` under the flat's Gaussian."""
    g = _as_gaussian(g)
    h = np.asarray(h, dtype=float)
    if h.shape != (g.dim,):
        raise ValueError(f"vector of shape {h.shape}, expected ({g.dim},)")
    ph = g.flat.project(h)
    return float(h @ g.mean), float(ph @ ph)
