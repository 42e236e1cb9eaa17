"""Multivariate probabilists' Hermite series and Gaussian expectations.

``He_0 = 1``, ``He_1 = x``, ``He_{k+1} = x He_k - k He_{k-1}``, orthogonal under
the standard Gaussian with ``<He_j, He_k> = k! delta_jk``. A series is a map
from multi-indices (tuples of exponents) to real coefficients.

Two independent routes to Gaussian expectations live here:

* :func:`gaussian_moment`, mixed monomial moments through Stein's identity
  ``E[x_i g] = mu_i E[g] + sum_j sigma_ij E[d_j g]``;
* :func:`restricted_transform`, the Hermite generating function
  ``E[exp(t.X - |t|^2/2)] = exp(t.p - |N t|^2 / 2)`` for ``X ~ N(p, I - N^T N)``.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegreeOverflowError

MAX_DEGREE = 30


def multi_indices(k, d):
    """Multi-indices of total degree ``k`` in ``d`` variables, graded-lex order.

    >>> list(multi_indices(2, 2))
    [(2, 0), (1, 1), (0, 2)]
    """
    if d == 0:
        if k == 0:
            yield ()
        return
    if d == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in multi_indices(k - first, d - 1):
            yield (first,) + rest


def grlex_key(m):
    return (sum(m), tuple(-e for e in m))


def mfact(m):
    return math.prod(math.factorial(e) for e in m)


def _check_degree(deg):
    if deg > MAX_DEGREE:
        raise DegreeOverflowError(f"degree {deg} exceeds the cap of {MAX_DEGREE}")


def he_values(x, kmax):
    """``He_0 .. He_kmax`` at ``x``; result has a trailing axis of length kmax+1."""
    x = np.asarray(x)
    out = np.empty(x.shape + (kmax + 1,), dtype=np.result_type(x, float))
    out[..., 0] = 1.0
    if kmax >= 1:
        out[..., 1] = x
    for k in range(1, kmax):
        out[..., k + 1] = x * out[..., k] - k * out[..., k - 1]
    return out


@lru_cache(maxsize=None)
def he_monomial_coeffs(k):
    """Integer coefficients of ``He_k`` in powers ``x^k, x^(k-2), ...``."""
    return tuple(
        (k - 2 * j, (-1) ** j * math.factorial(k) // (math.factorial(j) * math.factorial(k - 2 * j) * 2**j))
        for j in range(k // 2 + 1)
    )


@lru_cache(maxsize=None)
def monomial_he_coeffs(k):
    """Integer coefficients of ``x^k`` in ``He_k, He_(k-2), ...``."""
    return tuple(
        (k - 2 * j, math.factorial(k) // (math.factorial(j) * math.factorial(k - 2 * j) * 2**j))
        for j in range(k // 2 + 1)
    )


def _clean(dim, coeffs):
    out = {}
    for m, c in coeffs.items():
        m = tuple(int(e) for e in m)
        if len(m) != dim:
            raise ValueError(f"multi-index {m} has length {len(m)}, expected {dim}")
        if any(e < 0 for e in m):
            raise ValueError(f"negative exponent in {m}")
        if c != 0:
            out[m] = c
    return dict(sorted(out.items(), key=lambda kv: grlex_key(kv[0])))


def _sparse_eval(coeffs, x, factor_values, dtype=float, block=4096):
    """Evaluate ``sum_m c_m prod_i phi_{m_i}(x_i)`` for rows of ``x``.

    ``factor_values(col, emax)`` returns the table ``phi_0..phi_emax`` of a
    column. Only nonzero exponents are touched, so sparse high-dimensional
    series stay cheap.
    """
    x = np.asarray(x)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if not coeffs:
        out = np.zeros(x.shape[0], dtype=dtype)
        return out[0] if single else out
    emax = {}
    for m in coeffs:
        for j, e in enumerate(m):
            if e:
                emax[j] = max(emax.get(j, 0), e)
    cols = sorted(emax)
    slot = {}
    tables = []
    offset = 1  # slot 0 is the constant 1
    for j in cols:
        tables.append(j)
        for e in range(1, emax[j] + 1):
            slot[(j, e)] = offset + e - 1
        offset += emax[j]
    width = max((sum(1 for e in m if e) for m in coeffs), default=0)
    idx = np.zeros((len(coeffs), max(width, 1)), dtype=np.intp)
    for r, m in enumerate(coeffs):
        s = [slot[(j, e)] for j, e in enumerate(m) if e]
        idx[r, : len(s)] = s
    c = np.array(list(coeffs.values()), dtype=dtype)
    res = np.empty(x.shape[0], dtype=np.result_type(dtype, x.dtype))
    for start in range(0, x.shape[0], block):
        xb = x[start : start + block]
        table = np.empty((xb.shape[0], offset), dtype=np.result_type(float, xb.dtype))
        table[:, 0] = 1.0
        for j in tables:
            vals = factor_values(xb[:, j], emax[j])
            first = slot[(j, 1)]
            table[:, first : first + emax[j]] = vals[:, 1:]
        res[start : start + block] = np.prod(table[:, idx], axis=2) @ c
    return res[0] if single else res


def _pow_values(col, emax):
    return col[:, None] ** np.arange(emax + 1)


@dataclass(frozen=True, eq=False)
class HermiteSeries:
    """``f = sum_m c_m He_m`` on R^dim."""

    dim: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(self.dim, self.coeffs))

    @classmethod
    def constant(cls, dim, value=1.0):
        return cls(dim, {(0,) * dim: float(value)})

    @classmethod
    def from_monomials(cls, dim, monomials):
        """Convert ``{m: c}`` in the monomial basis to Hermite coefficients."""
        out = {}
        for m, c in monomials.items():
            _check_degree(sum(m))
            for parts in itertools.product(*(monomial_he_coeffs(e) for e in m)):
                key = tuple(e for e, _ in parts)
                w = math.prod(w for _, w in parts)
                out[key] = out.get(key, 0.0) + c * w
        return cls(dim, out)

    def to_monomials(self):
        _check_degree(self.degree)
        out = {}
        for m, c in self.coeffs.items():
            for parts in itertools.product(*(he_monomial_coeffs(e) for e in m)):
                key = tuple(e for e, _ in parts)
                w = math.prod(w for _, w in parts)
                out[key] = out.get(key, 0.0) + c * w
        return Polynomial(self.dim, out)

    @property
    def degree(self):
        return max((sum(m) for m in self.coeffs), default=0)

    def coeff(self, m):
        return self.coeffs.get(tuple(m), 0.0)

    def homogeneous_part(self, k):
        return {m: c for m, c in self.coeffs.items() if sum(m) == k}

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        """Value at a point or at each row of ``x``."""
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"point of dimension {x.shape[-1]}, expected {self.dim}")
        return _sparse_eval(self.coeffs, x, he_values, dtype=float)

    def l2_norm(self):
        """Norm in L^2 of the standard Gaussian, from the coefficients."""
        return math.sqrt(sum(c * c * mfact(m) for m, c in self.coeffs.items()))

    def shifted(self, shift):
        """Series for ``x -> f(x + shift)`` (via the monomial basis)."""
        shift = np.asarray(shift, dtype=float)
        out = {}
        for m, c in self.to_monomials().coeffs.items():
            for a in itertools.product(*(range(e + 1) for e in m)):
                w = c * math.prod(math.comb(e, ai) * shift[i] ** (e - ai) for i, (e, ai) in enumerate(zip(m, a)))
                out[a] = out.get(a, 0.0) + w
        return HermiteSeries.from_monomials(self.dim, out)

    def __add__(self, other):
        if not isinstance(other, HermiteSeries) or other.dim != self.dim:
            return NotImplemented
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return HermiteSeries(self.dim, out)

    def __mul__(self, scalar):
        return HermiteSeries(self.dim, {m: scalar * c for m, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other

    def to_records(self):
        return [{"exponents": list(m), "coeff": float(c)} for m, c in self.coeffs.items()]

    @classmethod
    def from_records(cls, records, dim=None):
        records = list(records)
        if dim is None:
            if not records:
                raise ValueError("cannot infer dimension of an empty series")
            dim = len(records[0]["exponents"])
        out = {}
        for r in records:
            m = tuple(r["exponents"])
            out[m] = out.get(m, 0.0) + float(r["coeff"])
        return cls(dim, out)

    def dumps(self):
        return json.dumps({"dim": self.dim, "terms": self.to_records()}, indent=1)

    @classmethod
    def loads(cls, text):
        data = json.loads(text)
        if isinstance(data, list):
            return cls.from_records(data)
        return cls.from_records(data["terms"], dim=data["dim"])

    def __repr__(self):
        return f"HermiteSeries(dim={self.dim}, terms={len(self.coeffs)}, degree={self.degree})"


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Monomial-basis polynomial ``sum_m c_m x^m``."""

    dim: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(self.dim, self.coeffs))

    @property
    def degree(self):
        return max((sum(m) for m in self.coeffs), default=0)

    def __call__(self, x):
        x = np.asarray(x)
        return _sparse_eval(self.coeffs, x, _pow_values, dtype=float)


def coordinate(dim, i, power=1):
    """Series for ``x_i ** power`` (0-based ``i``)."""
    m = [0] * dim
    m[i] = power
    return HermiteSeries.from_monomials(dim, {tuple(m): 1.0})


def norm_sq(dim):
    return HermiteSeries.from_monomials(
        dim, {tuple(2 if j == i else 0 for j in range(dim)): 1.0 for i in range(dim)}
    )


def random_series(rng, dim, max_degree, n_terms=None, scale=1.0):
    """Random series with normally distributed coefficients (test helper)."""
    pool = [m for k in range(max_degree + 1) for m in multi_indices(k, dim)]
    if n_terms is None or n_terms >= len(pool):
        chosen = pool
    else:
        chosen = [pool[i] for i in sorted(rng.choice(len(pool), size=n_terms, replace=False))]
    return HermiteSeries(dim, {m: scale * float(rng.standard_normal()) for m in chosen})


# Gaussian expectations


def gaussian_moment(mu, sigma, m):
    """``E[prod_i x_i^{m_i}]`` for ``x ~ N(mu, sigma)`` by Stein's identity."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    m = tuple(int(e) for e in m)
    if len(m) != mu.shape[0]:
        raise ValueError("multi-index length does not match the mean")

    @lru_cache(maxsize=None)
    def moment(a):
        try:
            i = next(j for j, e in enumerate(a) if e)
        except StopIteration:
            return 1.0
        b = list(a)
        b[i] -= 1
        total = mu[i] * moment(tuple(b))
        for j, e in enumerate(b):
            if e and sigma[i, j] != 0.0:
                c = list(b)
                c[j] -= 1
                total += sigma[i, j] * e * moment(tuple(c))
        return total

    return moment(m)


def _normal_series_coeff(normals_sub, a):
    """``[t^a] exp(-|N t|^2 / 2)`` with ``t`` restricted to the columns of ``normals_sub``."""
    n = normals_sub.shape[0]

    @lru_cache(maxsize=None)
    def single(k, b):
        s = sum(b)
        if s % 2:
            return 0.0
        j = s // 2
        u = normals_sub[k]
        val = (-0.5) ** j * math.factorial(s) / (math.factorial(j) * mfact(b))
        return val * math.prod(u[i] ** e for i, e in enumerate(b) if e)

    @lru_cache(maxsize=None)
    def prod_from(k, b):
        if k == n - 1:
            return single(k, b)
        total = 0.0
        for c in itertools.product(*(range(e + 1) for e in b)):
            head = single(k, c)
            if head != 0.0:
                total += head * prod_from(k + 1, tuple(e - ci for e, ci in zip(b, c)))
        return total

    if n == 0:
        return 1.0 if not any(a) else 0.0
    return prod_from(0, tuple(a))


def restricted_transform(f, normals):
    """Polynomial ``p -> E[f(p + (I - N^T N) z)]``, ``z`` standard normal.

    For ``p`` in the span of the (orthonormal) rows of ``normals`` this is the
    transform of ``f`` over the flats with those normals, as a function of the
    offset. Exact up to rounding.
    """
    _check_degree(f.degree)
    N = np.asarray(normals, dtype=float).reshape(-1, f.dim)
    out = {}
    for m, c in f.coeffs.items():
        support = [j for j, e in enumerate(m) if e]
        ms = tuple(m[j] for j in support)
        Ns = N[:, support]
        for a in itertools.product(*(range(e + 1) for e in ms)):
            q = _normal_series_coeff(Ns, a)
            if q == 0.0:
                continue
            rest = tuple(e - ai for e, ai in zip(ms, a))
            w = c * q * mfact(ms) / mfact(rest)
            key = [0] * f.dim
            for j, e in zip(support, rest):
                key[j] = e
            key = tuple(key)
            out[key] = out.get(key, 0.0) + w
    return Polynomial(f.dim, out)


def expect_under(f, g):
    """Exact ``E[f]`` under the Gaussian carried by a flat."""
    from .flats import SubspaceGaussian

    flat = g.flat if isinstance(g, SubspaceGaussian) else g
    if flat.dim != f.dim:
        raise ValueError(f"series of dimension {f.dim} on a flat of dimension {flat.dim}")
    return float(restricted_transform(f, flat.normals)(flat.offset))


# Black-box functions


@dataclass(frozen=True, eq=False)
class PointFunction:
    """Deterministic black-box function on R^dim, vectorized over rows."""

    dim: int
    func: object
    label: str
    series: HermiteSeries = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"point of dimension {x.shape[-1]}, expected {self.dim}")
        if x.ndim == 1:
            return float(self.func(x[None, :])[0])
        return np.asarray(self.func(x), dtype=float)

    @property
    def degree(self):
        if self.series is None:
            raise TypeError(f"{self.label} has no polynomial representation")
        return self.series.degree


def point_function(name, dim):
    """Look up a registry function.

    Names: ``one``, ``coord:i`` (1-based), ``norm_sq``, ``exp_linear:a1,...,ad``,
    ``indicator_ball:r``.
    """
    head, _, arg = name.partition(":")
    if head == "one" and not arg:
        return PointFunction(dim, lambda x: np.ones(x.shape[0]), name, HermiteSeries.constant(dim))
    if head == "coord":
        i = int(arg) - 1
        if not 0 <= i < dim:
            raise ValueError(f"coordinate index {arg} outside 1..{dim}")
        return PointFunction(dim, lambda x: x[:, i].copy(), name, coordinate(dim, i))
    if head == "norm_sq" and not arg:
        return PointFunction(dim, lambda x: np.sum(x * x, axis=1), name, norm_sq(dim))
    if head == "exp_linear":
        a = np.array([float(s) for s in arg.split(",")])
        if a.shape != (dim,):
            raise ValueError(f"exp_linear needs {dim} coefficients, got {a.size}")
        return PointFunction(dim, lambda x: np.exp(x @ a), name)
    if head == "indicator_ball":
        r = float(arg)
        if r <= 0:
            raise ValueError("indicator_ball radius must be positive")
        return PointFunction(dim, lambda x: (np.sum(x * x, axis=1) <= r * r).astype(float), name)
    raise ValueError(f"unknown point function {name!r}")


def as_callable(f):
    """Vectorized evaluator for a series or a point function."""
    if isinstance(f, HermiteSeries):
        return f.evaluate
    return f


def as_series(f):
    """Polynomial representation when one exists, else ``None``."""
    if isinstance(f, HermiteSeries):
        return f
    return getattr(f, "series", None)


# Quadrature


def gauss_hermite(level):
    """Nodes and weights integrating against the standard normal density."""
    x, w = np.polynomial.hermite_e.hermegauss(int(level))
    return x, w / math.sqrt(2.0 * math.pi)


def tensor_grid(level, k):
    """Tensor Gauss-Hermite rule in ``k`` dimensions: ``level**k`` nodes."""
    x, w = gauss_hermite(level)
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    nodes = np.stack(np.meshgrid(*([x] * k), indexing="ij"), axis=-1).reshape(-1, k)
    weights = np.prod(np.stack(np.meshgrid(*([w] * k), indexing="ij"), axis=-1).reshape(-1, k), axis=1)
    return nodes, weights
