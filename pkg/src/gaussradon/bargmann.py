"""Segal-Bargmann transform on L^2 of the standard Gaussian.

``(S f)(a) = exp(-a.a/2) * E[exp(a.x) f(x)]`` with the bilinear dot product.
In the probabilists' normalization ``S He_m = z^m``, so on Hermite series the
transform is a relabeling of coefficients and the norm of the image is
``(sum |c_m|^2 m!)^(1/2)``.
"""

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import rng
from .errors import EngineUnavailableError, NonRealFunctionError
from .hermite import HermiteSeries, _clean, _pow_values, _sparse_eval, as_callable, mfact, tensor_grid

MAX_QUAD_DIM = 6
IMAG_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class HolomorphicSeries:
    """Polynomial ``z -> sum_m c_m z^m`` on C^dim with complex coefficients."""

    dim: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = _clean(self.dim, {m: complex(c) for m, c in self.coeffs.items()})
        object.__setattr__(self, "coeffs", cleaned)

    @property
    def degree(self):
        return max((sum(m) for m in self.coeffs), default=0)

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.dim:
            raise ValueError(f"point of dimension {z.shape[-1]}, expected {self.dim}")
        return _sparse_eval(self.coeffs, z, _pow_values, dtype=complex)

    def __add__(self, other):
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0j) + c
        return HolomorphicSeries(self.dim, out)

    def __mul__(self, scalar):
        return HolomorphicSeries(self.dim, {m: scalar * c for m, c in self.coeffs.items()})

    __rmul__ = __mul__

    def to_records(self):
        return [{"exponents": list(m), "re": c.real, "im": c.imag} for m, c in self.coeffs.items()]

    @classmethod
    def from_records(cls, records, dim=None):
        records = list(records)
        if dim is None:
            dim = len(records[0]["exponents"])
        return cls(dim, {tuple(r["exponents"]): complex(r["re"], r["im"]) for r in records})

    def dumps(self):
        return json.dumps({"dim": self.dim, "terms": self.to_records()}, indent=1)

    @classmethod
    def loads(cls, text):
        data = json.loads(text)
        if isinstance(data, list):
            return cls.from_records(data)
        return cls.from_records(data["terms"], dim=data["dim"])


def sb_forward(f):
    """Exact transform of a Hermite series: ``He_m -> z^m``."""
    return HolomorphicSeries(f.dim, {m: complex(c) for m, c in f.coeffs.items()})


def sb_inverse(F):
    """Inverse transform; rejects coefficients with imaginary part above 1e-6."""
    leak = max((abs(c.imag) for c in F.coeffs.values()), default=0.0)
    if leak > IMAG_TOL:
        raise NonRealFunctionError(f"imaginary coefficient of size {leak:.3g} exceeds {IMAG_TOL:g}")
    return HermiteSeries(F.dim, {m: c.real for m, c in F.coeffs.items()})


def imaginary_leakage(F):
    return max((abs(c.imag) for c in F.coeffs.values()), default=0.0)


def sb_norm(F):
    return math.sqrt(sum(abs(c) ** 2 * mfact(m) for m, c in F.coeffs.items()))


class SBValue(NamedTuple):
    value: complex
    error: float
    reliable: bool


def _sb_at_level(f, z, level):
    nodes, weights = tensor_grid(level, z.shape[0])
    vals = np.asarray(as_callable(f)(nodes), dtype=float)
    return complex(np.exp(-0.5 * (z @ z)) * np.sum(weights * np.exp(nodes @ z) * vals))


def sb_quadrature(f, z, level=16):
    """Tensor Gauss-Hermite evaluation of the transform at ``z``.

    The exponential is evaluated at the real nodes, which shifts the effective
    weight by ``z``. Results are flagged reliable for ``|z|^2 <= level/2``;
    the error estimate compares ``level`` with ``level + 4`` everywhere.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (f.dim,):
        raise ValueError(f"point of dimension {z.shape}, expected ({f.dim},)")
    if f.dim > MAX_QUAD_DIM:
        raise EngineUnavailableError(f"quadrature in {f.dim} dimensions exceeds {MAX_QUAD_DIM}")
    if level < 8:
        raise ValueError("quadrature level must be at least 8")
    v = _sb_at_level(f, z, level)
    v_hi = _sb_at_level(f, z, level + 4)
    reliable = float(np.sum(np.abs(z) ** 2)) <= level / 2
    return SBValue(v, abs(v - v_hi), reliable)


def sb_monte_carlo(f, z, seed, samples):
    """Plain Monte Carlo of the defining integral at real ``z``; (value, stderr)."""
    z = np.asarray(z, dtype=float)
    x = rng.standard_normal(seed, int(samples), f.dim)
    vals = np.exp(x @ z) * np.asarray(as_callable(f)(x), dtype=float)
    scale = math.exp(-0.5 * float(z @ z))
    return scale * float(vals.mean()), scale * float(vals.std(ddof=1) / math.sqrt(vals.size))
