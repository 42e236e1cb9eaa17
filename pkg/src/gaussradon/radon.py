"""Gaussian Radon transform over flats, and profiles along one direction.

The transform of ``f`` over a flat is the mean of ``f`` under the Gaussian
the flat carries. Three engines compute it:

``exact``
    closed form for Hermite series;
``quadrature``
    tensor Gauss-Hermite over an orthonormal basis of the direction space,
    available while that space has dimension at most 6;
``mc``
    seeded Monte Carlo with a reported standard error.
"""

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import flats as fl
from .errors import EngineUnavailableError
from .hermite import HermiteSeries, as_callable, as_series, gauss_hermite, restricted_transform, tensor_grid

ENGINES = ("exact", "quadrature", "mc")
MAX_QUAD_DIM = 6
DEFAULT_LEVEL = 12


def _eval_chunked(fn, x, block=1 << 16):
    return np.concatenate([np.atleast_1d(fn(x[s : s + block])) for s in range(0, x.shape[0], block)])


def _exact_series(f):
    series = as_series(f)
    if series is None:
        raise EngineUnavailableError(
            f"exact engine needs a Hermite series; {getattr(f, 'label', f)!r} has none (use quadrature or mc)"
        )
    return series


def gauss_radon(f, flat, engine="exact", level=DEFAULT_LEVEL, seed=None, samples=None, keys=(), threads=1):
    """Mean of ``f`` under the Gaussian on ``flat``.

    Returns
    -------
    value : float
    stderr : float or None
        Monte Carlo standard error; ``None`` for deterministic engines.
    """
    if flat.dim != f.dim:
        raise ValueError(f"function of dimension {f.dim} on a flat of dimension {flat.dim}")
    if engine == "exact":
        series = _exact_series(f)
        return float(restricted_transform(series, flat.normals)(flat.offset)), None
    if engine == "quadrature":
        k = flat.dim - flat.codim
        if k > MAX_QUAD_DIM:
            raise EngineUnavailableError(
                f"quadrature over {k} dimensions exceeds the limit of {MAX_QUAD_DIM} (switch to mc)"
            )
        w_nodes, weights = tensor_grid(level, k)
        x = flat.offset + w_nodes @ flat.tangent_basis
        vals = _eval_chunked(as_callable(f), x)
        return float(weights @ vals), None
    if engine == "mc":
        if seed is None or not samples:
            raise ValueError("mc engine needs seed and samples")
        x = fl.sample(fl.SubspaceGaussian(flat), seed, int(samples), keys=keys, threads=threads)
        vals = _eval_chunked(as_callable(f), x)
        if vals.size < 2:
            return float(vals.mean()), float("inf")
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


@dataclass(frozen=True, eq=False)
class RadonProfile:
    """Transform values over the hyperplanes ``t u + u^perp`` for a grid of ``t``."""

    direction: np.ndarray
    offsets: np.ndarray
    values: np.ndarray
    stderr: np.ndarray = None
    engine: str = "exact"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        u = np.asarray(self.direction, dtype=float)
        t = np.asarray(self.offsets, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("profile direction must be a unit vector")
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("offsets and values must be 1-D arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("offsets must be strictly increasing")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if (self.stderr is not None) != (self.engine == "mc"):
            raise ValueError("stderr must be present exactly when engine is mc")
        object.__setattr__(self, "direction", u)
        object.__setattr__(self, "offsets", t)
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))

    @property
    def dim(self):
        return self.direction.shape[0]

    def to_csv(self, extra_header=None):
        meta = {"d": self.dim, "u": [float(c) for c in self.direction], "engine": self.engine}
        meta["seed"] = self.meta.get("seed")
        for key in ("level", "samples"):
            if key in self.meta:
                meta[key] = self.meta[key]
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta) + "\n")
        for line in extra_header or ():
            buf.write("# " + line + "\n")
        buf.write("t,value,stderr\n")
        se = self.stderr if self.stderr is not None else [None] * len(self.offsets)
        for t, v, s in zip(self.offsets, self.values, se):
            buf.write(f"{float(t)!r},{float(v)!r},{'' if s is None else repr(float(s))}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("profile CSV must start with a metadata comment line")
        meta = json.loads(lines[0][1:].strip())
        body = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
        if not body or body[0].strip() != "t,value,stderr":
            raise ValueError("profile CSV header must be 't,value,stderr'")
        t, v, s = [], [], []
        for ln in body[1:]:
            a, b, c = ln.split(",")
            t.append(float(a))
            v.append(float(b))
            s.append(float(c) if c.strip() else None)
        engine = meta["engine"]
        stderr = None
        if engine == "mc":
            stderr = np.array(s, dtype=float)
        extra = {k: meta[k] for k in ("seed", "level", "samples") if k in meta}
        return cls(np.array(meta["u"], dtype=float), np.array(t), np.array(v), stderr, engine, extra)


def node_grid(level):
    """Profile offsets at the ``level`` Gauss-Hermite nodes of the standard normal."""
    return gauss_hermite(level)[0]


def radon_profile(f, u, offsets, engine="exact", level=DEFAULT_LEVEL, seed=None, samples=None, threads=1):
    """Transform of ``f`` over ``t u + u^perp`` for every ``t`` in ``offsets``.

    Monte Carlo points use substream ``(j,)`` of ``seed`` for the ``j``-th
    offset, so profiles are reproducible regardless of ``threads``.
    """
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    offsets = np.asarray(offsets, dtype=float)
    meta = {"seed": seed}
    if engine == "exact":
        series = _exact_series(f)
        poly = restricted_transform(series, u[None, :])
        values = np.atleast_1d(poly(offsets[:, None] * u))
        return RadonProfile(u, offsets, values, None, engine, meta)
    if engine == "quadrature":
        meta["level"] = int(level)
        vals = [gauss_radon(f, fl.hyperplane(t, u), "quadrature", level=level)[0] for t in offsets]
        return RadonProfile(u, offsets, np.array(vals), None, engine, meta)
    if engine == "mc":
        meta["samples"] = int(samples)
        from .rng import parallel_map

        def one(j):
            return gauss_radon(f, fl.hyperplane(offsets[j], u), "mc", seed=seed, samples=samples, keys=(j,))

        out = parallel_map(one, range(len(offsets)), threads)
        return RadonProfile(u, offsets, np.array([v for v, _ in out]), np.array([s for _, s in out]), engine, meta)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def series_shift(f, shift):
    """Helper for translation checks: ``x -> f(x + shift)`` for either function kind."""
    if isinstance(f, HermiteSeries):
        return f.shifted(shift)
    shift = np.asarray(shift, dtype=float)
    from .hermite import PointFunction

    return PointFunction(f.dim, lambda x: f.func(x + shift), f"{f.label}+shift")
