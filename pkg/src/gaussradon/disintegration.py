"""Disintegration of the standard Gaussian over flats, as numerical checks.

For a subspace ``Q_0`` of finite codimension with orthonormal normals
``u_1..u_n``, averaging the transforms over the flats ``p + Q_0`` against the
standard Gaussian on the normal span recovers the plain Gaussian mean, and the
transform composed with the projection ``x -> sum_k <x,u_k> u_k`` is the
conditional expectation of ``f`` given those coordinates.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import flats as fl
from . import rng
from .errors import EngineUnavailableError
from .hermite import as_callable, as_series, restricted_transform, tensor_grid
from .radon import MAX_QUAD_DIM, gauss_radon

DEFAULT_TOL = 1e-8


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _normals_flat(normals, dim):
    if isinstance(normals, fl.Flat):
        return fl.make_flat(normals.normals, dim=normals.dim)
    return fl.make_flat(list(normals), dim=dim)


def projection_map(normals, x):
    """``x -> sum_k <x, u_k> u_k`` for orthonormalized ``normals`` (row-wise)."""
    x = np.asarray(x, dtype=float)
    flat = _normals_flat(normals, x.shape[-1])
    return (x @ flat.normals.T) @ flat.normals


@dataclass
class DisintegrationReport:
    lhs: float
    rhs: float
    lhs_stderr: float = None
    rhs_stderr: float = None
    engines: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOL

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)

    @property
    def combined_stderr(self):
        parts = [s for s in (self.lhs_stderr, self.rhs_stderr) if s is not None]
        if not parts:
            return None
        return math.sqrt(sum(s * s for s in parts))

    @property
    def threshold(self):
        se = self.combined_stderr
        if se is None:
            return self.tolerance
        return 3.0 * se + self.tolerance

    @property
    def passed(self):
        return self.residual <= self.threshold

    def to_text(self, header=()):
        rows = [
            ("lhs", self.lhs),
            ("rhs", self.rhs),
            ("residual", self.residual),
            ("lhs_stderr", self.lhs_stderr),
            ("rhs_stderr", self.rhs_stderr),
            ("combined_stderr", self.combined_stderr),
            ("threshold", self.threshold),
            ("passed", self.passed),
        ]
        rows += [(f"engine.{k}", v) for k, v in self.engines.items()]
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        buf.write("[disintegration]\n")
        for k, v in rows:
            buf.write(f"{k} = {_fmt(v)}\n")
        return buf.getvalue()


def _inner_values(f, flat0, points, engine, level, seed, inner_samples, keys):
    """Transform over ``p + Q_0`` for each row ``p`` of ``points``; (values, stderrs)."""
    if engine == "exact":
        series = as_series(f)
        if series is None:
            raise EngineUnavailableError("exact inner engine needs a Hermite series (use quadrature or mc)")
        poly = restricted_transform(series, flat0.normals)
        return np.atleast_1d(poly(points)), None
    if engine == "quadrature":
        vals = [gauss_radon(f, flat0.translated(p), "quadrature", level=level)[0] for p in points]
        return np.array(vals), None
    if engine == "mc":
        k = int(inner_samples or 1)
        z = rng.standard_normal(seed, points.shape[0] * k, flat0.dim, keys=keys)
        x = points[:, None, :] + flat0.project(z).reshape(points.shape[0], k, flat0.dim)
        vals = np.asarray(as_callable(f)(x.reshape(-1, flat0.dim))).reshape(points.shape[0], k)
        means = vals.mean(axis=1)
        se = vals.std(axis=1, ddof=1) / math.sqrt(k) if k > 1 else None
        return means, se
    raise ValueError(f"unknown engine {engine!r}")


def disintegration_check(
    f,
    normals,
    inner_engine="exact",
    outer_engine="quadrature",
    level=12,
    seed=None,
    samples=None,
    inner_samples=None,
    lhs_engine=None,
    tol=DEFAULT_TOL,
):
    """Compare ``int f dgamma_d`` with the Gaussian average of the flat transforms.

    ``outer_engine`` integrates over the normal span (``quadrature`` up to six
    dimensions, or ``mc`` with ``samples`` draws). The left side uses
    ``lhs_engine``, defaulting to ``mc`` whenever either side is Monte Carlo.
    """
    dim = f.dim
    flat0 = _normals_flat(normals, dim)
    n = flat0.codim
    if lhs_engine is None:
        lhs_engine = "mc" if "mc" in (inner_engine, outer_engine) else inner_engine
    lhs, lhs_se = gauss_radon(f, fl.whole_space(dim), lhs_engine, level=level, seed=seed, samples=samples, keys=(0,))

    if outer_engine == "quadrature":
        if n > MAX_QUAD_DIM:
            raise EngineUnavailableError(
                f"outer quadrature over {n} dimensions exceeds {MAX_QUAD_DIM} (switch to mc)"
            )
        w, weights = tensor_grid(level, n)
        points = w @ flat0.normals if n else np.zeros((1, dim))
        vals, se = _inner_values(f, flat0, points, inner_engine, level, seed, inner_samples, keys=(1,))
        rhs = float(weights @ vals)
        rhs_se = None if se is None else float(math.sqrt(np.sum((weights * se) ** 2)))
    elif outer_engine == "mc":
        if seed is None or not samples:
            raise ValueError("mc outer engine needs seed and samples")
        w = rng.standard_normal(seed, int(samples), n, keys=(2,))
        points = w @ flat0.normals if n else np.zeros((int(samples), dim))
        vals, _ = _inner_values(f, flat0, points, inner_engine, level, seed, inner_samples, keys=(3,))
        rhs = float(vals.mean())
        rhs_se = float(vals.std(ddof=1) / math.sqrt(vals.size))
    else:
        raise ValueError(f"unknown outer engine {outer_engine!r}")

    engines = {"lhs": lhs_engine, "inner": inner_engine, "outer": outer_engine}
    return DisintegrationReport(float(lhs), rhs, lhs_se, rhs_se, engines, tol)


def lr_transfer_check(f, normals, r, level=12):
    """Return ``(int |G f|^r dgamma_n, int |f|^r dgamma_d)`` on one rotated grid.

    Both sides share the tensor rule built in coordinates (normals, tangent
    basis), so the inner averages are convex combinations and the inequality
    holds node by node.
    """
    dim = f.dim
    if dim > MAX_QUAD_DIM:
        raise EngineUnavailableError(f"L^r check needs dimension <= {MAX_QUAD_DIM}")
    flat0 = _normals_flat(normals, dim)
    n = flat0.codim
    basis = np.vstack([flat0.normals, flat0.tangent_basis])
    coords, weights = tensor_grid(level, dim)
    vals = np.asarray(as_callable(f)(coords @ basis), dtype=float)
    n_out, n_in = level**n, level ** (dim - n)
    vals = vals.reshape(n_out, n_in)
    w = weights.reshape(n_out, n_in)
    w_out = w.sum(axis=1)
    g = (w * vals).sum(axis=1) / w_out
    return float(w_out @ np.abs(g) ** r), float(np.sum(w * np.abs(vals) ** r))


@dataclass
class BinRow:
    index: tuple
    count: int
    center: tuple
    f_mean: float
    f_stderr: float
    exact_at_center: float
    exact_bin_mean: float
    diff_stderr: float
    included: bool

    @property
    def diff(self):
        return self.f_mean - self.exact_bin_mean

    @property
    def passed(self):
        return abs(self.diff) <= 3.0 * self.diff_stderr + 1e-12


@dataclass
class OrthoRow:
    name: str
    residual: float
    stderr: float

    @property
    def passed(self):
        return abs(self.residual) <= 3.0 * self.stderr + 1e-12


@dataclass
class CondExpReport:
    """Binned and orthogonality checks of the conditional-expectation identity.

    The orthogonality residuals ``E[(f - G(Px)) g(Px)]`` test the defining
    property directly. The binned comparison only resolves the identity at
    the bin resolution; each bin compares the sample mean of ``f`` with the
    sample mean of the exact transform over the same points.
    """

    total: int
    codim: int
    bins: list
    orthogonality: list
    tower_mean: float
    tower_stderr: float
    exact_mean: float
    warnings: list = field(default_factory=list)

    @property
    def tower_passed(self):
        return abs(self.tower_mean - self.exact_mean) <= 3.0 * self.tower_stderr + 1e-12

    @property
    def bins_passed(self):
        return all(b.passed for b in self.bins if b.included)

    @property
    def orthogonality_passed(self):
        return all(o.passed for o in self.orthogonality)

    @property
    def passed(self):
        return self.orthogonality_passed and self.bins_passed and self.tower_passed

    def to_text(self, header=()):
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        buf.write("[condexp]\n")
        buf.write(f"samples = {self.total}\n")
        buf.write(f"codim = {self.codim}\n")
        buf.write("note = orthogonality residuals are the primary test; bins resolve the identity only at bin resolution\n")
        buf.write(f"tower_mean = {_fmt(self.tower_mean)}\n")
        buf.write(f"tower_stderr = {_fmt(self.tower_stderr)}\n")
        buf.write(f"exact_mean = {_fmt(self.exact_mean)}\n")
        buf.write(f"tower_passed = {_fmt(self.tower_passed)}\n")
        buf.write(f"orthogonality_passed = {_fmt(self.orthogonality_passed)}\n")
        buf.write(f"bins_passed = {_fmt(self.bins_passed)}\n")
        buf.write(f"passed = {_fmt(self.passed)}\n")
        buf.write("[orthogonality]\n")
        for o in self.orthogonality:
            buf.write(f"{o.name} = {_fmt(o.residual)} +- {_fmt(o.stderr)} ({'pass' if o.passed else 'FAIL'})\n")
        buf.write("[warnings]\n")
        for w in self.warnings:
            buf.write(f"{w}\n")
        return buf.getvalue()

    def bins_csv(self):
        buf = io.StringIO()
        cols = [f"bin{k}" for k in range(self.codim)] + [f"center{k}" for k in range(self.codim)]
        cols += ["count", "f_mean", "f_stderr", "exact_at_center", "exact_bin_mean", "diff_stderr", "included", "passed"]
        buf.write(",".join(cols) + "\n")
        for b in self.bins:
            row = [str(i) for i in b.index] + [repr(float(c)) for c in b.center]
            row += [str(b.count)] + [repr(float(v)) for v in (b.f_mean, b.f_stderr, b.exact_at_center, b.exact_bin_mean, b.diff_stderr)]
            row += [_fmt(b.included), _fmt(b.passed)]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def bins_per_axis(bins, n):
    """Equal-probability cells: ``bins`` per axis for n=1, ``floor(sqrt(bins))`` for n=2."""
    return bins if n == 1 else max(2, int(math.isqrt(bins)))


def cond_exp_check(f, normals, samples=20000, bins=20, seed=0, min_count=50, threads=1):
    """Sample ``x ~ gamma_d`` and test ``E[f | <x,u_k>] = G f(P x)``."""
    series = as_series(f)
    if series is None:
        raise EngineUnavailableError("conditional-expectation check needs a Hermite series")
    dim = f.dim
    flat0 = _normals_flat(normals, dim)
    n = flat0.codim
    if n not in (1, 2):
        raise ValueError("conditional-expectation check supports 1 or 2 normals")
    if samples < 10_000:
        raise ValueError("conditional-expectation check needs at least 10^4 samples")

    x = rng.standard_normal(seed, int(samples), dim, keys=(0,), threads=threads)
    w = x @ flat0.normals.T
    fx = np.asarray(as_callable(f)(x), dtype=float)
    poly = restricted_transform(series, flat0.normals)
    gx = np.asarray(poly(w @ flat0.normals), dtype=float)
    resid = fx - gx

    k = bins_per_axis(bins, n)
    edges = norm.ppf(np.linspace(0.0, 1.0, k + 1))
    cell = np.stack([np.clip(np.searchsorted(edges, w[:, a], side="right") - 1, 0, k - 1) for a in range(n)], axis=1)
    flat_id = np.ravel_multi_index(cell.T, (k,) * n)

    rows, warnings = [], []
    for cid in range(k**n):
        idx = np.unravel_index(cid, (k,) * n)
        mask = flat_id == cid
        c = int(mask.sum())
        if c == 0:
            center = tuple(float("nan") for _ in range(n))
            rows.append(BinRow(idx, 0, center, float("nan"), float("nan"), float("nan"), float("nan"), float("nan"), False))
            warnings.append(f"bin {idx} is empty")
            continue
        wc = w[mask].mean(axis=0)
        f_sel, g_sel, r_sel = fx[mask], gx[mask], resid[mask]
        sd = (lambda a: float(a.std(ddof=1) / math.sqrt(c)) if c > 1 else float("inf"))
        row = BinRow(
            idx,
            c,
            tuple(float(v) for v in wc),
            float(f_sel.mean()),
            sd(f_sel),
            float(poly(wc @ flat0.normals)),
            float(g_sel.mean()),
            sd(r_sel),
            c >= min_count,
        )
        if not row.included:
            warnings.append(f"bin {idx} has {c} < {min_count} samples; excluded from pass/fail")
        rows.append(row)

    family = [("1", np.ones(len(w)))]
    family += [(f"w{a + 1}", w[:, a]) for a in range(n)]
    family += [(f"w{a + 1}^2", w[:, a] ** 2) for a in range(n)]
    ortho = []
    for name, g in family:
        prod = resid * g
        ortho.append(OrthoRow(name, float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(prod.size))))

    exact_mean = float(restricted_transform(series, np.empty((0, dim)))(np.zeros(dim)))
    return CondExpReport(
        int(samples),
        n,
        rows,
        ortho,
        float(gx.mean()),
        float(gx.std(ddof=1) / math.sqrt(gx.size)),
        exact_mean,
        warnings,
    )
