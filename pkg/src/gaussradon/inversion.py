"""Recover a Hermite series from Radon profiles along finitely many directions.

Along a unit direction ``u`` the profile ``g(t)`` (the transform over
``t u + u^perp``) has one-dimensional Segal-Bargmann transform equal to
``r -> S f(r u)``. Its Hermite coefficients ``a_k = E[g He_k] / k!`` are
therefore the power-series coefficients of ``S f`` along the ray, and
``a_k(u) = sum_{|m|=k} c_m u^m`` where ``c_m`` are the coefficients of ``S f``,
which equal the Hermite coefficients of ``f``. Each degree is solved on its
own from the directions' monomial matrix.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import radon as rd
from .bargmann import HolomorphicSeries, imaginary_leakage, sb_inverse
from .errors import DesignFailureError, InsufficientGridError, StageError
from .hermite import HermiteSeries, gauss_hermite, he_values, multi_indices

MAX_CONDITION = 1e6
MAX_RESAMPLES = 50
RCOND = 1e-10


def n_homogeneous(k, d):
    return math.comb(k + d - 1, d - 1)


def monomial_matrix(directions, k):
    """``V[j, m] = prod_i u_ji^m_i`` over ``|m| = k`` in graded-lex order."""
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    idx = list(multi_indices(k, U.shape[1]))
    V = np.ones((U.shape[0], len(idx)))
    for col, m in enumerate(idx):
        for i, e in enumerate(m):
            if e:
                V[:, col] *= U[:, i] ** e
    return V, idx


def _condition(V):
    s = np.linalg.svd(V, compute_uv=False)
    if s.size == 0 or s[-1] <= s[0] * 1e-15 or V.shape[0] < V.shape[1]:
        return float("inf")
    return float(s[0] / s[-1])


@dataclass(frozen=True, eq=False)
class DirectionDesign:
    degree: int
    dim: int
    directions: np.ndarray
    matrix: np.ndarray
    indices: list
    conditioning: float

    @classmethod
    def build(cls, k, directions):
        U = np.atleast_2d(np.asarray(directions, dtype=float))
        U = U / np.linalg.norm(U, axis=1, keepdims=True)
        V, idx = monomial_matrix(U, k)
        return cls(k, U.shape[1], U, V, idx, _condition(V))


def _sphere(rng, count, d):
    x = rng.standard_normal((count, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def make_design(k, d, strategy="axes+random", directions=None, seed=0, count=None):
    """Directions whose degree-``k`` monomial matrix has full column rank.

    Strategies: ``axes`` (coordinate axes only), ``axes+random`` (axes plus
    seeded uniform directions, ``2 * C(k+d-1, d-1)`` in total unless ``count``
    is given) and ``explicit`` (use ``directions`` as given). Designs with
    condition number above 1e6 are redrawn up to 50 times.
    """
    need = n_homogeneous(k, d)
    if strategy == "explicit":
        design = DirectionDesign.build(k, directions)
        if design.directions.shape[1] != d:
            raise ValueError("explicit directions have the wrong dimension")
        if design.conditioning > MAX_CONDITION:
            raise DesignFailureError(
                f"explicit design for degree {k} is ill-conditioned ({design.conditioning:.3g})",
                design.conditioning,
            )
        return design
    if strategy == "axes":
        design = DirectionDesign.build(k, np.eye(d))
        if design.conditioning > MAX_CONDITION:
            raise DesignFailureError(f"axes cannot resolve degree {k} in dimension {d}", design.conditioning)
        return design
    if strategy != "axes+random":
        raise ValueError(f"unknown design strategy {strategy!r}")
    total = count if count is not None else 2 * need
    total = max(total, d)
    if total < need:
        raise ValueError(f"{total} directions cannot resolve {need} degree-{k} monomials")
    from .rng import stream

    best = float("inf")
    for attempt in range(MAX_RESAMPLES):
        g = stream(seed, k, d, attempt)
        U = np.vstack([np.eye(d), _sphere(g, total - d, d)])
        design = DirectionDesign.build(k, U)
        if design.conditioning <= MAX_CONDITION:
            return design
        best = min(best, design.conditioning)
    raise DesignFailureError(f"no acceptable design after {MAX_RESAMPLES} draws (best {best:.3g})", best)


@dataclass
class ProfileCoeffs:
    coeffs: np.ndarray
    stderr: np.ndarray = None
    method: str = "nodes"
    amplification: np.ndarray = None


def _is_node_grid(t):
    L = len(t)
    if L < 1:
        return False
    nodes = gauss_hermite(L)[0]
    return np.allclose(t, nodes, rtol=0, atol=1e-12)


def profile_to_coeffs(profile, max_degree):
    """Hermite coefficients ``a_0..a_D`` of a profile.

    Profiles on a Gauss-Hermite node grid of level ``L >= D + 1`` use the
    quadrature ``a_k = sum_i w_i g(t_i) He_k(t_i) / k!``. Other grids fall back
    to least squares with weights of the standard normal density and need at
    least ``2 (D + 1)`` points. Standard errors propagate when present.
    """
    D = int(max_degree)
    t, g = profile.offsets, profile.values
    se = profile.stderr
    fact = np.array([math.factorial(k) for k in range(D + 1)], dtype=float)
    if _is_node_grid(t) and len(t) >= D + 1:
        _, w = gauss_hermite(len(t))
        A = (w[:, None] * he_values(t, D)) / fact  # (L, D+1)
        coeffs = g @ A
        amp = np.sqrt(np.sum(A * A, axis=0))
        stderr = None if se is None else np.sqrt((se * se) @ (A * A))
        return ProfileCoeffs(coeffs, stderr, "nodes", amp)
    if len(t) < 2 * (D + 1):
        raise InsufficientGridError(
            f"{len(t)} offsets cannot determine {D + 1} coefficients (need a level >= {D + 1} node grid "
            f"or >= {2 * (D + 1)} points)"
        )
    sw = np.sqrt(np.exp(-0.5 * t * t))
    H = he_values(t, D)
    pinv = np.linalg.pinv(sw[:, None] * H)
    M = pinv * sw[None, :]  # coeffs = M @ g
    coeffs = M @ g
    amp = np.sqrt(np.sum(M * M, axis=1))
    stderr = None if se is None else np.sqrt((M * M) @ (se * se))
    return ProfileCoeffs(coeffs, stderr, "regression", amp)


@dataclass
class DegreeSolve:
    degree: int
    coeffs: dict
    residual: float
    condition: float
    rank: int
    data_stderr: float = None
    inconsistent: bool = False


def solve_degree(k, design, b, b_stderr=None):
    """Least-squares monomial coefficients ``c_m`` (``|m| = k``) from ray coefficients ``b``."""
    if design.degree != k:
        raise ValueError(f"design built for degree {design.degree}, asked for {k}")
    b = np.asarray(b, dtype=float)
    if b.shape != (design.matrix.shape[0],):
        raise ValueError("one ray coefficient per design direction is required")
    c, _, rank, _ = np.linalg.lstsq(design.matrix, b, rcond=RCOND)
    residual = float(np.linalg.norm(design.matrix @ c - b))
    data_se = None
    inconsistent = False
    if b_stderr is not None:
        data_se = float(np.linalg.norm(b_stderr))
        inconsistent = residual > 10.0 * data_se
    coeffs = {m: float(v) for m, v in zip(design.indices, c)}
    return DegreeSolve(k, coeffs, residual, design.conditioning, int(rank), data_se, inconsistent)


@dataclass
class ReconstructionReport:
    recovered: HermiteSeries
    degrees: list
    leakage: float
    directions: np.ndarray
    profile_fits: list
    noise_bounds: list = field(default_factory=list)
    noise_norm_bounds: list = field(default_factory=list)
    max_error: float = None
    warnings: list = field(default_factory=list)

    def to_text(self, header=()):
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        buf.write("[reconstruction]\n")
        buf.write(f"dim = {self.recovered.dim}\n")
        buf.write(f"max_degree = {len(self.degrees) - 1}\n")
        buf.write(f"directions = {len(self.directions)}\n")
        buf.write(f"imaginary_leakage = {self.leakage!r}\n")
        buf.write(f"max_error = {'none' if self.max_error is None else repr(self.max_error)}\n")
        buf.write("[degrees]\n")
        buf.write("degree,condition,residual,rank,data_stderr,noise_bound,noise_norm_bound,inconsistent\n")
        none = [None] * len(self.degrees)
        for s, nb, nn in zip(self.degrees, self.noise_bounds or none, self.noise_norm_bounds or none):
            buf.write(
                f"{s.degree},{s.condition!r},{s.residual!r},{s.rank},"
                f"{'' if s.data_stderr is None else repr(s.data_stderr)},"
                f"{'' if nb is None else repr(nb)},{'' if nn is None else repr(nn)},"
                f"{str(s.inconsistent).lower()}\n"
            )
        buf.write("[profiles]\n")
        buf.write("direction,method,points,max_amplification,max_stderr\n")
        for j, pf in enumerate(self.profile_fits):
            buf.write(f"{j},{pf['method']},{pf['points']},{pf['max_amplification']!r},{pf['max_stderr']}\n")
        buf.write("[warnings]\n")
        for w in self.warnings:
            buf.write(w + "\n")
        return buf.getvalue()


def _stage(label, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage label
        raise StageError(label, exc) from exc


def reconstruct(
    source,
    max_degree,
    dim=None,
    directions=None,
    strategy="axes+random",
    engine="exact",
    level=None,
    seed=0,
    samples=None,
    truth=None,
    threads=1,
):
    """Invert the transform from profiles.

    ``source`` is either a :class:`HermiteSeries` (profiles are generated with
    ``engine`` on a level-``level`` node grid) or a list of
    :class:`~gaussradon.radon.RadonProfile`. When ``source`` is a series it is
    also used as ground truth unless ``truth`` is given.
    """
    D = int(max_degree)
    if isinstance(source, HermiteSeries):
        dim = source.dim
        truth = source if truth is None else truth
        if level is None:
            level = max(D + 1, source.degree + 1)
        if directions is not None:
            U = _stage("design", make_design, D, dim, "explicit", directions).directions
        else:
            U = _stage("design", make_design, D, dim, strategy, seed=seed).directions
        offsets = rd.node_grid(level)
        profiles = [
            _stage(
                f"profile[{j}]",
                rd.radon_profile,
                source,
                u,
                offsets,
                engine,
                level=12,
                seed=None if seed is None else seed + 1 + j,
                samples=samples,
                threads=threads,
            )
            for j, u in enumerate(U)
        ]
    else:
        profiles = list(source)
        if not profiles:
            raise StageError("input", ValueError("no profiles supplied"))
        U = np.array([p.direction for p in profiles])
        dim = U.shape[1] if dim is None else dim

    fits = [_stage(f"profile_to_coeffs[{j}]", profile_to_coeffs, p, D) for j, p in enumerate(profiles)]
    A = np.array([pf.coeffs for pf in fits])  # (J, D+1)
    S = None if fits[0].stderr is None else np.array([pf.stderr for pf in fits])

    holo, solves, bounds, norm_bounds, warnings = {}, [], [], [], []
    sigma = None
    if S is not None:
        sigma = max(float(np.max(p.stderr)) for p in profiles)
    for k in range(D + 1):
        design = _stage(f"design[{k}]", DirectionDesign.build, k, U)
        if design.conditioning > MAX_CONDITION:
            raise StageError(
                f"design[{k}]",
                DesignFailureError(f"directions do not resolve degree {k} ({design.conditioning:.3g})", design.conditioning),
            )
        b_se = None if S is None else S[:, k]
        sol = _stage(f"solve[{k}]", solve_degree, k, design, A[:, k], b_se)
        if sol.inconsistent:
            warnings.append(f"degree {k}: residual {sol.residual:.3g} exceeds 10x data stderr {sol.data_stderr:.3g}")
        solves.append(sol)
        if b_se is not None:
            # sigma x condition x amplification, and the sharper ||b_se|| / s_min
            smin = np.linalg.svd(design.matrix, compute_uv=False)[-1]
            amp = max(float(pf.amplification[k]) for pf in fits)
            bounds.append(sigma * design.conditioning * amp)
            norm_bounds.append(float(np.linalg.norm(b_se) / smin))
        else:
            bounds.append(None)
            norm_bounds.append(None)
        for m, c in sol.coeffs.items():
            holo[m] = complex(c)

    F = HolomorphicSeries(dim, holo)
    leak = imaginary_leakage(F)
    recovered = _stage("sb_inverse", sb_inverse, F)
    max_err = None
    if truth is not None:
        keys = set(recovered.coeffs) | {m for m in truth.coeffs if sum(m) <= D}
        max_err = max((abs(recovered.coeff(m) - truth.coeff(m)) for m in keys), default=0.0)
    pf_diag = [
        {
            "method": pf.method,
            "points": len(p.offsets),
            "max_amplification": float(np.max(pf.amplification)),
            "max_stderr": "" if pf.stderr is None else repr(float(np.max(pf.stderr))),
        }
        for pf, p in zip(fits, profiles)
    ]
    return ReconstructionReport(recovered, solves, leak, U, pf_diag, bounds, norm_bounds, max_err, warnings)
