"""Command-line front end.

Every subcommand reads one YAML config (see README for the schema) and writes
its outputs into ``--out-dir``. Exit codes: 0 success, 1 numerical failure,
2 config or schema error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .bargmann import sb_forward, sb_quadrature
from .disintegration import cond_exp_check, disintegration_check
from .errors import ConfigError, EngineUnavailableError, GaussRadonError, StageError
from .hermite import as_series
from .inversion import reconstruct
from .radon import RadonProfile, radon_profile
from .wiener import KLModel, endpoint_disintegration, functional_radon, sample_path

SECTIONS = {
    "radon": "radon",
    "disintegrate": "disintegrate",
    "condexp": "condexp",
    "sb": "sb",
    "invert": "invert",
    "demo-wiener": "wiener",
}


def _write(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _dim_of(f):
    return f.dim


def cmd_radon(resolved, base_dir, out_dir, threads):
    sec = resolved["radon"]
    f = cfg.build_function(resolved, base_dir)
    cfg.check_vectors(sec["directions"], _dim_of(f), "directions")
    offsets = cfg.build_offsets(sec["offsets"])
    header = [cfg.header_line(resolved)]
    written = []
    for j, u in enumerate(sec["directions"]):
        prof = radon_profile(
            f,
            u,
            offsets,
            sec["engine"],
            level=sec["level"],
            seed=resolved["seed"] + j,
            samples=sec["samples"],
            threads=threads,
        )
        written.append(_write(out_dir / f"profile_{j:03d}.csv", prof.to_csv(header)))
    return written


def cmd_disintegrate(resolved, base_dir, out_dir, threads):
    sec = resolved["disintegrate"]
    f = cfg.build_function(resolved, base_dir)
    cfg.check_vectors(sec["normals"], _dim_of(f), "normals")
    report = disintegration_check(
        f,
        sec["normals"],
        inner_engine=sec["inner_engine"],
        outer_engine=sec["outer_engine"],
        level=sec["level"],
        seed=resolved["seed"],
        samples=sec["samples"],
        inner_samples=sec["inner_samples"],
        lhs_engine=sec.get("lhs_engine"),
        tol=sec["tolerance"],
    )
    return [_write(out_dir / "disintegration.txt", report.to_text([cfg.header_line(resolved)]))]


def cmd_condexp(resolved, base_dir, out_dir, threads):
    sec = resolved["condexp"]
    f = cfg.build_function(resolved, base_dir)
    cfg.check_vectors(sec["normals"], _dim_of(f), "normals")
    if len(sec["normals"]) not in (1, 2):
        raise ConfigError("condexp supports 1 or 2 normals")
    report = cond_exp_check(
        f,
        sec["normals"],
        samples=sec["samples"],
        bins=sec["bins"],
        seed=resolved["seed"],
        min_count=sec["min_count"],
        threads=threads,
    )
    header = [cfg.header_line(resolved)]
    return [
        _write(out_dir / "condexp.txt", report.to_text(header)),
        _write(out_dir / "condexp_bins.csv", report.bins_csv()),
    ]


def cmd_sb(resolved, base_dir, out_dir, threads):
    sec = resolved["sb"]
    f = cfg.build_function(resolved, base_dir)
    points = [[cfg.parse_complex(v) for v in z] for z in sec["points"]]
    for z in points:
        if len(z) != f.dim:
            raise ConfigError(f"sb point of length {len(z)}, expected {f.dim}")
    series = as_series(f)
    holo = None if series is None else sb_forward(series)
    cols = []
    for i in range(f.dim):
        cols += [f"z{i + 1}_re", f"z{i + 1}_im"]
    cols += ["value_re", "value_im", "error", "reliable", "coeff_re", "coeff_im"]
    lines = ["# " + cfg.header_line(resolved), ",".join(cols)]
    for z in points:
        q = sb_quadrature(f, np.array(z), level=sec["level"])
        row = []
        for c in z:
            row += [repr(c.real), repr(c.imag)]
        row += [repr(q.value.real), repr(q.value.imag), repr(q.error), str(q.reliable).lower()]
        if holo is not None:
            v = complex(holo(np.array(z)))
            row += [repr(v.real), repr(v.imag)]
        else:
            row += ["", ""]
        lines.append(",".join(row))
    return [_write(out_dir / "sb.csv", "\n".join(lines) + "\n")]


def cmd_invert(resolved, base_dir, out_dir, threads):
    sec = resolved["invert"]
    header = [cfg.header_line(resolved)]
    if sec["source"] == "profiles":
        if "profiles" not in sec:
            raise ConfigError("source 'profiles' needs a 'profiles' list")
        try:
            profiles = [RadonProfile.from_csv((Path(base_dir) / p).read_text()) for p in sec["profiles"]]
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read profiles: {exc}") from exc
        report = reconstruct(profiles, sec["max_degree"])
    else:
        f = cfg.build_function(resolved, base_dir)
        series = as_series(f)
        if series is None:
            raise ConfigError("synthetic inversion needs a polynomial function (series or registry polynomial)")
        if "directions" in sec:
            cfg.check_vectors(sec["directions"], f.dim, "directions")
        report = reconstruct(
            series,
            sec["max_degree"],
            directions=sec.get("directions"),
            strategy=sec["strategy"],
            engine=sec["engine"],
            level=sec.get("level"),
            seed=resolved["seed"],
            samples=sec["samples"],
            threads=threads,
        )
    return [
        _write(out_dir / "reconstruction.txt", report.to_text(header)),
        _write(out_dir / "recovered.json", report.recovered.dumps() + "\n"),
    ]


def cmd_demo_wiener(resolved, base_dir, out_dir, threads):
    sec = resolved["wiener"]
    model = KLModel(sec["m"], sec["grid"])
    if sec["direction"] > model.m:
        raise ConfigError(f"direction {sec['direction']} exceeds truncation order {model.m}")
    offsets = cfg.build_offsets(sec["offsets"])
    header = [cfg.header_line(resolved)]
    seed = resolved["seed"]
    paths = sample_path(model, seed, sec["paths"])
    lines = ["# " + header[0], ",".join(["t"] + [f"path{i}" for i in range(sec["paths"])])]
    for i, t in enumerate(model.grid):
        lines.append(",".join([repr(float(t))] + [repr(float(v)) for v in paths[:, i]]))
    prof = functional_radon(
        model,
        sec["functional"],
        sec["direction"],
        offsets,
        sec["engine"],
        seed=seed + 1,
        samples=sec["samples"],
        threads=threads,
    )
    rep = endpoint_disintegration(model, sec["direction"])
    return [
        _write(out_dir / "paths.csv", "\n".join(lines) + "\n"),
        _write(out_dir / "profile.csv", prof.to_csv(header)),
        _write(out_dir / "endpoint_disintegration.txt", rep.to_text(header)),
    ]


COMMANDS = {
    "radon": cmd_radon,
    "disintegrate": cmd_disintegrate,
    "condexp": cmd_condexp,
    "sb": cmd_sb,
    "invert": cmd_invert,
    "demo-wiener": cmd_demo_wiener,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="gaussradon", description="Gaussian Radon transform toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        data = cfg.load(args.config)
        resolved = cfg.resolve(data, SECTIONS[args.command], args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_dir = Path(args.config).resolve().parent
    try:
        written = COMMANDS[args.command](resolved, base_dir, out_dir, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EngineUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: set the engine (inner_engine/outer_engine/engine) to mc", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, EngineUnavailableError):
            print("hint: set the engine to mc", file=sys.stderr)
        return 1
    except (GaussRadonError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
