"""Run configuration: YAML file, JSON-schema validation, resolution to objects."""

import copy
import json
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .errors import ConfigError
from .hermite import HermiteSeries, point_function

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1}
_vecs = {"type": "array", "items": _vec}
_engine = {"enum": ["exact", "quadrature", "mc"]}
_pos = {"type": "integer", "minimum": 1}
_offsets = {
    "oneOf": [
        {"type": "array", "items": _num, "minItems": 1},
        {
            "type": "object",
            "properties": {"nodes": _pos},
            "required": ["nodes"],
            "additionalProperties": False,
        },
    ]
}
_complex = {"oneOf": [_num, {"type": "string"}]}

FUNCTION_SCHEMA = {
    "type": "object",
    "oneOf": [{"required": ["series"]}, {"required": ["name"]}, {"required": ["file"]}],
    "properties": {
        "series": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "coeff": _num,
                },
                "required": ["exponents", "coeff"],
                "additionalProperties": False,
            },
        },
        "name": {"type": "string"},
        "file": {"type": "string"},
    },
    "additionalProperties": False,
}

SECTION_SCHEMAS = {
    "radon": {
        "type": "object",
        "properties": {
            "directions": _vecs,
            "offsets": _offsets,
            "engine": _engine,
            "level": _pos,
            "samples": _pos,
        },
        "required": ["directions", "offsets"],
        "additionalProperties": False,
    },
    "disintegrate": {
        "type": "object",
        "properties": {
            "normals": _vecs,
            "inner_engine": _engine,
            "outer_engine": {"enum": ["quadrature", "mc"]},
            "lhs_engine": _engine,
            "level": _pos,
            "samples": _pos,
            "inner_samples": _pos,
            "tolerance": _num,
        },
        "required": ["normals"],
        "additionalProperties": False,
    },
    "condexp": {
        "type": "object",
        "properties": {
            "normals": _vecs,
            "samples": {"type": "integer", "minimum": 10000},
            "bins": _pos,
            "min_count": _pos,
        },
        "required": ["normals"],
        "additionalProperties": False,
    },
    "sb": {
        "type": "object",
        "properties": {
            "points": {"type": "array", "items": {"type": "array", "items": _complex, "minItems": 1}, "minItems": 1},
            "level": {"type": "integer", "minimum": 8},
        },
        "required": ["points"],
        "additionalProperties": False,
    },
    "invert": {
        "type": "object",
        "properties": {
            "max_degree": {"type": "integer", "minimum": 0},
            "source": {"enum": ["function", "profiles"]},
            "profiles": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            "directions": _vecs,
            "strategy": {"enum": ["axes", "axes+random"]},
            "engine": _engine,
            "level": _pos,
            "samples": _pos,
        },
        "required": ["max_degree"],
        "additionalProperties": False,
    },
    "wiener": {
        "type": "object",
        "properties": {
            "m": _pos,
            "grid": {"type": "integer", "minimum": 2},
            "paths": _pos,
            "functional": {"enum": ["endpoint", "integral_sq"]},
            "direction": _pos,
            "offsets": _offsets,
            "engine": _engine,
            "samples": _pos,
        },
        "additionalProperties": False,
    },
}

SCHEMA = {
    "type": "object",
    "properties": {
        "dim": _pos,
        "seed": {"type": "integer", "minimum": 0},
        "function": FUNCTION_SCHEMA,
        **SECTION_SCHEMAS,
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "radon": {"engine": "exact", "level": 12, "samples": 100000},
    "disintegrate": {
        "inner_engine": "exact",
        "outer_engine": "quadrature",
        "level": 12,
        "samples": 20000,
        "inner_samples": 1,
        "tolerance": 1e-8,
    },
    "condexp": {"samples": 20000, "bins": 20, "min_count": 50},
    "sb": {"level": 32},
    "invert": {"source": "function", "strategy": "axes+random", "engine": "exact", "samples": 100000},
    "wiener": {
        "m": 200,
        "grid": 512,
        "paths": 5,
        "functional": "endpoint",
        "direction": 1,
        "offsets": {"nodes": 8},
        "engine": "exact",
        "samples": 20000,
    },
}

# function spec is needed by these commands
NEEDS_FUNCTION = {"radon", "disintegrate", "condexp", "sb", "invert"}


def load(path):
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    validate(data)
    return data


def validate(data):
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema error at {where}: {exc.message}") from exc


def resolve(data, section, seed=None):
    """Config with ``section`` defaults filled in and the seed override applied."""
    if section not in data:
        raise ConfigError(f"config has no '{section}' section")
    out = copy.deepcopy(data)
    out[section] = {**DEFAULTS.get(section, {}), **out[section]}
    if seed is not None:
        out["seed"] = int(seed)
    out.setdefault("seed", 0)
    from_profiles = section == "invert" and out[section].get("source") == "profiles"
    if section in NEEDS_FUNCTION and "function" not in out and not from_profiles:
        raise ConfigError(f"'{section}' needs a 'function' entry")
    keep = {"dim", "seed", "function", section}
    return {k: v for k, v in out.items() if k in keep}


def header_line(resolved):
    return "config: " + json.dumps(resolved, sort_keys=True, separators=(",", ":"))


def build_function(resolved, base_dir="."):
    spec = resolved["function"]
    dim = resolved.get("dim")
    try:
        if "series" in spec:
            lengths = {len(r["exponents"]) for r in spec["series"]}
            if len(lengths) > 1 or (dim is not None and lengths and lengths != {dim}):
                raise ConfigError("series exponents disagree with each other or with 'dim'")
            if not spec["series"] and dim is None:
                raise ConfigError("empty series needs 'dim'")
            return HermiteSeries.from_records(spec["series"], dim=dim)
        if "file" in spec:
            path = Path(base_dir) / spec["file"]
            f = HermiteSeries.loads(path.read_text())
            if dim is not None and f.dim != dim:
                raise ConfigError(f"series file has dimension {f.dim}, config says {dim}")
            return f
        if dim is None:
            raise ConfigError("registry functions need 'dim'")
        return point_function(spec["name"], dim)
    except ConfigError:
        raise
    except (ValueError, KeyError, OSError, TypeError) as exc:
        raise ConfigError(f"bad function spec: {exc}") from exc


def build_offsets(spec):
    from .radon import node_grid

    if isinstance(spec, dict):
        return node_grid(spec["nodes"])
    t = np.asarray(spec, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ConfigError("offsets must be strictly increasing")
    return t


def parse_complex(v):
    try:
        return complex(v.replace(" ", "").replace("i", "j") if isinstance(v, str) else v)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {v!r}") from exc


def check_vectors(vectors, dim, what):
    for v in vectors:
        if len(v) != dim:
            raise ConfigError(f"{what} entry {v} has length {len(v)}, expected {dim}")
        if not np.any(np.asarray(v, dtype=float)):
            raise ConfigError(f"{what} entry {v} is the zero vector")
