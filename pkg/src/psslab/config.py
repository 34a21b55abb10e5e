"""JSON job configs: schema validation and construction of the requested objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .fock import FockAlgebra, Modulation, StructureFunction, build_fock_algebra
from .grid import Grid
from .linalg_core import BlockOperator
from .realizations import (
    RealizationBundle,
    as_position_space,
    build_bosonized_a,
    build_bosonized_b,
    build_gdoa_realization_A,
    build_gdoa_realization_B,
    build_oscillator,
    build_superpotential_realization,
    sec2_bundle,
)
from .superpotential import DiagonalPairSpec, Superpotential, build_diagonal_pair

SCHEMA_ID = "psslab/1"

_NUM = {"type": "number"}
_POLY = {
    "type": "object",
    "properties": {"type": {"const": "poly"}, "coeffs": {"type": "array", "items": _NUM, "minItems": 1}},
    "required": ["type", "coeffs"],
    "additionalProperties": False,
}
_TABLE = {
    "type": "object",
    "properties": {"type": {"const": "table"}, "values": {"type": "array", "items": _NUM, "minItems": 1}},
    "required": ["type", "values"],
    "additionalProperties": False,
}
_MODULATION = {"oneOf": [_POLY, _TABLE]}
_DIAG_PAIR = {
    "type": "object",
    "properties": {
        "type": {"const": "diag_pair"},
        "w_plus": _POLY,
        "C": _NUM,
        "D": _NUM,
        "anchor": _NUM,
    },
    "required": ["type", "w_plus", "C", "D"],
    "additionalProperties": False,
}
_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "description": {"type": "string"},
        "realization": {
            "type": "string",
            "pattern": r"^(sec2_charges|superpotential|gdoa_a|gdoa_b|ossqm_khare"
                       r"|bosonized_a:[012]|bosonized_b:[012]|oscillator:[1-4])$",
        },
        "space": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "fock"},
                        "dim": {"type": "integer", "minimum": 2},
                        "margin": {"type": "integer", "minimum": 0},
                    },
                    "required": ["type", "dim"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "grid"},
                        "x_min": _NUM,
                        "x_max": _NUM,
                        "n_points": {"type": "integer", "minimum": 8},
                        "margin": {"type": "integer", "minimum": 0},
                    },
                    "required": ["type", "x_min", "x_max", "n_points"],
                    "additionalProperties": False,
                },
            ]
        },
        "structure_function": {
            "oneOf": [
                {"type": "object", "properties": {"type": {"const": "standard"}},
                 "required": ["type"], "additionalProperties": False},
                {"type": "object",
                 "properties": {"type": {"const": "c3"}, "alpha0": _NUM, "alpha1": _NUM},
                 "required": ["type", "alpha0", "alpha1"], "additionalProperties": False},
                _TABLE,
            ]
        },
        "c": {"type": "number", "exclusiveMinimum": 0},
        "omega": {"type": "number"},
        "f": _MODULATION,
        "f1": _MODULATION,
        "f2": _MODULATION,
        "h3bar": _MODULATION,
        "boundary": {"enum": ["continued", "zero"]},
        "W1": {"oneOf": [_POLY, _DIAG_PAIR]},
        "W2": _POLY,
        "h4": {"oneOf": [{"enum": ["zero", "iWprime"]}, _POLY]},
        "zeta": _COMPLEX,
        "rho": _COMPLEX,
        "budget": {"type": "number", "exclusiveMinimum": 0},
        "closed_form_tol": {"type": "number", "exclusiveMinimum": 0},
        "spectrum": {
            "type": "object",
            "properties": {
                "margin": {"type": "integer", "minimum": 0},
                "e_max": _NUM,
                "cluster_tol": {"type": "number", "exclusiveMinimum": 0},
                "n_levels": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "expected_levels": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"energy": _NUM, "multiplicity": {"type": "integer", "minimum": 1}},
                "required": ["energy", "multiplicity"],
                "additionalProperties": False,
            },
        },
        "expect_embedding": {"type": "boolean"},
        "fault": {
            "type": "object",
            "properties": {
                "block": {"type": "integer", "minimum": 0, "maximum": 2},
                "index": {"type": "integer", "minimum": 0},
                "value": _NUM,
            },
            "required": ["block", "index", "value"],
            "additionalProperties": False,
        },
    },
    "required": ["realization", "space"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Config is malformed or inconsistent."""


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config schema violation at {where}: {exc.message}") from exc


def apply_overrides(cfg: dict, dim: int | None = None) -> dict:
    """``--dim`` sets the Fock dimension or the number of grid points."""
    cfg = json.loads(json.dumps(cfg))
    if dim is not None:
        key = "dim" if cfg["space"]["type"] == "fock" else "n_points"
        cfg["space"][key] = int(dim)
        validate_config(cfg)
    return cfg


def selector(cfg: dict) -> tuple[str, int | None]:
    name, _, idx = cfg["realization"].partition(":")
    return name, (int(idx) if idx else None)


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"realization {cfg['realization']!r} needs {', '.join(missing)}")


@dataclass
class Job:
    cfg: dict
    name: str
    index: int | None
    margin: int
    space: Any  # Grid or FockAlgebra
    extras: dict = field(default_factory=dict)

    @property
    def is_grid(self) -> bool:
        return isinstance(self.space, Grid)


def build_space(cfg: dict, name: str):
    sp = cfg["space"]
    if sp["type"] == "grid":
        if name not in ("superpotential", "ossqm_khare", "oscillator"):
            raise ConfigError(f"realization {name!r} needs a Fock space")
        return Grid(float(sp["x_min"]), float(sp["x_max"]), int(sp["n_points"]))
    F = StructureFunction.from_config(cfg.get("structure_function", {"type": "standard"}))
    if name in ("superpotential", "ossqm_khare", "oscillator", "sec2_charges") and F.kind != "standard":
        raise ConfigError(f"realization {name!r} on a Fock space needs the standard structure function")
    return build_fock_algebra(F, int(sp["dim"]))


def make_job(cfg: dict) -> Job:
    name, idx = selector(cfg)
    margin = int(cfg["space"].get("margin", 4))
    space = build_space(cfg, name)
    dim = space.n_points if isinstance(space, Grid) else space.dim
    if margin >= dim:
        raise ConfigError(f"margin {margin} leaves nothing of a {dim}-point space")
    return Job(cfg, name, idx, margin, space)


def superpotential_pair(cfg: dict, nodes: np.ndarray):
    """``(W1, W2, pair_spec)`` from the config; ``pair_spec`` is set for diag_pair configs."""
    _need(cfg, "W1")
    w1 = cfg["W1"]
    if w1["type"] == "diag_pair":
        if "W2" in cfg:
            raise ConfigError("a diag_pair W1 defines both superpotentials; drop W2")
        spec = DiagonalPairSpec(Superpotential.polynomial(w1["w_plus"]["coeffs"]),
                                float(w1["C"]), float(w1["D"]))
        pair = build_diagonal_pair(spec, nodes, anchor=float(w1.get("anchor", 0.0)))
        return pair.W1, pair.W2, spec
    W1 = Superpotential.polynomial(w1["coeffs"])
    W2 = Superpotential.polynomial(cfg["W2"]["coeffs"]) if "W2" in cfg else W1
    return W1, W2, None


def h4_choice(cfg: dict):
    h4 = cfg.get("h4", "zero")
    return h4 if isinstance(h4, str) else list(h4["coeffs"])


def _complex(pair) -> complex | None:
    return None if pair is None else complex(pair[0], pair[1])


def build_bundle(job: Job) -> RealizationBundle:
    cfg, name, m = job.cfg, job.name, job.margin
    c = float(cfg.get("c", 0.5))
    if name == "sec2_charges":
        return sec2_bundle(job.space, float(cfg.get("omega", 1.0)), c, m)
    if name == "oscillator":
        return build_oscillator(job.index, job.space, c, m)[1]
    if name in ("superpotential", "ossqm_khare"):
        sp = as_position_space(job.space)
        W1, W2, spec = superpotential_pair(cfg, sp.nodes)
        job.extras.update(W1=W1, W2=W2, pair_spec=spec, position_space=sp)
        return build_superpotential_realization(W1, W2, h4_choice(cfg), sp, c, m)
    alg: FockAlgebra = job.space
    boundary = cfg.get("boundary", "continued")
    if name in ("gdoa_a", "bosonized_a"):
        _need(cfg, "f", "h3bar")
        f, h3 = Modulation.from_config(cfg["f"]), Modulation.from_config(cfg["h3bar"])
        if name == "gdoa_a":
            return build_gdoa_realization_A(alg, f, h3, c, m)
        return build_bosonized_a(alg, f, h3, c, job.index, m)
    if name in ("gdoa_b", "bosonized_b"):
        _need(cfg, "f1", "f2")
        f1, f2 = Modulation.from_config(cfg["f1"]), Modulation.from_config(cfg["f2"])
        if name == "gdoa_b":
            return build_gdoa_realization_B(alg, f1, f2, c, m, boundary)
        return build_bosonized_b(alg, f1, f2, c, job.index, m, boundary)
    raise ConfigError(f"unknown realization {name!r}")


def inject_fault(bundle: RealizationBundle, fault: dict) -> RealizationBundle:
    """Add ``value`` to diagonal entry ``index`` of Hamiltonian block ``block``."""
    b, i = int(fault["block"]), int(fault["index"])
    if b >= bundle.H.block_dim or i >= bundle.H.inner_dim:
        raise ConfigError(f"fault position ({b}, {i}) is outside the Hamiltonian")
    blocks = [[None if x is None else x.copy() for x in row] for row in bundle.H.blocks]
    blk = bundle.H.block(b, b).copy()
    blk[i, i] += float(fault["value"])
    blocks[b][b] = blk
    return bundle.with_H(BlockOperator(blocks, bundle.H.inner_dim), f"{bundle.name}+fault")


def zeta_rho(cfg: dict) -> tuple[complex | None, complex | None]:
    return _complex(cfg.get("zeta")), _complex(cfg.get("rho"))
