"""Configuration schemas, validation, and initial-condition builders."""

from __future__ import annotations

import json

import numpy as np
from jsonschema import Draft202012Validator

from .dynamics import FlowState, GuardThresholds, SimParams, to_q
from .errors import SchemaError
from .spectral import Field, Grid

_NUMBER = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

_GUARDS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "max_grad_u": {"type": ["number", "null"]},
        "min_rho": _POS,
        "tail_ratio": _POS,
    },
}

_INIT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["gaussian_bump", "single_mode", "file"]},
        "amplitude": _NUMBER,
        "width": _POS,
        "floor": _NONNEG,
        "center": {"type": "array", "items": _NUMBER},
        "u_strength": _NUMBER,
        "u_width": _POS,
        "mode": {"type": ["integer", "array"]},
        "phase": _NUMBER,
        "path": {"type": "string"},
    },
}

_OUTPUT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "series_csv": {"type": "string"},
        "snapshot_dir": {"type": "string"},
        "report_stride": {"type": "integer", "minimum": 1},
        "snapshot_stride": {"type": "integer", "minimum": 0},
        "figures": {"type": "boolean"},
    },
}

SIMULATE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["d", "n", "L", "cp", "ck", "alpha", "gamma", "dt", "t_end", "init"],
    "properties": {
        "formulation": {"enum": ["primitive", "isentropic_q", "isothermal_q"]},
        "d": {"type": "integer", "minimum": 1, "maximum": 3},
        "n": {"type": "integer", "minimum": 8},
        "L": _POS,
        "cp": _NONNEG,
        "ck": _NUMBER,
        "alpha": _NUMBER,
        "gamma": _NUMBER,
        "eps": _NONNEG,
        "dt": _POS,
        "t_end": _NONNEG,
        "dealias": {"type": "boolean"},
        "allow_extended_alpha": {"type": "boolean"},
        "rho_inf": _NONNEG,
        "seed": {"type": "integer"},
        "guards": _GUARDS_SCHEMA,
        "init": _INIT_SCHEMA,
        "criterion": {"enum": ["attractive", "repulsive", "isothermal"]},
        "output": _OUTPUT_SCHEMA,
    },
}

SIMULATE_DEFAULTS = {
    "formulation": "primitive",
    "eps": 0.0,
    "dealias": True,
    "allow_extended_alpha": False,
    "rho_inf": 0.0,
    "seed": 0,
    "guards": {},
    "output": {},
}

PARTICLES_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["N", "d", "alpha", "ck", "dt", "t_end", "init"],
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1, "maximum": 3},
        "alpha": _NUMBER,
        "ck": _NUMBER,
        "delta": _NONNEG,
        "dt": _POS,
        "t_end": _NONNEG,
        "seed": {"type": "integer"},
        "init": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["gaussian_cloud"]},
                "spread": _POS,
                "v_spread": _NONNEG,
                "center": {"type": "array", "items": _NUMBER},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "series_csv": {"type": "string"},
                "snapshot_dir": {"type": "string"},
                "report_stride": {"type": "integer", "minimum": 1},
                "snapshot_stride": {"type": "integer", "minimum": 0},
                "figures": {"type": "boolean"},
            },
        },
    },
}

PARTICLES_DEFAULTS = {"delta": 0.0, "seed": 0, "output": {}}

CONVERGENCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["base", "eps_values", "t_compare"],
    "properties": {
        "base": SIMULATE_SCHEMA,
        "eps_values": {"type": "array", "items": _POS, "minItems": 1},
        "mollify_values": {"type": "array", "items": _POS},
        "t_compare": _POS,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "viscous_csv": {"type": "string"},
                "mollify_csv": {"type": "string"},
                "figures": {"type": "boolean"},
            },
        },
    },
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "inputs", "hypotheses", "hypotheses_satisfied",
                 "predicted_bound_time", "constants", "notes"],
    "properties": {
        "kind": {"enum": ["attractive_isentropic", "repulsive_isentropic", "isothermal"]},
        "inputs": {"type": "object", "additionalProperties": _NUMBER},
        "hypotheses": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "hypotheses_satisfied": {"type": "boolean"},
        "predicted_bound_time": {"type": ["number", "null"]},
        "constants": {"type": "object", "additionalProperties": _NUMBER},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}


def _merge_defaults(cfg: dict, defaults: dict) -> dict:
    out = dict(defaults)
    out.update(cfg)
    return out


def validate(cfg: dict, schema: dict, defaults: dict | None = None) -> dict:
    """Validate against the schema plus cross-field constraints.

    Raises SchemaError listing every violation; returns the config with
    defaults filled in.
    """
    validator = Draft202012Validator(schema)
    violations = [
        f"{'/'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
        for err in validator.iter_errors(cfg)
    ]
    violations.extend(_cross_field_violations(cfg, schema))
    if violations:
        raise SchemaError(violations)
    if defaults:
        cfg = _merge_defaults(cfg, defaults)
    return cfg


def _cross_field_violations(cfg: dict, schema: dict):
    out = []
    if schema is SIMULATE_SCHEMA:
        out.extend(_simulate_violations(cfg))
    elif schema is CONVERGENCE_SCHEMA and isinstance(cfg.get("base"), dict):
        out.extend(f"base/{v}" for v in _simulate_violations(cfg["base"]))
    return out


def _simulate_violations(cfg: dict):
    out = []
    gamma = cfg.get("gamma")
    if isinstance(gamma, (int, float)) and gamma < 1:
        out.append(f"gamma: must satisfy gamma >= 1, got {gamma}")
    alpha, d = cfg.get("alpha"), cfg.get("d")
    if (
        isinstance(alpha, (int, float))
        and isinstance(d, int)
        and not cfg.get("allow_extended_alpha", False)
        and not d - 2 < alpha < d
    ):
        out.append(
            f"alpha: must lie in the open interval (d-2, d) = ({d - 2}, {d}), got {alpha}"
        )
    if cfg.get("formulation") == "isentropic_q" and isinstance(gamma, (int, float)):
        if gamma <= 1:
            out.append("gamma: isentropic_q formulation requires gamma > 1")
    n = cfg.get("n")
    if isinstance(n, int) and n % 2:
        out.append(f"n: must be even, got {n}")
    return out


def load_config(path, schema, defaults=None) -> dict:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    return validate(cfg, schema, defaults)


def sim_params_from_config(cfg: dict) -> SimParams:
    guards = dict(cfg.get("guards") or {})
    return SimParams(
        c_p=cfg["cp"],
        c_k=cfg["ck"],
        alpha=cfg["alpha"],
        gamma=cfg["gamma"],
        d=cfg["d"],
        dt=cfg["dt"],
        t_end=cfg["t_end"],
        eps=cfg.get("eps", 0.0),
        dealias=cfg.get("dealias", True),
        guards=GuardThresholds(**guards),
        allow_extended_alpha=cfg.get("allow_extended_alpha", False),
    )


def gaussian_bump_fields(grid: Grid, init: dict):
    """Density floor + Gaussian bump; optional localized radial velocity."""
    amplitude = init.get("amplitude", 1.0)
    width = init.get("width", grid.length / 20.0)
    floor = init.get("floor", 0.0)
    center = init.get("center") or [grid.length / 2.0] * grid.d
    coords = grid.coords()
    r_sq = sum(
        np.broadcast_to((x - c) ** 2, grid.shape) for x, c in zip(coords, center)
    )
    rho = Field(grid, floor + amplitude * np.exp(-r_sq / (2.0 * width ** 2)))
    u_strength = init.get("u_strength", 0.0)
    u_width = init.get("u_width", width)
    profile = np.exp(-r_sq / (2.0 * u_width ** 2))
    velocity = tuple(
        Field(grid, u_strength * np.broadcast_to(x - c, grid.shape) * profile)
        for x, c in zip(coords, center)
    )
    return rho, velocity


def single_mode_fields(grid: Grid, init: dict):
    """rho = floor + amplitude cos(2 pi m.x / L + phase), u = 0."""
    amplitude = init.get("amplitude", 1e-6)
    floor = init.get("floor", 1.0)
    phase = init.get("phase", 0.0)
    mode = init.get("mode", 1)
    if isinstance(mode, int):
        mode = [mode] + [0] * (grid.d - 1)
    coords = grid.coords()
    arg = sum(
        2.0 * np.pi * m * x / grid.length for m, x in zip(mode, coords)
    )
    rho = Field(grid, floor + amplitude * np.cos(np.broadcast_to(arg, grid.shape) + phase))
    velocity = tuple(Field(grid, np.zeros(grid.shape)) for _ in range(grid.d))
    return rho, velocity


def initial_state(cfg: dict) -> FlowState:
    """Build the initial FlowState described by a simulate config."""
    from .erzf import read_snapshot

    init = cfg["init"]
    if init["kind"] == "file":
        if "path" not in init:
            raise SchemaError("init/path: required for kind 'file'")
        return read_snapshot(init["path"])
    grid = Grid(cfg["d"], cfg["n"], cfg["L"])
    if init["kind"] == "gaussian_bump":
        rho, velocity = gaussian_bump_fields(grid, init)
    else:
        rho, velocity = single_mode_fields(grid, init)
    formulation = cfg.get("formulation", "primitive")
    if formulation == "primitive":
        scalar = rho
    elif formulation == "isentropic_q":
        scalar = to_q(rho, cfg["gamma"])
    else:
        scalar = to_q(rho, 1.0)
    return FlowState(formulation, scalar, velocity, 0.0)
