"""Experiment configuration: JSON schema, defaults, and unit resolution.

Configs are JSON documents validated against CONFIG_SCHEMA. Every dB-valued
field carries an explicit _db / _dbm suffix and is converted to linear units
exactly once, here; everything downstream works in watts and ratios. The
resolved document (defaults merged, CLI overrides applied) is canonicalized
and hashed so emitted rows can be traced back to their exact inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import List, Optional

import jsonschema

from .channel import ChannelConfig, Geometry
from .metrics import SystemParams, db_to_linear, dbm_to_watt

CODE_VERSION = "0.1.0"


class ConfigError(ValueError):
    """Invalid configuration; message carries the document location."""


DEFAULTS = {
    "kind": "individual",
    "seed": 2024,
    "out_dir": ".",
    "system": {
        "bandwidth_hz": 1e6,
        "spreading": 128,
        "rho": 1.0,
        "mu": 1.2,
        "ps_dbm": 39.0,
        "pr_dbm": 10.0,
        "pmax_dbm": 40.0,
        "noise_dbm": -114.0,
        "m": 4,
        "n": 64,
    },
    "geometry": {
        "d0_m": 300.0,
        "theta_deg": 10.0,
        "h_pt_m": 50.0,
        "h_ris_m": 30.0,
        "fc_hz": 3.5e9,
        "alpha_tr": 2.7,
        "alpha_ts": 2.7,
        "alpha_sr": 2.1,
    },
    "channel": {
        "k1_db": 2.0,
        "k2_db": 10.0,
        "k3_db": 10.0,
        "corr_model": "identity",
        "corr_r": 0.0,
        "nx": None,
        "nz": None,
    },
    "individual": {
        "n_trials": 1,
        "kappa": 1e-4,
        "max_iter": 500,
        "restarts": 5,
        "t_opt": 200,
        "t_report": 10000,
    },
    "asymptotic": {
        "sweep": "m",
        "values": [8, 16, 32, 64, 128, 256],
        "pmax_dbm": [24.0, 26.0, 28.0, 30.0],
        "mc_trials": 0,
    },
    "pareto": {
        "alphas": None,
        "n_alpha": 10,
        "epsilon": 1e-3,
        "kappa_ao": 1e-4,
        "kappa_sca": 1e-5,
        "t_opt": 200,
        "t_report": 10000,
        "sweep": None,
    },
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT1 = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["individual", "asymptotic", "pareto"]},
        "seed": {"type": "integer", "minimum": 0},
        "out_dir": {"type": "string"},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bandwidth_hz": _POS,
                "spreading": _INT1,
                "rho": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "mu": {"type": "number", "minimum": 1},
                "ps_dbm": _NUM,
                "pr_dbm": _NUM,
                "pmax_dbm": _NUM,
                "noise_dbm": _NUM,
                "m": _INT1,
                "n": _INT1,
            },
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d0_m": _POS,
                "theta_deg": {"type": "number", "minimum": 0,
                              "exclusiveMaximum": 180},
                "h_pt_m": {"type": "number", "minimum": 0},
                "h_ris_m": {"type": "number", "minimum": 0},
                "fc_hz": _POS,
                "alpha_tr": {"type": "number", "minimum": 2},
                "alpha_ts": {"type": "number", "minimum": 2},
                "alpha_sr": {"type": "number", "minimum": 2},
            },
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k1_db": _NUM,
                "k2_db": _NUM,
                "k3_db": _NUM,
                "corr_model": {"enum": ["identity", "exponential"]},
                "corr_r": {"type": "number", "minimum": 0,
                           "exclusiveMaximum": 1},
                "nx": {"type": ["integer", "null"], "minimum": 1},
                "nz": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "individual": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_trials": _INT1,
                "kappa": _POS,
                "max_iter": _INT1,
                "restarts": _INT1,
                "t_opt": _INT1,
                "t_report": _INT1,
            },
        },
        "asymptotic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sweep": {"enum": ["m", "n"]},
                "values": {"type": "array", "items": _INT1, "minItems": 1},
                "pmax_dbm": {"type": "array", "items": _NUM, "minItems": 1},
                "mc_trials": {"type": "integer", "minimum": 0},
            },
        },
        "pareto": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alphas": {
                    "type": ["array", "null"],
                    "items": {"type": "number", "exclusiveMinimum": 0,
                              "exclusiveMaximum": 1},
                    "minItems": 1,
                },
                "n_alpha": {"type": "integer", "minimum": 2},
                "epsilon": _POS,
                "kappa_ao": _POS,
                "kappa_sca": _POS,
                "t_opt": _INT1,
                "t_report": _INT1,
                "sweep": {
                    "type": ["object", "null"],
                    "additionalProperties": False,
                    "properties": {
                        "param": {"enum": ["theta_deg", "ps_dbm", "pmax_dbm"]},
                        "values": {"type": "array", "items": _NUM,
                                   "minItems": 1},
                    },
                    "required": ["param", "values"],
                },
            },
        },
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = val
    return out


def _canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass
class RunConfig:
    """Resolved configuration: raw document plus linear-unit accessors."""

    raw: dict
    config_hash: str
    kind: str
    seed: int
    out_dir: str

    def make_params(self, **overrides) -> SystemParams:
        s = self.raw["system"]
        values = dict(
            B=float(s["bandwidth_hz"]), L=int(s["spreading"]),
            rho=float(s["rho"]), mu=float(s["mu"]),
            Ps=dbm_to_watt(float(s["ps_dbm"])),
            Pr=dbm_to_watt(float(s["pr_dbm"])),
            Pmax=dbm_to_watt(float(s["pmax_dbm"])),
            sigma2=dbm_to_watt(float(s["noise_dbm"])),
            M=int(s["m"]), N=int(s["n"]),
        )
        values.update(overrides)
        return SystemParams(**values)

    def make_geometry(self, theta_deg: Optional[float] = None) -> Geometry:
        g = self.raw["geometry"]
        theta = g["theta_deg"] if theta_deg is None else theta_deg
        return Geometry(d0=float(g["d0_m"]), theta=math.radians(float(theta)),
                        h_pt=float(g["h_pt_m"]), h_ris=float(g["h_ris_m"]),
                        fc=float(g["fc_hz"]), alpha_tr=float(g["alpha_tr"]),
                        alpha_ts=float(g["alpha_ts"]),
                        alpha_sr=float(g["alpha_sr"]))

    def make_chan_cfg(self, m: Optional[int] = None,
                      n: Optional[int] = None) -> ChannelConfig:
        c = self.raw["channel"]
        s = self.raw["system"]
        return ChannelConfig(
            k1=db_to_linear(float(c["k1_db"])),
            k2=db_to_linear(float(c["k2_db"])),
            k3=db_to_linear(float(c["k3_db"])),
            m=int(s["m"] if m is None else m),
            n=int(s["n"] if n is None else n),
            corr_model=c["corr_model"], corr_r=float(c["corr_r"]),
            nx=c["nx"], nz=c["nz"],
        )

    @property
    def individual(self) -> dict:
        return self.raw["individual"]

    @property
    def asymptotic(self) -> dict:
        return self.raw["asymptotic"]

    @property
    def pareto(self) -> dict:
        return self.raw["pareto"]

    def alpha_grid(self) -> List[float]:
        block = self.raw["pareto"]
        if block["alphas"] is not None:
            return [float(a) for a in block["alphas"]]
        n = int(block["n_alpha"])
        lo, hi = 0.05, 0.95
        return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _parse_alpha_grid(text: str) -> List[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as err:
        raise ConfigError(f"--alpha-grid: {err}") from None
    if not values:
        raise ConfigError("--alpha-grid: empty grid")
    return values


def load_config(path: Optional[str] = None, *, data: Optional[dict] = None,
                kind: Optional[str] = None, seed: Optional[int] = None,
                out_dir: Optional[str] = None,
                alpha_grid: Optional[str] = None) -> RunConfig:
    """Read, merge with defaults, apply CLI overrides, validate, resolve.

    Exactly one of `path` / `data` supplies the user document. Validation
    errors carry the JSON-pointer location (or the line/column for parse
    errors).
    """
    if data is None:
        if path is None:
            raise ConfigError("no configuration given")
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as err:
            raise ConfigError(f"{path}: {err.strerror or err}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"{path}: line {err.lineno} column {err.colno}: {err.msg}"
            ) from None
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")

    merged = _deep_merge(DEFAULTS, data)
    if kind is not None:
        merged["kind"] = kind
    if seed is not None:
        merged["seed"] = int(seed)
    if out_dir is not None:
        merged["out_dir"] = out_dir
    if alpha_grid is not None:
        merged["pareto"] = dict(merged["pareto"],
                                alphas=_parse_alpha_grid(alpha_grid))

    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(merged), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = "/" + "/".join(str(p) for p in err.path) if err.path else "/"
        raise ConfigError(f"{where}: {err.message}")

    chan = merged["channel"]
    sysb = merged["system"]
    if (chan["nx"] is None) != (chan["nz"] is None):
        raise ConfigError("/channel: nx and nz must be given together")
    if chan["nx"] is not None and chan["nx"] * chan["nz"] != sysb["n"]:
        raise ConfigError(
            f"/channel: nx*nz = {chan['nx'] * chan['nz']} != n = {sysb['n']}")

    # out_dir does not influence any computed value; keep it out of the
    # hash so runs into different directories stay byte-identical
    hashed = {k: v for k, v in merged.items() if k != "out_dir"}
    config_hash = hashlib.sha256(_canonical(hashed).encode()).hexdigest()[:16]
    rc = RunConfig(raw=merged, config_hash=config_hash, kind=merged["kind"],
                   seed=int(merged["seed"]), out_dir=merged["out_dir"])
    try:
        rc.make_params()
        rc.make_geometry()
        rc.make_chan_cfg()
    except ValueError as err:
        raise ConfigError(str(err)) from None
    return rc
