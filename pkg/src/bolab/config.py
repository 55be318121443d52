"""Experiment configuration: one JSON document, schema-checked on load."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .pde import Perturbation

SCHEMA = {
    "type": "object",
    "required": ["N", "E_m", "E_M", "epsilon", "M", "dt", "T"],
    "additionalProperties": False,
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "E_m": {"type": "number", "exclusiveMinimum": 0},
        "E_M": {"type": "number", "exclusiveMinimum": 0},
        "epsilon": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "perturbation": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["none", "gassot", "gradient"]},
                "sign": {"enum": [-1, 1]},
                "terms": {"type": "array", "items": {"type": "object"}},
            },
        },
        "initial_data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "poisson": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "target_gaps": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0},
                },
                "tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tail_energy": {"type": "number", "minimum": 0},
        "M": {"type": "integer", "minimum": 4},
        "grid": {"type": "integer", "minimum": 16},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "sample_stride": {"type": "integer", "minimum": 1},
        "n_max": {"type": "integer", "minimum": 1},
        "M_L": {"type": "integer", "minimum": 4},
        "constants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "muStar": {"type": "number", "exclusiveMinimum": 0},
                "K": {"type": "number", "exclusiveMinimum": 0},
                "Ktilde": {"type": "number", "exclusiveMinimum": 0},
                "C4": {"type": "number", "exclusiveMinimum": 0},
                "C5": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "out_dir": {"type": "string"},
        "seed": {"type": "integer"},
    },
}


@dataclass
class ExperimentConfig:
    """Validated experiment description; see SCHEMA for the JSON shape."""

    N: int
    E_m: float
    E_M: float
    epsilon: list
    M: int
    dt: float
    T: float
    perturbation: dict = field(default_factory=lambda: {"kind": "none"})
    initial_data: dict = field(default_factory=lambda: {"poisson": [[0.5, 0.0]]})
    tail_energy: float = 0.0
    grid: int | None = None
    sample_stride: int = 1
    n_max: int = 8
    M_L: int | None = None
    constants: dict = field(default_factory=dict)
    out_dir: str = "runs/out"
    seed: int = 0

    def __post_init__(self):
        if self.E_m >= self.E_M:
            raise ConfigError("E_m must be smaller than E_M")
        if self.n_max < self.N:
            raise ConfigError(f"n_max ({self.n_max}) must cover the leading N={self.N} gaps")
        keys = set(self.initial_data) - {"tol"}
        if keys not in ({"poisson"}, {"target_gaps"}):
            raise ConfigError("initial_data needs exactly one of 'poisson' or 'target_gaps'")
        merged = {"muStar": 1.0, "K": 1.0, "Ktilde": 1.0, "C4": 1.0, "C5": 1.0}
        unknown = set(self.constants) - set(merged)
        if unknown:
            raise ConfigError(f"unknown constants: {sorted(unknown)}")
        merged.update(self.constants)
        self.constants = merged

    def perturbation_for(self, epsilon: float) -> Perturbation:
        params = dict(self.perturbation)
        kind = params.pop("kind")
        return Perturbation(kind=kind, epsilon=epsilon if kind != "none" else 0.0, **params)

    def initial_state(self):
        from .pde import calibrate_gaps, poisson_state

        if "poisson" in self.initial_data:
            return poisson_state(self.initial_data["poisson"], self.M)
        params, _ = calibrate_gaps(self.initial_data["target_gaps"],
                                   tol=self.initial_data.get("tol", 1e-8))
        return poisson_state(params, self.M)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "E_m": self.E_m, "E_M": self.E_M,
            "epsilon": list(self.epsilon), "perturbation": dict(self.perturbation),
            "initial_data": dict(self.initial_data), "tail_energy": self.tail_energy,
            "M": self.M, "grid": self.grid, "dt": self.dt, "T": self.T,
            "sample_stride": self.sample_stride, "n_max": self.n_max,
            "M_L": self.M_L, "constants": dict(self.constants),
            "out_dir": self.out_dir, "seed": self.seed,
        }


def config_from_dict(doc: dict) -> ExperimentConfig:
    doc = {k: v for k, v in doc.items() if v is not None}
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"config schema violation: {err.message}") from err
    return ExperimentConfig(**doc)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return config_from_dict(doc)
