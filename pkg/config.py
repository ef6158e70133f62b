import json
import os
from typing import Literal

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from errors import ConfigError
from seeds import replica_seeds

CONFIG_DIR = os.path.join(os.path.expanduser("~"), ".obstsim")
CONFIG_FILE = os.path.join(CONFIG_DIR, "config.json")

DEFAULTS = {
    "scenario": "fig3",
    "n": 128,
    "k": 2,
    "guest": "rnd",
    "sequence": "match",
    "seed": 0,
    "replicas": 1,
    "output": "results",
}


class ExperimentConfig(BaseModel):
    """Flat experiment description; every field is echoed into result metadata."""

    scenario: str = Field(min_length=1)
    n: int = Field(ge=2)
    k: int = Field(default=1, ge=1)
    m: int | None = Field(default=None, ge=1)  # None means n * n
    max_requests: int = Field(default=1_000_000, ge=1)

    guest: Literal["bt", "edgelist", "rnd", "bad2"] = "rnd"
    edge_list: str | None = None
    swarm_size: int = Field(default=32, ge=2)
    swarms_per_peer: int = Field(default=2, ge=1)
    rnd_k: int = Field(default=16, ge=1)

    sequence: Literal["match", "rw", "uniform"] = "match"
    p_repeat: float = Field(default=0.5, ge=0, le=1)
    adjust: bool = True
    adjust_every: int = Field(default=1, ge=1)
    churn: int = Field(default=0, ge=0)
    symmetric: bool = False

    seed: int = 0
    replicas: int = Field(default=1, ge=1)
    seeds: list[int] | None = None
    output: str = "results"
    sample_every: int | None = Field(default=None, ge=1)  # None means every n requests
    workers: int = Field(default=1, ge=1)

    n_values: list[int] | None = None
    k_values: list[int] | None = None
    sequences: list[str] | None = None
    lambdas: list[int] | None = None
    fractions: list[float] | None = None

    @field_validator("n_values", "k_values")
    @classmethod
    def validate_sizes(cls, value: list[int] | None) -> list[int] | None:
        if value is None:
            return value
        if not value or any(v < 1 for v in value):
            raise ValueError("must be a non-empty list of positive integers")
        return value

    @field_validator("sequences")
    @classmethod
    def validate_sequences(cls, value: list[str] | None) -> list[str] | None:
        if value is None:
            return value
        bad = [s for s in value if s not in ("match", "rw-0.5", "rw-1.0", "uniform")]
        if bad:
            raise ValueError(f"unknown sequence generators {bad}; use match, rw-0.5, rw-1.0, uniform")
        return value

    @field_validator("lambdas")
    @classmethod
    def validate_lambdas(cls, value: list[int] | None) -> list[int] | None:
        if value is not None and any(v < 0 for v in value):
            raise ValueError("churn rates must be >= 0")
        return value

    @field_validator("fractions")
    @classmethod
    def validate_fractions(cls, value: list[float] | None) -> list[float] | None:
        if value is not None and any(not 0 <= f < 1 for f in value):
            raise ValueError("removal fractions must lie in [0, 1)")
        return value

    @model_validator(mode="after")
    def check_guest(self) -> "ExperimentConfig":
        if self.guest == "edgelist" and not self.edge_list:
            raise ValueError("guest 'edgelist' needs an edge_list path")
        if self.guest == "bad2":
            sizes = self.n_values or [self.n]
            if any(v % 4 or v < 4 for v in sizes):
                raise ValueError("guest 'bad2' needs n divisible by 4")
        return self

    def requests_for(self, n: int) -> int:
        return min(self.m if self.m is not None else n * n, self.max_requests)

    def cadence_for(self, n: int) -> int:
        return self.sample_every or n

    def replica_seed_list(self) -> list[int]:
        return list(self.seeds) if self.seeds else replica_seeds(self.seed, self.replicas)


def _read(path: str) -> dict:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object of settings")
    return data


def validate(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        problems = []
        for err in exc.errors():
            where = ".".join(str(p) for p in err["loc"]) or "config"
            problems.append(f"{where}: {err['msg']}")
        raise ConfigError("; ".join(problems)) from None


def load(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """DEFAULTS, then the user config file, then ``path``, then non-None overrides."""
    data = dict(DEFAULTS)
    if os.path.exists(CONFIG_FILE):
        data.update(_read(CONFIG_FILE))
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file {path} does not exist")
        data.update(_read(path))
    if overrides:
        data.update({key: value for key, value in overrides.items() if value is not None})
    return validate(data)
