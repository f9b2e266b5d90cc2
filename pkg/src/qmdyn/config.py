"""Experiment configuration: a strict JSON object with CLI overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any

COMMANDS = (
    "defect", "drift", "harmonize", "hull-walk", "generic-set", "orbit-closure",
    "model-set", "approx-check", "twist-check", "skew-check", "example-final",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str = "defect"
    # group and quasimorphism
    rank: int = 2
    qm: str = "counting:ab"
    antisymmetrize: bool = False
    rescale3: bool = False
    perturb: bool = False
    # random walk
    L: int = 4
    n: int = 6
    N: int = 8
    steps: int = 100000
    seed: int = 7
    q: list = field(default_factory=lambda: ["1/5", "4/5"])
    samples: int = 100
    # symbolic dynamics
    K: int = 6
    W: int = 8
    B: str = "evens"
    # model sets
    d: int = 2
    window: list = field(default_factory=lambda: ["-1", "1"])
    R: str = "60"
    C: str = "4"
    # experiment
    variant: str = "Q3"
    format: str = "csv"
    out: str = "qmdyn-out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            expected = {"int": int, "str": str, "bool": bool, "list": list}[
                f.type if isinstance(f.type, str) else f.type.__name__]
            if expected is int and isinstance(v, bool) or not isinstance(v, expected):
                raise ConfigError(f"{f.name} must be {expected.__name__}, got {v!r}")
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.variant not in ("Q1", "Q2", "Q3"):
            raise ConfigError("variant must be Q1, Q2 or Q3")
        if self.rank < 1:
            raise ConfigError("rank must be >= 1")
        for name in ("L", "n", "N", "steps", "samples", "K", "W", "d"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if len(self.window) != 2 or not all(isinstance(x, str) for x in self.window):
            raise ConfigError("window must be two rational strings")
        if not all(isinstance(x, str) for x in self.q):
            raise ConfigError("q must be a list of rational strings")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e}") from None
        return cls.from_dict(data)


def json_schema() -> dict:
    """JSON schema of the config object (shipped as docs/config.schema.json)."""
    types = {"int": "integer", "str": "string", "bool": "boolean", "list": "array"}
    props = {}
    defaults = ExperimentConfig()
    for f in fields(ExperimentConfig):
        t = f.type if isinstance(f.type, str) else f.type.__name__
        prop = {"type": types[t], "default": getattr(defaults, f.name)}
        if t == "list":
            prop["items"] = {"type": "string"}
        props[f.name] = prop
    props["command"]["enum"] = list(COMMANDS)
    props["format"]["enum"] = ["csv", "json"]
    props["variant"]["enum"] = ["Q1", "Q2", "Q3"]
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "qmdyn experiment config",
        "type": "object",
        "additionalProperties": False,
        "properties": props,
    }
