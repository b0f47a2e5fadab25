"""Run configuration.

Values are layered: built-in defaults, then an optional YAML file, then
``SINGLINK_*`` environment variables, then flags given on the command line.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from singlink.common import InputError, is_power_of_two

logger = logging.getLogger(__name__)

TRACE_MODES = ("continuation", "multiseed")


class ConfigError(InputError):
    """The run configuration is invalid"""


# environment variable -> (field, type)
ENVIRONMENT = {
    "SINGLINK_EPSILON": ("epsilon", float),
    "SINGLINK_SAMPLES": ("samples", int),
    "SINGLINK_TOL": ("tol", float),
    "SINGLINK_WORKERS": ("workers", int),
    "SINGLINK_TRACE_MODE": ("trace_mode", str),
}

# accepted spellings in YAML files
ALIASES = {"lambda": "lam", "chi": "euler_char", "dbl": "double_points"}

# YAML 1.1 reads 1e-4 as a string
NUMERIC = {
    "epsilon": float,
    "tol": float,
    "lam": float,
    "r": float,
    "search_max": float,
    "samples": int,
    "selfint": int,
    "euler_char": int,
    "double_points": int,
    "workers": int,
}


def _coerce(name: str, value: Any) -> Any:
    cast = NUMERIC.get(name)
    if cast is None or isinstance(value, cast) and not isinstance(value, bool):
        return value
    if isinstance(value, bool) or (cast is int and isinstance(value, float) and not value.is_integer()):
        raise ConfigError(f"{name} must be {cast.__name__}, got {value!r}")
    try:
        return cast(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} must be {cast.__name__}, got {value!r}") from e


@dataclass(frozen=True)
class RunConfig:
    epsilon: float = 1e-2
    samples: int = 4096
    tol: float = 1e-10
    lam: float | None = None
    r: float | None = None
    selfint: int | None = None
    euler_char: int | None = None
    double_points: int | None = None
    json_path: str | None = None
    svg_path: str | None = None
    trace_mode: str = "continuation"
    workers: int | None = None
    search_max: float = 1.0

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    def merged(self, values: Mapping[str, Any]) -> RunConfig:
        """Copy with the given non-None values applied."""
        updates = {}
        for key, value in values.items():
            name = ALIASES.get(key, key)
            if name not in self.field_names():
                raise ConfigError(f"unknown configuration key {key!r}")
            if value is not None:
                updates[name] = _coerce(name, value)
        return dataclasses.replace(self, **updates)

    def validate(self) -> RunConfig:
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.samples >= 256 and is_power_of_two(self.samples)):
            raise ConfigError(f"samples must be a power of two >= 256, got {self.samples}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.trace_mode not in TRACE_MODES:
            raise ConfigError(f"trace mode must be one of {', '.join(TRACE_MODES)}, got {self.trace_mode!r}")
        if self.lam is not None and not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if self.r is not None and not self.r > 0:
            raise ConfigError(f"r must be positive, got {self.r}")
        return self

    @classmethod
    def load(
        cls,
        path: str | Path | None = None,
        overrides: Mapping[str, Any] | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> RunConfig:
        config = cls()
        if path is not None:
            config = config.merged(read_yaml(path))
        config = config.merged(from_environment(os.environ if environ is None else environ))
        if overrides:
            config = config.merged(overrides)
        return config.validate()


def read_yaml(path: str | Path) -> dict[str, Any]:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: malformed YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping of settings")
    logger.debug(f"loaded settings from {path}: {sorted(data)}")
    return data


def from_environment(environ: Mapping[str, str]) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for var, (name, cast) in ENVIRONMENT.items():
        raw = environ.get(var)
        if not raw:
            continue
        try:
            values[name] = cast(raw)
        except ValueError as e:
            raise ConfigError(f"{var}={raw!r} is not a valid {cast.__name__}") from e
    return values
