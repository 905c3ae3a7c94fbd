"""Run configuration: ``key = value`` files overridden by command-line flags."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .spectral import MIN_NODES
from .symbols import FAMILIES
from .tree import DEFAULT_MAX_VERTICES, MAX_KERNEL_ENTRIES, ball_size

OUTPUT_ENV = "TREEPDO_OUTPUT_DIR"
MAX_NODES = 4096


class ConfigError(ValueError):
    exit_code = 2


class UnknownKeyError(ConfigError):
    exit_code = 3


class InvalidValueError(ConfigError):
    exit_code = 4


class CapExceededError(ConfigError):
    exit_code = 5


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    q: int = 2
    radius: int = 4
    snodes: int = 256
    tail: int = 3
    family: str = "shifted_k"
    eps: float = 0.1
    k: int = 2
    support: float = 1.0
    epsilons: tuple[float, ...] = (0.4, 0.2, 0.1, 0.05)
    seed: int = 0
    output_dir: str = "."
    max_vertices: int = DEFAULT_MAX_VERTICES

    def validate(self) -> RunConfig:
        if self.q < 2:
            raise InvalidValueError(f"invalid value for q: {self.q} (need q >= 2)")
        if self.radius < 1:
            raise InvalidValueError(f"invalid value for radius: {self.radius} (need >= 1)")
        if self.snodes < MIN_NODES:
            raise InvalidValueError(f"invalid value for snodes: {self.snodes} (need >= {MIN_NODES})")
        if self.tail < 0:
            raise InvalidValueError(f"invalid value for tail: {self.tail} (need tail >= 0)")
        if self.family not in FAMILIES:
            raise InvalidValueError(f"invalid value for family: {self.family!r} (choose from {FAMILIES})")
        if self.k < 0:
            raise InvalidValueError(f"invalid value for k: {self.k}")
        if self.eps <= 0 or self.support <= 0:
            raise InvalidValueError("invalid value: eps and support must be positive")
        eps = self.epsilons
        if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidValueError(f"invalid value for epsilons: {eps} (need positive, strictly decreasing)")
        if self.max_vertices < 1:
            raise InvalidValueError(f"invalid value for max_vertices: {self.max_vertices}")
        if ball_size(self.radius, self.q) > self.max_vertices:
            raise CapExceededError(
                f"cap exceeded: ball of radius {self.radius} at q={self.q} has "
                f"{ball_size(self.radius, self.q)} vertices > max_vertices = {self.max_vertices}")
        if ball_size(self.radius, self.q) ** 2 > MAX_KERNEL_ENTRIES:
            raise CapExceededError(
                f"cap exceeded: a dense kernel on {ball_size(self.radius, self.q)} vertices "
                f"needs more than {MAX_KERNEL_ENTRIES} entries")
        if self.snodes > MAX_NODES:
            raise CapExceededError(f"cap exceeded: snodes = {self.snodes} > {MAX_NODES}")
        return self

    def as_text(self) -> str:
        return " ".join(f"{k}={_format(v)}" for k, v in asdict(self).items() if k != "output_dir")


def _format(v) -> str:
    if isinstance(v, tuple):
        return ",".join(f"{x:g}" for x in v)
    return str(v)


_CASTS = {f.name: f.type for f in fields(RunConfig)}
_CONVERT = {"int": int, "float": float, "str": str, "tuple[float, ...]": _float_list}


def _convert(key: str, value) -> object:
    if key not in _CASTS:
        raise UnknownKeyError(f"unknown key: {key!r}")
    try:
        return _CONVERT[_CASTS[key]](value)
    except (TypeError, ValueError):
        raise InvalidValueError(f"invalid value for {key}: {value!r}") from None


def read_config_file(path) -> dict[str, object]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = _convert(key, value)
    return out


def parse_config(overrides: dict[str, object] | None = None, path=None,
                 environ: dict[str, str] | None = None) -> RunConfig:
    """Defaults, then the file, then ``TREEPDO_OUTPUT_DIR``, then explicit overrides."""
    values: dict[str, object] = {}
    if path is not None:
        values.update(read_config_file(path))
    env = os.environ if environ is None else environ
    if env.get(OUTPUT_ENV):
        values["output_dir"] = env[OUTPUT_ENV]
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _convert(key, value)
    return replace(RunConfig(), **values).validate()
