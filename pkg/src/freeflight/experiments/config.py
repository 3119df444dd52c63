"""Plain-text ``key = value`` run configuration."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from ..kkt import DEFAULT_BEND_AMPLITUDES, SolveOptions
from ..timefunctional import ProblemSpec
from ..windfield import benchmark_field, zero_field


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    field: str = "benchmark"
    airspeed: float = 1.0
    N: int = 512
    tol: float = 1e-10
    max_iter: int = 100
    eps: float = 1e-3
    fd_hessian: bool = False
    origin: tuple[float, ...] = (0.0, 0.0)
    destination: tuple[float, ...] = (1.0, 0.0)
    hf_min: float = -0.6
    hf_max: float = 0.6
    hf_steps: int = 61
    lf_min: float = -0.6
    lf_max: float = 0.6
    lf_steps: int = 61
    M: int = 11
    passes: int = 2
    use_smoothing: bool = False
    seeds: tuple[float, ...] = DEFAULT_BEND_AMPLITUDES
    levels: Optional[tuple[float, ...]] = None

    def problem(self) -> ProblemSpec:
        wind = {"benchmark": benchmark_field, "zero": zero_field}[self.field]
        wind = wind(self.airspeed) if self.field == "benchmark" else wind()
        return ProblemSpec(wind, self.airspeed, self.N, self.fd_hessian)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(tol=self.tol, max_iter=self.max_iter)

    def validate(self) -> "RunConfig":
        if self.field not in ("benchmark", "zero"):
            raise ConfigError(f"unknown field {self.field!r}")
        if self.airspeed <= 0 or self.N < 2 or self.tol <= 0 or self.max_iter < 0 or self.eps <= 0:
            raise ConfigError("airspeed, N, tol, max_iter and eps must be positive")
        if self.hf_steps < 2 or self.lf_steps < 2:
            raise ConfigError("sweep axes need at least 2 steps")
        if self.M < 2 or self.passes < 0:
            raise ConfigError("M must be >= 2 and passes >= 0")
        if len(self.origin) != 2 or len(self.destination) != 2:
            raise ConfigError("origin and destination are 2D points")
        return self


_PARSERS = {
    "field": str.strip, "airspeed": float, "N": int, "tol": float, "max_iter": int, "eps": float,
    "fd_hessian": _bool, "origin": _floats, "destination": _floats,
    "hf_min": float, "hf_max": float, "hf_steps": int,
    "lf_min": float, "lf_max": float, "lf_steps": int,
    "M": int, "passes": int, "use_smoothing": _bool, "seeds": _floats, "levels": _floats,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}
_ALIASES = {"n": "N", "m": "M", "segments": "M"}


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    values = {}
    for key, raw in parser["run"].items():
        name = key if key in _PARSERS else _ALIASES.get(key.lower(), key)
        if name not in _PARSERS:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            values[name] = _PARSERS[name](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return RunConfig(**values).validate()


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
