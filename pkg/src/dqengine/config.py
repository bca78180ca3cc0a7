"""Run configuration: a ``key = value`` text file with ``#`` comments.

Every key has a default, so a missing or empty file is a valid
configuration. Unknown keys and unparsable values are rejected with the
offending line number.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .feynman_kac import Schedule
from .moyal import QuadratureParams

__all__ = ["ConfigError", "Config", "DEFAULTS", "load_config"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.line = line


def _positive(v):
    return v > 0


def _non_negative(v):
    return v >= 0


def _growth(v):
    return v > 1


def _at_least_3(v):
    return v >= 3


# key -> (type, default, check, requirement text)
DEFAULTS: dict[str, tuple[type, object, object, str]] = {
    "hbar": (float, 1.0, _positive, "> 0"),
    "fk.tau0": (float, 1.0, _positive, "> 0"),
    "fk.growth": (float, 2.0, _growth, "> 1"),
    "fk.max_steps": (int, 12, _at_least_3, ">= 3"),
    "fk.tol": (float, 1e-6, _positive, "> 0"),
    "fk.min_tau": (float, 0.0, _non_negative, ">= 0"),
    "fk.fermi.tau0": (float, 1.0, _positive, "> 0"),
    "fk.fermi.growth": (float, 2.0, _growth, "> 1"),
    "fk.fermi.max_steps": (int, 10, _at_least_3, ">= 3"),
    "fk.fermi.tol": (float, 1e-3, _positive, "> 0"),
    "fk.fermi.min_tau": (float, 1000.0, _non_negative, ">= 0"),
    "quad.cutoff": (float, 1e-12, _positive, "> 0"),
    "quad.epsabs": (float, 1e-13, _positive, "> 0"),
    "quad.epsrel": (float, 1e-11, _positive, "> 0"),
    "quad.limit": (int, 400, _positive, "> 0"),
    "quad.r_max": (float, 1e4, _positive, "> 0"),
    "quad.tol": (float, 1e-9, _positive, "> 0"),
    "regime.ratio": (float, 0.2, _positive, "> 0"),
    "regime.weak": (float, 1e-3, _positive, "> 0"),
    "propagator.steps": (int, 2000, _positive, "> 0"),
}


@dataclass
class Config:
    values: dict = field(default_factory=lambda: {k: spec[1] for k, spec in DEFAULTS.items()})
    source: str | None = None

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def hbar(self) -> float:
        return self.values["hbar"]

    def schedule(self) -> Schedule:
        v = self.values
        return Schedule(v["fk.tau0"], v["fk.growth"], v["fk.max_steps"], v["fk.tol"], True, v["fk.min_tau"])

    def fermi_schedule(self) -> Schedule:
        v = self.values
        return Schedule(
            v["fk.fermi.tau0"], v["fk.fermi.growth"], v["fk.fermi.max_steps"], v["fk.fermi.tol"], True, v["fk.fermi.min_tau"]
        )

    def quadrature(self) -> QuadratureParams:
        v = self.values
        return QuadratureParams(v["quad.cutoff"], v["quad.epsabs"], v["quad.epsrel"], v["quad.limit"], v["quad.r_max"], v["quad.tol"])

    def as_dict(self) -> dict:
        return dict(sorted(self.values.items()))


def _coerce(key: str, raw: str, line: int | None, path: str | None):
    typ, _, check, need = DEFAULTS[key]
    try:
        if typ is int:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError
            value = int(as_float)
        else:
            value = float(raw)
    except ValueError:
        raise ConfigError(f"{key} expects {'an integer' if typ is int else 'a number'}, got {raw!r}", line, path) from None
    if not check(value):
        raise ConfigError(f"{key} must be {need}, got {raw}", line, path)
    return value


def parse_config(text: str, path: str | None = None) -> Config:
    cfg = Config(source=path)
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno, path)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if not raw:
            raise ConfigError(f"missing value for {key}", lineno, path)
        cfg.values[key] = _coerce(key, raw, lineno, path)
    return cfg


def load_config(path: str | os.PathLike | None) -> Config:
    """Read a configuration file; a missing path gives the defaults."""
    if path is None or not os.path.exists(path):
        return Config(source=None)
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))
