"""Plain-text run configuration: ``section.key = value`` lines, ``#`` comments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterable, Optional

from .errors import NSKError
from .field import Grid
from .model import ModelParams, Polynomial, PowerLaw, VanDerWaals, validate

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "default_config_text", "KEYS"]


class ConfigError(NSKError):
    """Malformed or inconsistent configuration (a usage error)."""


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v: str):
    return tuple(float(x) for x in v.replace(",", " ").split())


KEYS = {
    "model.mu": float, "model.nu": float, "model.kappa": float, "model.n": int,
    "pressure.type": str, "pressure.K": float, "pressure.g": float,
    "pressure.RT": float, "pressure.a": float, "pressure.b": float, "pressure.variant": str,
    "pressure.coefficients": _floats, "pressure.gamma": float, "pressure.p2": float,
    "grid.n": int, "grid.N": int, "grid.L": float,
    "solver.dt": float, "solver.steps": int, "solver.scheme": str, "solver.dealias": _bool,
    "solver.floor": float, "solver.cadence": int, "solver.override": _bool,
    "solver.korteweg": str, "solver.sobolev_s": float,
    "init.amplitude": float, "init.decay": float, "init.seed": int, "init.snapshot": str,
    "spectrum.rmin": float, "spectrum.rmax": float, "spectrum.count": int,
    "phase.densities": _floats,
    "propagate.time": float, "propagate.samples": int,
    "decay.tmin": float, "decay.tmax": float, "decay.samples": int, "decay.sigma": float,
    "decay.density": float, "decay.momentum": _floats, "decay.expected_slope": float,
    "decay.tolerance": float,
    "verify.level": str,
    "output.dir": str, "output.prefix": str,
}


@dataclass
class RunConfig:
    values: Dict[str, object] = field(default_factory=dict)

    def has_section(self, section: str) -> bool:
        return any(k.startswith(section + ".") for k in self.values)

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def require(self, key: str):
        if key not in self.values:
            raise ConfigError(f"missing required key {key!r}")
        return self.values[key]

    def require_section(self, section: str):
        if not self.has_section(section):
            raise ConfigError(f"missing required section [{section}]")

    def law(self):
        kind = str(self.require("pressure.type")).lower()
        try:
            if kind == "power":
                return PowerLaw(self.get("pressure.K", 1.0), self.get("pressure.g", 2.0))
            if kind == "vdw":
                return VanDerWaals(self.require("pressure.RT"), self.require("pressure.a"),
                                   self.require("pressure.b"), self.get("pressure.variant", "reduced"))
            if kind == "polynomial":
                return Polynomial(self.require("pressure.coefficients"))
        except NSKError:
            raise
        except (TypeError, ValueError) as err:
            raise ConfigError(f"invalid pressure law settings: {err}") from err
        if kind == "taylor":
            return None
        raise ConfigError(f"unknown pressure.type {kind!r}")

    def params(self) -> ModelParams:
        self.require_section("model")
        mu, nu, kappa = (self.require(f"model.{k}") for k in ("mu", "nu", "kappa"))
        n = self.get("model.n", 2)
        law = self.law()
        if law is None:
            return ModelParams.from_coefficients(mu, nu, kappa, self.require("pressure.gamma"), n,
                                                 self.get("pressure.p2", 0.0))
        return validate(mu, nu, kappa, law, n)

    def grid(self, n: Optional[int] = None) -> Grid:
        self.require_section("grid")
        gn = self.get("grid.n", n)
        if n is not None and gn != n:
            raise ConfigError(f"grid.n = {gn} disagrees with model.n = {n}")
        try:
            return Grid(gn, self.require("grid.N"), self.get("grid.L", 2 * math.pi))
        except ValueError as err:
            raise ConfigError(f"grid: {err}") from err


def parse_config(lines: Iterable[str], base: Optional[RunConfig] = None) -> RunConfig:
    """Parse configuration lines on top of ``base``; unknown keys are rejected."""
    cfg = RunConfig(dict(base.values) if base else {})
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected 'section.key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {num}: unknown key {key!r}")
        try:
            cfg.values[key] = KEYS[key](value)
        except ValueError as err:
            raise ConfigError(f"line {num}: bad value for {key!r}: {err}") from err
    return cfg


def default_config_text() -> str:
    return resources.files("nskorteweg").joinpath("data/default.cfg").read_text()


def load_config(path: Optional[str] = None, overrides: Iterable[str] = ()) -> RunConfig:
    """Read ``path`` (or the shipped default) and apply ``key=value`` overrides."""
    if path is None:
        text = default_config_text()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read config {path!r}: {err}") from err
    cfg = parse_config(text.splitlines())
    return parse_config(overrides, cfg)
