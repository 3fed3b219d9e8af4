"""Run configuration: a flat ``key = value`` file plus command-line overrides.

Unknown keys are rejected, and every numeric range is checked before any
computation starts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ParseError, ValidationError
from .integrator import IntegratorConfig
from .poincare import PoincareConfig, default_sections
from .model import Params, VectorField
from .singular_cycle import CornerRule

SUBCOMMANDS = ("simulate", "singular-cycle", "limit-cycle", "verify-charts", "scan", "convergence")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _int(text: str) -> int:
    return int(str(text).strip())


def _str(text: str) -> str:
    return str(text).strip()


# key -> converter from the textual value
_CONVERTERS = {
    "gamma": float,
    "eps": float,
    "eps_ladder": _floats,
    "gamma_grid": _floats,
    "x0": _floats,
    "t_end": float,
    "field": _str,
    "corner_rule": _str,
    "n_points": _int,
    "rel_tol": float,
    "abs_tol": float,
    "delta1": float,
    "delta2": float,
    "delta3": float,
    "half_width": float,
    "samples": _int,
    "seed": _int,
    "workers": _int,
    "output": _str,
}


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 0.1
    eps: float = 0.01
    eps_ladder: Optional[tuple[float, ...]] = None
    gamma_grid: Optional[tuple[float, ...]] = None
    # simulate
    x0: tuple[float, ...] = (0.3, 0.3, 0.3)
    t_end: float = 50.0
    field: str = "auxiliary"
    # singular-cycle
    corner_rule: str = "fold-exit"
    n_points: int = 400
    # integrator tolerances
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    # Poincare sections
    delta1: float = 0.1
    delta2: float = 0.1
    delta3: float = 0.1
    half_width: float = 0.15
    # verify-charts
    samples: int = 1000
    seed: int = 0
    workers: int = 1
    output: Optional[str] = None

    @property
    def ladder_mode(self) -> bool:
        return self.eps_ladder is not None

    @property
    def params(self) -> Params:
        return Params(self.gamma, self.eps)

    def integrator(self, record_every: int = 1) -> IntegratorConfig:
        return IntegratorConfig(self.rel_tol, self.abs_tol, record_every=record_every)

    def poincare(self, gamma: Optional[float] = None) -> PoincareConfig:
        g = self.gamma if gamma is None else gamma
        secs = default_sections(Params(g, 0.0), self.delta1, self.delta2, self.delta3, self.half_width)
        return PoincareConfig(integrator=self.integrator(record_every=0), sections=secs)

    def validate(self) -> "RunConfig":
        def need(ok, key, reason):
            if not ok:
                raise ValidationError(key, reason)

        def unit_open(x):
            return math.isfinite(x) and 0.0 < x < 1.0

        need(unit_open(self.gamma), "gamma", f"must lie in (0, 1), got {self.gamma}")
        need(math.isfinite(self.eps) and self.eps >= 0.0, "eps", f"must be finite and >= 0, got {self.eps}")
        if self.eps_ladder is not None:
            lad = self.eps_ladder
            need(len(lad) >= 1, "eps_ladder", "empty ladder")
            need(all(math.isfinite(e) and e > 0 for e in lad), "eps_ladder", "values must be positive")
            need(all(b < a for a, b in zip(lad, lad[1:])), "eps_ladder", "must be strictly decreasing")
        if self.gamma_grid is not None:
            need(len(self.gamma_grid) >= 1, "gamma_grid", "empty grid")
            need(all(unit_open(g) for g in self.gamma_grid), "gamma_grid", "values must lie in (0, 1)")
        need(len(self.x0) == 3, "x0", "needs three comma-separated values f,c,e")
        need(all(0.0 <= x <= 1.0 for x in self.x0), "x0", "must lie in the unit cube")
        need(math.isfinite(self.t_end) and self.t_end > 0, "t_end", "must be positive")
        try:
            VectorField.parse(self.field)
        except (KeyError, ValueError):
            raise ValidationError("field", f"unknown vector field {self.field!r}") from None
        try:
            CornerRule.parse(self.corner_rule)
        except ValueError:
            raise ValidationError("corner_rule", f"unknown rule {self.corner_rule!r}") from None
        need(self.n_points >= 2, "n_points", "must be >= 2")
        need(0.0 < self.rel_tol < 1.0, "rel_tol", "must lie in (0, 1)")
        need(0.0 < self.abs_tol < 1.0, "abs_tol", "must lie in (0, 1)")
        for k in ("delta1", "delta2", "delta3"):
            need(0.0 < getattr(self, k) < 0.5, k, "must lie in (0, 1/2)")
        need(0.0 < self.half_width <= 0.5, "half_width", "must lie in (0, 1/2]")
        need(self.samples >= 1, "samples", "must be >= 1")
        need(self.seed >= 0, "seed", "must be >= 0")
        need(self.workers >= 1, "workers", "must be >= 1")
        return self


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a dict of converted values."""
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(no, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ParseError(no, f"unknown key {key!r}")
        if not value:
            raise ParseError(no, f"missing value for {key!r}")
        if key in out:
            raise ParseError(no, f"duplicate key {key!r}")
        try:
            out[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ParseError(no, f"bad value for {key!r}: {exc}") from None
    return out


def parse_config(source=None, overrides: Optional[dict] = None) -> RunConfig:
    """Build a validated RunConfig from a file (path or text) and flag overrides.

    ``source`` may be a path, a string of config text, or None.  Entries of
    ``overrides`` that are None are ignored, so argparse defaults do not mask
    file values.
    """
    values: dict = {}
    if source is not None:
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                        and "=" not in source):
            text = Path(source).read_text()
        else:
            text = str(source)
        values.update(parse_config_text(text))
    known = {f.name for f in fields(RunConfig)}
    for k, v in (overrides or {}).items():
        k = k.replace("-", "_")
        if v is None:
            continue
        if k not in known:
            raise ValidationError(k, "unknown key")
        if isinstance(v, str) and k in _CONVERTERS and _CONVERTERS[k] is not _str:
            try:
                v = _CONVERTERS[k](v)
            except ValueError as exc:
                raise ValidationError(k, str(exc)) from None
        values[k] = v
    for k in ("eps_ladder", "gamma_grid", "x0"):
        if k in values and values[k] is not None:
            values[k] = tuple(float(x) for x in values[k])
    cfg = replace(RunConfig(), **values)
    return cfg.validate()
