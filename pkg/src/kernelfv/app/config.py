"""Run configuration: a small sectioned ``key = value`` format.

Example::

    [problem]
    name = sod

    [grid]
    nx = 200

    [scheme]
    radius = 3

Keys may also be written with a dotted prefix outside any section
(``scheme.radius = 3``).  ``#`` and ``;`` start comments.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from typing import Optional

from .. import geometry
from ..problems import CATALOG, get_problem

log = logging.getLogger(__name__)

SECTIONS = ("problem", "grid", "scheme", "time", "output")


class ConfigError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass
class ProblemSection:
    name: str = ""
    t_final: Optional[float] = None


@dataclass
class GridSection:
    nx: Optional[int] = None
    ny: Optional[int] = None


@dataclass
class SchemeSection:
    radius: int = 2
    ell_over_delta: float = 5.0
    riemann: Optional[str] = None
    epsilon: float = 1e-40
    kxrcf: bool = True
    kxrcf_m: float = 1.5
    kappa: float = 0.4
    flattener_kf: float = 0.33
    positivity: bool = True
    interior_limiting: Optional[bool] = None
    deterministic: bool = True


@dataclass
class TimeSection:
    cfl: float = 1.0
    atol: float = 1e-4
    rtol: float = 1e-4
    dt_max: float = math.inf
    max_steps: int = 10_000_000


@dataclass
class OutputSection:
    dir: str = "output"
    every: int = 0
    format: str = "csv"


@dataclass
class RunConfig:
    problem: ProblemSection = field(default_factory=ProblemSection)
    grid: GridSection = field(default_factory=GridSection)
    scheme: SchemeSection = field(default_factory=SchemeSection)
    time: TimeSection = field(default_factory=TimeSection)
    output: OutputSection = field(default_factory=OutputSection)

    def riemann_solver(self) -> str:
        if self.scheme.riemann is not None:
            return self.scheme.riemann
        return get_problem(self.problem.name).riemann


_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _convert(raw: str, typ, key: str, line: int):
    text = raw.strip()
    base = typ
    if isinstance(typ, str):
        base = {"int": int, "float": float, "str": str, "bool": bool,
                "Optional[int]": int, "Optional[float]": float, "Optional[str]": str,
                "Optional[bool]": bool}[typ]
    try:
        if base is bool:
            return _BOOL[text.lower()]
        if base is int:
            return int(text)
        if base is float:
            return float(text)
        return text
    except (KeyError, ValueError):
        raise ConfigError(f"{key}: expected {base.__name__}, got {text!r}", line) from None


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    section = None
    seen_name = False
    grid_lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        sec = section
        if "." in key:
            sec, key = key.split(".", 1)
            if sec not in SECTIONS:
                raise ConfigError(f"unknown section {sec!r} in dotted key", lineno)
        if sec is None:
            raise ConfigError(f"key {key!r} outside any section", lineno)
        obj = getattr(cfg, sec)
        types = {f.name: f.type for f in fields(obj)}
        if key not in types:
            raise ConfigError(f"unknown key {sec}.{key}", lineno)
        setattr(obj, key, _convert(value, types[key], f"{sec}.{key}", lineno))
        if sec == "problem" and key == "name":
            seen_name = True
        if sec == "grid":
            grid_lines[key] = lineno
        _check_value(cfg, sec, key, lineno)
    if not seen_name:
        raise ConfigError("missing problem name ([problem] name = ...)")
    _check_grid(cfg, grid_lines)
    if cfg.scheme.riemann is not None and cfg.scheme.riemann != get_problem(cfg.problem.name).riemann:
        log.warning("problem %s defaults to the %s solver; using %s as configured",
                    cfg.problem.name, get_problem(cfg.problem.name).riemann, cfg.scheme.riemann)
    return cfg


def _check_value(cfg: RunConfig, sec: str, key: str, line: int) -> None:
    val = getattr(getattr(cfg, sec), key)
    if sec == "problem" and key == "name" and val not in CATALOG:
        raise ConfigError(f"unknown problem {val!r}; available: {', '.join(sorted(CATALOG))}", line)
    if sec == "scheme" and key == "radius" and val not in geometry.SUPPORTED_RADII:
        raise ConfigError(f"unsupported radius {val}", line)
    if sec == "scheme" and key == "riemann" and val not in ("hll", "hllc"):
        raise ConfigError(f"unknown Riemann solver {val!r}", line)
    if sec == "output" and key == "format" and val not in ("csv", "vtk", "both"):
        raise ConfigError(f"unknown output format {val!r}", line)
    if sec == "grid" and val is not None and val < 2 * cfg.scheme.radius + 1:
        raise ConfigError(f"grid.{key} too small", line)
    positive = {("scheme", "ell_over_delta"), ("scheme", "epsilon"), ("scheme", "kappa"),
                ("time", "cfl"), ("time", "atol"), ("time", "rtol"), ("time", "dt_max"),
                ("problem", "t_final")}
    if (sec, key) in positive and not val > 0:
        raise ConfigError(f"{sec}.{key} must be positive", line)


def grid_size(cfg: RunConfig) -> tuple[Optional[int], Optional[int]]:
    """(nx, ny) with a missing count derived from the domain aspect ratio."""
    nx, ny = cfg.grid.nx, cfg.grid.ny
    if nx is None and ny is None:
        return None, None
    pb = get_problem(cfg.problem.name)
    aspect = (pb.ylim[1] - pb.ylim[0]) / (pb.xlim[1] - pb.xlim[0])
    if ny is None:
        ny = max(1, round(nx * aspect))
    elif nx is None:
        nx = max(1, round(ny / aspect))
    return nx, ny


def _check_grid(cfg: RunConfig, lines: dict) -> None:
    nx, ny = grid_size(cfg)
    if nx is None:
        return
    R = cfg.scheme.radius
    for key, n in (("nx", nx), ("ny", ny)):
        if n < R:
            raise ConfigError(f"grid.{key} = {n} is smaller than the stencil radius {R}",
                              lines.get(key))
    pb = get_problem(cfg.problem.name)
    dx = (pb.xlim[1] - pb.xlim[0]) / nx
    dy = (pb.ylim[1] - pb.ylim[0]) / ny
    if abs(dx - dy) > 1e-12 * dx:
        raise ConfigError(f"grid {nx}x{ny} gives non-square cells on {pb.name} "
                          f"(dx={dx:.6g}, dy={dy:.6g})", lines.get("ny", lines.get("nx")))


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
