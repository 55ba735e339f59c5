"""Drive one simulation from a RunConfig."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from ..problems import get_problem
from ..solver import Field, RunStats, SchemeOptions, advance_to
from .config import RunConfig, grid_size
from .output import write_snapshot

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    field: Field
    stats: RunStats
    files: list = field(default_factory=list)


def scheme_options(cfg: RunConfig) -> SchemeOptions:
    s = cfg.scheme
    return SchemeOptions(radius=s.radius, ell_over_delta=s.ell_over_delta,
                         riemann=cfg.riemann_solver(), kxrcf_enabled=s.kxrcf,
                         kxrcf_m=s.kxrcf_m, kappa=s.kappa, flattener_kf=s.flattener_kf,
                         epsilon=s.epsilon, positivity=s.positivity,
                         interior_limiting=s.interior_limiting)


def run(cfg: RunConfig, out_dir: Optional[str] = None, until: Optional[float] = None,
        write: bool = True) -> RunResult:
    """Set up the configured problem, integrate it and write snapshots.

    Snapshots go out at step 0, every ``output.every`` accepted steps
    (0 disables intermediate output) and at the final time.
    """
    pb = get_problem(cfg.problem.name)
    t_final = until if until is not None else (cfg.problem.t_final or pb.t_final)
    nx, ny = grid_size(cfg)
    scheme, fld = pb.setup(nx, ny, options=scheme_options(cfg))
    controls = pb.controls(cfl_max=cfg.time.cfl, atol=cfg.time.atol, rtol=cfg.time.rtol,
                           dt_max=cfg.time.dt_max, max_steps=cfg.time.max_steps)
    out_dir = out_dir or cfg.output.dir
    every = cfg.output.every
    files: list = []

    def dump(f: Field, step: int):
        if write:
            files.extend(write_snapshot(f, out_dir, step, pb.gamma, cfg.output.format,
                                        flags=scheme.flags))

    dump(fld, 0)

    def callback(f: Field, stats: RunStats):
        if every and stats.steps % every == 0 and f.t < t_final:
            dump(f, stats.steps)

    log.info("running %s on %dx%d, R=%d, t_final=%g", pb.name, scheme.grid.nx, scheme.grid.ny,
             scheme.R, t_final)
    fld, stats = advance_to(scheme, fld, t_final, controls, callback)
    dump(fld, stats.steps)
    return RunResult(fld, stats, files)
