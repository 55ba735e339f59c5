"""Configuration, output, oracles and the command-line interface."""
from .config import ConfigError, RunConfig, parse_config
from .convergence import eoc, l1_error, run_convergence_suite
from .exact_riemann import exact_riemann, star_state
from .output import write_snapshot

__all__ = ["ConfigError", "RunConfig", "parse_config", "eoc", "l1_error",
           "run_convergence_suite", "exact_riemann", "star_state", "write_snapshot"]
