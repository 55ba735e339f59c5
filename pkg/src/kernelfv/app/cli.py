"""Command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys

from ..euler_state import InadmissibleStateError
from ..kernel_recon import KernelConfig, SingularSystemError, dump_vectors, precompute
from ..limiters import LimiterError
from ..problems import CATALOG, get_problem
from ..solver import SolverAbort
from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def _levels(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty level list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kernelfv", description="Kernel-based WENO-AO finite volume solver")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a configured problem")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory")
    r.add_argument("--until", type=float, default=None, help="override the final time")

    c = sub.add_parser("convergence", help="grid refinement study")
    c.add_argument("problem")
    c.add_argument("--radius", type=int, choices=(2, 3), default=2)
    c.add_argument("--levels", type=_levels, default=[32, 64])
    c.add_argument("--tol", type=float, default=None, help="atol = rtol for the step controller")
    c.add_argument("--out", default=None)

    sub.add_parser("list-problems", help="list the problem catalog")

    d = sub.add_parser("dump-recon", help="print reconstruction vectors")
    d.add_argument("--radius", type=int, choices=(2, 3), default=2)
    d.add_argument("--ell", type=float, default=5.0, help="kernel length scale over cell width")
    d.add_argument("--out", default=None)
    return p


def _run(args) -> int:
    from .runner import run
    cfg = load_config(args.config)
    res = run(cfg, out_dir=args.out, until=args.until)
    s = res.stats
    print(f"t={res.field.t:.6g} steps={s.steps} rejected={s.rejected} files={len(res.files)}")
    return EXIT_OK


def _convergence(args) -> int:
    from .convergence import run_convergence_suite
    over = {}
    if args.tol is not None:
        over = {"atol": args.tol, "rtol": args.tol}
    try:
        get_problem(args.problem)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    table = run_convergence_suite(args.problem, args.radius, args.levels, out_dir=args.out, **over)
    sys.stdout.write(table.to_text())
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "convergence":
            return _convergence(args)
        if args.command == "list-problems":
            for name in sorted(CATALOG):
                print(name)
            return EXIT_OK
        if args.command == "dump-recon":
            rset = precompute(args.radius, KernelConfig(args.ell))
            text = dump_vectors(rset, args.out)
            if args.out is None:
                sys.stdout.write(text)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverAbort, InadmissibleStateError, LimiterError, SingularSystemError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
