"""Command-line front end: ``renorm-nbody <subcommand> ...``.

Exit codes: 0 success, 2 bad input (parse or invariant error), 3 numerical
failure (collision, non-convergence), 4 step cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .bounds import LAMBDA0, LAMBDA_SUP, compute_constants
from .errors import (CollisionError, ConvergenceError, DomainError, EstimateError, InvariantError,
                     MaxStepsError, ParseError)
from .experiments import (compare, radius_scan, radius_scan_rows, strip_width, trajectory_rows,
                          write_comparison, write_csv)
from .integrators import MAX_STEPS, IntegratorConfig, integrate
from .problems import GENERATORS, gen_binary_visitor, load_problem, save_problem
from .renorm import RenormChoice

log = logging.getLogger("renorm_nbody")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CAP = 0, 2, 3, 4
PRECISION_ENV = "RENORM_NBODY_PRECISION"


class UsageError(Exception):
    pass


def check_precision(env=None) -> str:
    """Validate ``RENORM_NBODY_PRECISION``; only the binary64 backend is built."""
    value = (os.environ if env is None else env).get(PRECISION_ENV, "f64").strip().lower() or "f64"
    if value == "f64":
        return value
    if value == "extended":
        raise UsageError("this build has no extended-precision integration backend; "
                         f"unset {PRECISION_ENV} or set it to 'f64'")
    raise UsageError(f"{PRECISION_ENV} must be 'f64' or 'extended', got {value!r}")


def _choice(args) -> RenormChoice:
    return RenormChoice(args.renorm, args.kappa)


def cmd_constants(args):
    report = compute_constants(args.tol, args.xi_power)
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_integrate(args):
    spec, state, T = load_problem(args.problem)
    if args.mode == "taylor" or args.dtau is not None:
        if args.dtau is None:
            raise UsageError("--mode taylor needs --dtau")
        config = IntegratorConfig(args.mode, dtau=args.dtau, order=args.order, t_end=T, stride=args.stride,
                                  max_steps=args.max_steps)
    else:
        config = IntegratorConfig("rk_adaptive", rtol=args.rtol, atol=args.atol, t_end=T, stride=args.stride,
                                  max_steps=args.max_steps)
    traj = integrate(spec, _choice(args), state, config)
    write_csv(args.out, *trajectory_rows(spec, traj))
    log.info("%d accepted, %d rejected steps; max relative energy error %.3g",
             traj.accepted, traj.rejected, traj.max_energy_error())


def cmd_radius_scan(args):
    if not 0 < args.lam < LAMBDA_SUP:
        raise UsageError(f"--lambda must lie in (0, {LAMBDA_SUP:.6f})")
    samples = radius_scan(load_problem(args.problem), args.lam, args.stride, args.dtau)
    write_csv(args.out, *radius_scan_rows(samples))
    products = [s.product for s in samples]
    log.info("%d samples; rho_hat * L in [%.6g, %.6g]", len(samples), min(products), max(products))


def cmd_strip_width(args):
    result = strip_width(load_problem(args.problem), _choice(args), args.dtau)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result.__dict__, fh, indent=2)
        fh.write("\n")
    log.info("%s: width %.6g, scaled width %.6g", result.choice, result.width, result.scaled_width)


def cmd_compare(args):
    choices = [RenormChoice(k.strip(), args.kappa) for k in args.renorms.split(",") if k.strip()]
    system = load_problem(args.problem)
    comp = compare(system, choices, args.rtol, args.atol, width_stride=args.width_stride)
    write_comparison(comp, system[0], args.outdir)
    for row in comp.rows:
        log.info("%-4s width %-10.4g scaled %-10.4g energy %-10.3g steps %d", row.kind, row.width,
                 row.scaled_width, row.energy_error, row.steps)


def cmd_gen_problem(args):
    if args.name == "binary-visitor":
        problem = gen_binary_visitor(args.speed)
    else:
        problem = GENERATORS[args.name]()
    save_problem(problem, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renorm-nbody", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print lambda0, lambda*, lambda_max and beta as JSON")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--xi-power", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=cmd_constants)

    def renorm_args(p):
        p.add_argument("--renorm", default="s1", choices=("s0", "s1", "s2", "s3", "s4"))
        p.add_argument("--kappa", type=float, default=1.0)

    p = sub.add_parser("integrate", help="integrate a problem file and write the trajectory as CSV")
    p.add_argument("--problem", required=True)
    renorm_args(p)
    p.add_argument("--mode", choices=("taylor", "rk"), default="taylor")
    p.add_argument("--dtau", type=float)
    p.add_argument("--rtol", type=float, default=1e-13)
    p.add_argument("--atol", type=float, default=1e-13)
    p.add_argument("--order", type=int, default=30)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--max-steps", type=int, default=MAX_STEPS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("radius-scan", help="radius estimate against the lower bound along an s1 run")
    p.add_argument("--problem", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=LAMBDA0)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--dtau", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_radius_scan)

    p = sub.add_parser("strip-width", help="strip width and scaled width for one renormalization")
    p.add_argument("--problem", required=True)
    renorm_args(p)
    p.add_argument("--dtau", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_strip_width)

    p = sub.add_parser("compare", help="adaptive physical-time RK against step-matched renormalized runs")
    p.add_argument("--problem", required=True)
    p.add_argument("--renorms", default="s1,s2,s3,s4")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--rtol", type=float, default=1e-13)
    p.add_argument("--atol", type=float, default=1e-13)
    p.add_argument("--width-stride", type=int, default=1)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-problem", help="write a built-in problem file")
    p.add_argument("name", choices=sorted(GENERATORS))
    p.add_argument("--speed", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_problem)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        check_precision()
        args.func(args)
    except (UsageError, ParseError, InvariantError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MaxStepsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (CollisionError, ConvergenceError, EstimateError, DomainError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
