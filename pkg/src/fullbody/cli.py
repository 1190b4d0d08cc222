"""Command line front end.

    fullbody simulate <config> [--out DIR] [--integrator NAME] [--sample-every K]
    fullbody compare  <config> [--out DIR] ...
    fullbody converge <config> --steps h1,h2,... [--integrator a,b] [--t-final T]

``<config>`` is an INI file or ``flyby`` for the shipped two-dumbbell run.
Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 bodies overlap.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import INTEGRATORS, load_config
from .errors import BodiesOverlap, ConfigError, InvalidPhysicalUnits, NoConvergence, SolverError
from .runner import compare, converge, format_compare, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_OVERLAP = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fullbody", description="Lie group variational integrators for the full two body problem.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("config", help="INI configuration file, or 'flyby'")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--sample-every", type=int, help="write every k-th step to the CSV")
        sp.add_argument("--h", type=float, help="override the step size")
        sp.add_argument("--t-final", type=float, help="override the final time")

    sp = sub.add_parser("simulate", help="integrate one configuration")
    common(sp)
    sp.add_argument("--integrator", choices=INTEGRATORS)

    sp = sub.add_parser("compare", help="run an LGVI and the RK4 baseline side by side")
    common(sp)
    sp.add_argument("--integrator", choices=INTEGRATORS)

    sp = sub.add_parser("converge", help="measure the order of accuracy")
    common(sp)
    sp.add_argument("--steps", type=_float_list, required=True, help="decreasing step sizes h1,h2,...")
    sp.add_argument("--integrator", help="comma separated integrator names")
    sp.add_argument("--reference-h", type=float, help="reference step (default min(steps)/4)")
    return p


def _load(args, integrator=None):
    cfg = load_config(args.config)
    return cfg.with_overrides(
        integrator=integrator,
        sample_every=args.sample_every,
        h=args.h,
        t_final=args.t_final,
        output=args.out,
    )


def _dispatch(args) -> int:
    if args.command == "simulate":
        cfg = _load(args, args.integrator)
        result = run(cfg, cfg.output)
        json.dump(result.summary(), sys.stdout, indent=2)
        print()
    elif args.command == "compare":
        cfg = _load(args, args.integrator)
        sys.stdout.write(format_compare(compare(cfg, cfg.output)))
    else:
        names = None
        if args.integrator:
            names = [n.strip() for n in args.integrator.split(",") if n.strip()]
            bad = [n for n in names if n not in INTEGRATORS]
            if bad:
                raise ConfigError(f"unknown integrator(s): {', '.join(bad)}")
        cfg = _load(args)
        steps = args.steps
        if len(steps) < 3 or any(b >= a for a, b in zip(steps, steps[1:])):
            raise ConfigError("--steps needs at least three strictly decreasing values")
        for h in steps:
            cfg.with_overrides(h=h)  # validates that each h divides t_final
        report = converge(cfg, steps, names, args.reference_h, cfg.output)
        json.dump(report, sys.stdout, indent=2)
        print()
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, InvalidPhysicalUnits) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BodiesOverlap as exc:
        print(f"bodies overlap at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_OVERLAP
    except (NoConvergence, SolverError) as exc:
        print(f"solver failure at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
