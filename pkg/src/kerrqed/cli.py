"""Command-line entry point: ``kerrqed run|compare|figures``.

Exit codes: 0 success, 2 invalid config, 3 numeric failure, 4 resource cap.
Failures print a one-line JSON diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import presets, scenario
from .errors import (ConfigError, InvalidInputError, NumericFailureError,
                     ResourceCapError, SingularParametersError, TruncationOverflowError)

OUT_DIR_ENV = "KERRQED_OUT_DIR"
DEFAULT_OUT_DIR = "kerrqed-out"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    common.add_argument("--truncation", nargs=2, type=int, metavar=("N1", "N2"),
                        help="Fock dimensions of the two modes")
    common.add_argument("--threads", type=int, metavar="K", help="cap BLAS/OpenMP threads")
    common.add_argument("--t-max", type=float, help="override grid.t_max (units of 1/lambda1)")
    common.add_argument("--points", type=int, help="override grid.n_points")

    p = argparse.ArgumentParser(prog="kerrqed", description="Atom + two-mode Kerr cavity simulator")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run one scenario config")
    run.add_argument("config")
    cmp_ = sub.add_parser("compare", parents=[common], help="analytic vs oracle discrepancy")
    cmp_.add_argument("config")
    fig = sub.add_parser("figures", parents=[common], help="run a bundled figure preset")
    fig.add_argument("number", type=int, choices=(1, 2, 3, 4))
    return p


def _out_dir(args):
    return Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _apply(cfg, args):
    return scenario.with_overrides(cfg, truncation=args.truncation, t_max=args.t_max, points=args.points)


def _diagnostic(kind, exc, **extra):
    payload = {"error": kind, "message": str(exc)}
    payload.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _dispatch(args):
    out = _out_dir(args)
    if args.command == "run":
        cfg = _apply(scenario.load_config(args.config), args)
        scenario.run_scenario(cfg, out)
        print(out)
    elif args.command == "compare":
        cfg = _apply(scenario.load_config(args.config), args)
        path = scenario.write_comparison(scenario.compare(cfg), out)
        print(path)
    else:
        for name, cfg in presets.figure_configs(args.number):
            target = out / f"figure{args.number}" / name
            scenario.run_scenario(_apply(cfg, args), target)
            print(target)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        _diagnostic("config", "--threads must be at least 1", field="threads")
        return EXIT_CONFIG
    try:
        if args.threads is not None:
            with threadpool_limits(limits=args.threads):
                _dispatch(args)
        else:
            _dispatch(args)
    except ConfigError as exc:
        _diagnostic("config", exc, field=exc.field)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        sugg = list(exc.suggested_truncation) if exc.suggested_truncation else None
        _diagnostic("resource_cap", exc, estimate_mb=exc.estimate_mb, suggested_truncation=sugg)
        return EXIT_RESOURCE
    except (NumericFailureError, TruncationOverflowError, SingularParametersError) as exc:
        _diagnostic("numeric", exc)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        _diagnostic("config", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
