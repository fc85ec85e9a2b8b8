"""Command line entry point.

::

    app <experiment> [--config path.json] [--output dir] [--seed N] [--threads N]
    app report run_a/run.json run_b/run.json [--output dir]

``--threads`` (or ``APP_THREADS``) caps the BLAS thread pools. Exit status
is 0 when every asserted check passed, 1 when a check failed, 2 for an
invalid configuration and 3 for any other library error.
"""

import argparse
import os
import sys

from threadpoolctl import threadpool_limits

from ..errors import ConfigError, CoverageError, StrichartzError, WavefrontError
from .config import EXPERIMENTS, load_config, parse_config
from .core import report, run, write_report

HINTS = {
    WavefrontError: "increase grid.r_max or reduce time.t_max",
    CoverageError: "refine the time grid or narrow the scanned shells",
}


def _threads(value):
    if value is None:
        env = os.environ.get("APP_THREADS")
        if not env:
            return None
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"APP_THREADS must be an integer, got {env!r}", "APP_THREADS") from None
    if value < 1:
        raise ConfigError("thread count must be >= 1", "--threads")
    return value


def build_parser():
    p = argparse.ArgumentParser(prog="app", description="Endpoint Strichartz experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="JSON experiment configuration")
        sp.add_argument("--output", help="run directory (overrides output_dir)")
        sp.add_argument("--seed", type=int, help="64-bit run seed (overrides seed)")
        sp.add_argument("--threads", type=int, help="BLAS thread cap (default: APP_THREADS)")
    rp = sub.add_parser("report", help="summarise run.json files")
    rp.add_argument("records", nargs="*", help="run.json paths")
    rp.add_argument("--output", default=".", help="directory for summary.md and summary.csv")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            paths = write_report(report(args.records), args.output)
            print(f"wrote {paths['markdown']} and {paths['csv']}")
            return 0
        overrides = {"experiment": args.command, "seed": args.seed, "output_dir": args.output}
        cfg = load_config(args.config, **overrides) if args.config else parse_config({}, **overrides)
        threads = _threads(args.threads)
        if threads is None:
            record, checks = run(cfg)
        else:
            with threadpool_limits(limits=threads):
                record, checks = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StrichartzError as exc:
        hint = next((h for cls, h in HINTS.items() if isinstance(exc, cls)), None)
        print(f"error: {exc}" + (f" (hint: {hint})" if hint else ""), file=sys.stderr)
        return 3
    for c in checks:
        print(c.line())
    print(f"{'PASSED' if record.passed else 'FAILED'}: {cfg.experiment} -> {cfg.output_dir}")
    return 0 if record.passed else 1


if __name__ == "__main__":
    sys.exit(main())
