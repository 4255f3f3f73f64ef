"""Command-line front end.

::

    phasetomo run <config.ini>
    phasetomo sweep <config.ini> --axis snr --values 3.5,5,15,1e6
    phasetomo validate <config.ini>

Exit codes: 0 success, 1 invalid config (diagnostic names the section and
option), 2 when at least one experiment cell failed numerically (the report
still covers the remaining cells).
"""

from __future__ import annotations

import argparse
import sys

from .experiments import SWEEP_AXES, ConfigError, load_config, run_experiment, sweep

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasetomo",
        description="Alignment-and-reconstruction experiments on projection data.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run every method cell of one config")
    p_run.add_argument("config", help="experiment INI file")

    p_sweep = sub.add_parser("sweep", help="run a config across one parameter axis")
    p_sweep.add_argument("config", help="experiment INI file")
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values, e.g. 3.5,5,15")

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config", help="experiment INI file")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.verb == "validate":
            cfg = load_config(args.config)
            print(f"ok: {len(cfg.methods)} method(s), "
                  f"{cfg.angles.size} angles, output -> {cfg.output_dir}")
            return 0
        if args.verb == "run":
            report, code = run_experiment(args.config)
        else:
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                print("error: --values must be a comma-separated list of numbers",
                      file=sys.stderr)
                return 1
            if not values:
                print("error: --values is empty", file=sys.stderr)
                return 1
            report, code = sweep(args.config, args.axis, values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    for row in report.rows:
        err = row.get("error", "")
        err_txt = f"{err:.6g}" if isinstance(err, float) else str(err)
        print(f"{row['method']:>8}  error={err_txt}")
    return code


if __name__ == "__main__":
    sys.exit(main())
