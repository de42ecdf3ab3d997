"""Command-line entry point.

Subcommands: simulate | sweep-gxi | sweep-gq | pmin | psd | validate.
Exit codes: 0 success, 1 config error, 2 runtime divergence, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from .errors import ConfigError, DivergenceError, ParameterError

_COMMANDS = {
    "simulate": ("single", experiments.run_single,
                 "run one ensemble at the configured parameter point"),
    "sweep-gxi": ("gamma_xi_sweep", experiments.run_gamma_xi_sweep,
                  "violet/O-U mixture sweep over the O-U width gamma_xi"),
    "sweep-gq": ("gamma_q_sweep", experiments.run_gamma_q_sweep,
                 "telegraph/O-U cases over the quantum-noise width gamma_Q"),
    "pmin": ("pmin_scan", experiments.run_mixing_scan,
             "scan the mixing ratio for the concurrence minimum"),
    "psd": ("psd_report", experiments.run_psd_report,
            "spectral densities, LF/HF boundary, and protection ranking"),
    "validate": ("validate", experiments.run_validation,
                 "run the built-in verification battery"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entshield",
        description="Monte Carlo simulator for noise-assisted entanglement "
                    "protection in a two-atom leaky-cavity system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, (_, _, help_text) in _COMMANDS.items():
        p = sub.add_parser(command, help=help_text)
        p.add_argument("--config", default=None, metavar="PATH",
                       help="INI config file overriding the experiment defaults")
        p.add_argument("--seed", default=None, type=int, metavar="U64",
                       help="master seed override")
        p.add_argument("--workers", default=None, type=int, metavar="N",
                       help="worker processes (default: available parallelism)")
        p.add_argument("--out", default="out", metavar="DIR",
                       help="output directory (default: ./out)")
        p.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering, emit data files only")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind, runner, _ = _COMMANDS[args.command]
    try:
        cfg = experiments.prepare_config(kind, args.config, args.seed)
        summary = runner(cfg, args.out, workers=args.workers,
                         render=not args.no_figures)
    except (ConfigError, ParameterError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except DivergenceError as err:
        print(f"runtime divergence: {err}", file=sys.stderr)
        return 2

    if args.command == "validate":
        for name, check in summary["checks"].items():
            state = "PASS" if check["passed"] else "FAIL"
            print(f"{state}  {name}: {check['detail']}")
        if not summary["passed"]:
            print("validation failed", file=sys.stderr)
            return 3
        print("validation passed")
        return 0

    print(json.dumps(
        {k: summary[k] for k in ("experiment", "config_digest", "seed")}
        | {"out": args.out}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
