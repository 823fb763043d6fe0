"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
4 self-test failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, DomainError
from .experiments import load_spec, run, write_result

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_SELFTEST = 4

COMMANDS = {
    "fig3": ("ratio_sweep", "throughput versus P_S/P_R on each scheme's tight budget line"),
    "fig4": ("snr_sweep", "maximum throughput versus total SNR"),
    "fig5": ("grouping_sweep", "ADB maximum throughput versus SNR for each group size"),
    "fig6": ("relay_count_sweep", "maximum throughput versus number of relays"),
    "point": ("single_point", "one operating point (fixed powers, or optimised split)"),
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with experiment settings")
    p.add_argument("--out", help="output CSV path (stdout if omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--slots", type=int, help="simulated slots per point")
    p.add_argument("--workers", type=int)
    p.add_argument("--snr-db", type=float, dest="snr_db")
    p.add_argument("--relays", type=int, help="number of relays L")
    p.add_argument("--group-size", type=int, dest="group_size", help="ADB group-1 size m")
    p.add_argument("--schemes", help="comma list of ADB,SFD_MMRS,CRS,DF")
    p.add_argument("--analytic-only", action="store_true", default=None, dest="analytic_only")
    p.add_argument("--json", action="store_true", default=None, help="emit JSON lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adbsim", description="Buffer-aided multi-relay throughput experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        _common(p)
        if name == "point":
            p.add_argument("--p-s", type=float, dest="p_s")
            p.add_argument("--p-r", type=float, dest="p_r")
    sub.add_parser("selftest", help="run the fast oracle checks")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest

        return 0 if run_selftest(sys.stdout) else EXIT_SELFTEST

    kind = COMMANDS[args.command][0]
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        spec = load_spec(kind, args.config, overrides)
        result = run(spec)
        write_result(result, spec, sys.stdout)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
