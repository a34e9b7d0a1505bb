"""Command-line front end for running scenarios and presets.

Exit codes: 0 on success, 2 on configuration errors, 3 when any grid
point fails numerically.
"""

from __future__ import annotations

import argparse
import sys

from .dynamics import IntegrationError
from .scenarios import (
    ConfigError,
    ScenarioConfig,
    emit,
    preset,
    preset_description,
    preset_names,
    run_scenario,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydgate",
        description="Simulate the one-step multi-controlled-NOT gate on driven "
        "Rydberg atoms and evaluate its average fidelity over parameter sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario from a JSON config file")
    run_p.add_argument("config", help="path to the scenario JSON file")
    _add_common(run_p)

    preset_p = sub.add_parser("preset", help="run a built-in scenario")
    preset_p.add_argument("name", help="preset name (see list-presets)")
    _add_common(preset_p)

    sub.add_parser("list-presets", help="list the built-in scenarios")
    return parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--emit", metavar="PATH", default=None, help="write results to a file")
    p.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output file format"
    )
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        metavar="N",
        help="cap worker threads (falls back to RYDGATE_THREADS, then CPU count)",
    )


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "list-presets":
        width = max(len(n) for n in preset_names())
        for name in preset_names():
            print(f"{name.ljust(width)}  {preset_description(name)}")
        return EXIT_OK

    try:
        if args.command == "run":
            config = ScenarioConfig.from_file(args.config)
        else:
            config = preset(args.name)
        result = run_scenario(config, threads=args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    print(result.to_table())
    if args.emit:
        try:
            emit(result, args.format, args.emit)
        except OSError as exc:
            print(f"error: cannot write {args.emit}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"wrote {args.emit}")
    if any(row.get("error") for row in result.rows):
        print("some grid points failed numerically", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
