"""Command line entry point.

Subcommands: run <config.json>, list, validate <config.json>.  Exit codes:
0 on success, 2 on any validation problem (bad config shape, unknown
scenario, malformed JSON, unreadable file), 3 when a run fails numerically.

The HYBRIDLAB_THREADS environment variable caps BLAS/OpenMP parallelism.
It is applied before numpy is imported, which is why scenario modules are
imported lazily inside the handlers.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_THREAD_ENV_TARGETS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _apply_thread_cap() -> None:
    raw = os.environ.get("HYBRIDLAB_THREADS")
    if raw is None:
        return
    try:
        threads = int(raw)
    except ValueError:
        threads = 0
    if threads < 1:
        print(f"validation error: HYBRIDLAB_THREADS must be a positive"
              f" integer, got {raw!r}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    for name in _THREAD_ENV_TARGETS:
        os.environ.setdefault(name, str(threads))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridlab",
        description="Run classical-quantum hybrid dynamics scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one scenario from a JSON config")
    run.add_argument("config", help="path to the scenario config file")
    run.add_argument("--no-plots", action="store_true",
                     help="skip figure rendering, keep JSON and CSV output")

    sub.add_parser("list", help="print the scenario catalog")

    validate = sub.add_parser(
        "validate", help="check a config file without running it")
    validate.add_argument("config", help="path to the scenario config file")

    return parser


def _cmd_list() -> int:
    from hybridlab.cli.scenarios import list_scenarios

    for scenario in list_scenarios():
        print(f"{scenario.name:24s} [{scenario.module}] {scenario.summary}")
    return EXIT_OK


def _cmd_validate(config_path: str) -> int:
    from hybridlab.cli.scenarios import load_config, validate_config

    config = load_config(config_path)
    validate_config(config)
    print(f"ok: {config.name} ({config_path})")
    return EXIT_OK


def _cmd_run(config_path: str, render_plots: bool) -> int:
    from hybridlab.cli.scenarios import load_config, run_scenario

    config = load_config(config_path)
    artifacts = run_scenario(config, render_plots=render_plots)
    for kind in ("report", "table", "figure"):
        if artifacts[kind] is not None:
            print(f"{kind}: {artifacts[kind]}")
    return EXIT_OK


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = _build_parser()
    args = parser.parse_args(argv)

    from hybridlab.errors import NumericalError, ValidationError

    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "validate":
            return _cmd_validate(args.config)
        return _cmd_run(args.config, render_plots=not args.no_plots)
    except json.JSONDecodeError as exc:
        print(f"validation error: malformed JSON in config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"validation error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
