"""
Command-line interface.

Subcommands:
    run       execute a Monte Carlo batch and write the result CSVs
    scenario  print the built-in scene and tracker configuration
    synth     write the raw measurement frames of one run as CSV

Exit codes: 0 on success, 2 on configuration or argument errors, 1 on any
other failure.
"""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from config import (
    ConfigError,
    RunConfig,
    TrackerMode,
    dump_run_config,
    get_settings,
    load_run_config,
)

from .logging_setup import configure_logging
from .outputs import write_frames, write_outputs
from .runner import run_batch, synth_frames

log = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_CONFIG_ERROR = 2

SCENARIO_FILE = "paper.cfg"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Config file (section.field = value)")
    common.add_argument(
        "--mode",
        choices=[m.value for m in TrackerMode],
        help="Tracker variant (overrides run.mode)",
    )
    common.add_argument("--runs", type=int, help="Number of Monte Carlo runs")
    common.add_argument("--seed", type=int, help="Base seed, 0 .. 2**64-1")
    common.add_argument("--out", type=Path, help="Output directory")
    common.add_argument("--steps", type=int, help="Override scenario.n_steps")

    parser = argparse.ArgumentParser(
        prog="passive-track",
        description="Passive target tracking with an unknown transmitter",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Run a Monte Carlo batch")
    sub.add_parser("scenario", parents=[common], help="Print the default configuration")
    sub.add_parser("synth", parents=[common], help="Write raw measurement frames")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) with command-line overrides applied.

    Raises:
        ConfigError: If the file is invalid or an override fails validation.
    """
    cfg = load_run_config(args.config) if args.config else RunConfig()
    run_updates: dict[str, Any] = {}
    if args.mode is not None:
        run_updates["mode"] = TrackerMode(args.mode)
    if args.runs is not None:
        run_updates["runs"] = args.runs
    if args.seed is not None:
        run_updates["base_seed"] = args.seed
    if args.out is not None:
        run_updates["out_dir"] = args.out
    if not run_updates and args.steps is None:
        return cfg
    try:
        scenario = cfg.scenario
        if args.steps is not None:
            scenario = type(scenario).model_validate(
                {**scenario.model_dump(), "n_steps": args.steps}
            )
        return RunConfig.model_validate(
            {**cfg.model_dump(), "scenario": scenario, "tracker": cfg.tracker, **run_updates}
        )
    except ValidationError as e:
        raise ConfigError(f"invalid override: {e}") from e


def _cmd_run(cfg: RunConfig, workers: int, level: str, fmt: str) -> None:
    results = run_batch(cfg, workers=workers, log_level=level, log_format=fmt)
    write_outputs(cfg, results, cfg.out_dir)


def _cmd_scenario(cfg: RunConfig, out: Path | None) -> None:
    text = dump_run_config(cfg)
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / SCENARIO_FILE).write_text(text, encoding="utf-8", newline="\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG_ERROR

    try:
        settings = get_settings()
    except ValidationError as e:
        print(f"invalid environment settings: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    configure_logging(settings.log_level, settings.log_format)

    try:
        cfg = resolve_config(args)
        if args.command == "run":
            _cmd_run(cfg, settings.workers, settings.log_level, settings.log_format)
        elif args.command == "scenario":
            _cmd_scenario(cfg, args.out)
        else:
            write_frames(synth_frames(cfg), cfg.out_dir)
    except ConfigError as e:
        log.error("config_error", error=str(e))
        return EXIT_CONFIG_ERROR
    except Exception:
        log.exception("run_failed", command=args.command)
        return EXIT_RUNTIME_ERROR
    return EXIT_OK
