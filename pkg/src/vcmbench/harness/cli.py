"""Command-line entry point.

``vcmbench sweep|score|bdrate|plot|report --config <path>``; ``report``
is bdrate followed by plot.  Exit codes: 0 success, 2 config error,
3 sweep aborted over the failure budget, 4 I/O error, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys

from vcmbench import __version__
from vcmbench.errors import ConfigError, SweepAbortedError, VcmbenchError
from vcmbench.harness.bdreport import cmd_bdrate
from vcmbench.harness.config import ExperimentConfig, load_config
from vcmbench.harness.plots import cmd_plot
from vcmbench.harness.score import cmd_score
from vcmbench.harness.sweep import cmd_sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_IO = 4

log = logging.getLogger("vcmbench")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcmbench",
        description="Codec rate sweeps, quality metrics, and delta-rate reports.",
    )
    parser.add_argument("--version", action="version", version=f"vcmbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "encode/decode the (codec, q, image) grid and record metrics"),
        ("score", "compute wAP per (codec, q) from prediction files"),
        ("bdrate", "assemble curves and write delta-rate tables"),
        ("plot", "write one rate-quality SVG per metric"),
        ("report", "bdrate followed by plot"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        if name in ("bdrate", "report"):
            cmd.add_argument(
                "--both-interp",
                action="store_true",
                help="write one table per interpolation mode",
            )
    return parser


def _setup_logging(config: ExperimentConfig) -> None:
    root = logging.getLogger("vcmbench")
    root.setLevel(logging.INFO)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(config.output_dir / "run.log", encoding="utf-8")
    file_handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    )
    root.addHandler(file_handler)
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.WARNING)
    console.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root.addHandler(console)


def _dispatch(command: str, config: ExperimentConfig, both_interp: bool) -> None:
    if command == "sweep":
        cmd_sweep(config)
    elif command == "score":
        cmd_score(config)
    elif command == "bdrate":
        cmd_bdrate(config, both_interp=both_interp)
    elif command == "plot":
        cmd_plot(config)
    elif command == "report":
        cmd_bdrate(config, both_interp=both_interp)
        cmd_plot(config)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _setup_logging(config)
        _dispatch(args.command, config, getattr(args, "both_interp", False))
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except SweepAbortedError as exc:
        log.error("sweep aborted: %s", exc)
        return EXIT_ABORTED
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return EXIT_IO
    except VcmbenchError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
