"""Command line front end.

Exit codes: 0 success, 2 for config problems (bad JSON, unknown keys,
dangling references), 3 for I/O failures (unreadable config, unwritable
output).  No environment variables are consulted; everything comes from the
config file and flags, and --seed beats the config's seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import ConfigError
from .metrics import write_text
from .runner import run, sweep
from .scenario import load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qoetrust",
        description="Reputation-based network selection scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("config", help="scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="write output here instead of stdout")
    p_run.add_argument(
        "--format",
        choices=("json_lines", "summary_json"),
        default="json_lines",
        help="full per-round stream or summary only",
    )

    p_sweep = sub.add_parser("sweep", help="run one scenario across many seeds")
    p_sweep.add_argument("config", help="scenario JSON file")
    p_sweep.add_argument(
        "--seeds",
        default="0:10",
        help="comma list (0,1,2) or half-open range (0:10)",
    )
    p_sweep.add_argument("--out", default=None, help="write output here instead of stdout")

    p_val = sub.add_parser("validate", help="check a scenario file and echo it back")
    p_val.add_argument("config", help="scenario JSON file")
    p_val.add_argument("--out", default=None, help="write the echo here instead of stdout")
    return parser


def _parse_seeds(text: str) -> list:
    if ":" in text:
        lo_text, hi_text = text.split(":", 1)
        try:
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise ConfigError(f"bad --seeds range {text!r}") from None
        if hi < lo:
            raise ConfigError(f"bad --seeds range {text!r}")
        return list(range(lo, hi))
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad --seeds list {text!r}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_text(out, text)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    series = run(config, seed_override=args.seed)
    if args.format == "summary_json":
        _emit(series.to_summary_json(), args.out)
    else:
        _emit(series.to_json_lines(), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    seeds = _parse_seeds(args.seeds)
    lines = []
    for seed, summary in sweep(config, seeds):
        lines.append(json.dumps({"seed": seed, **summary}, separators=(",", ":")))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    echo = json.dumps(config.to_json_dict(), indent=2) + "\n"
    _emit(echo, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
