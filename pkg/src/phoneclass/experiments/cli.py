"""Command line front end.

One subcommand per pipeline stage, each running the pipeline through that
stage (earlier stages are resumed or executed as needed), plus grid for
running several configs and comparing them.

Exit codes: 0 ok, 2 configuration problem, 3 data problem, 4 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from phoneclass.errors import ConfigError, DataError
from phoneclass.experiments.config import ExperimentConfig, config_from_dict, load_config, override_seed
from phoneclass.experiments.report import load_report, render_table, tabulate_reports, write_table_csv
from phoneclass.experiments.runner import STAGES, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_OTHER = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phoneclass", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in (*STAGES, "grid"):
        p = sub.add_parser(command, help=f"run the pipeline through the {command} stage"
                           if command != "grid" else "run several configs and tabulate them")
        p.add_argument("--config", required=True, metavar="PATH", help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, metavar="N", help="override every seed in the config")
        p.add_argument("--force", action="store_true", help="wipe an existing run directory and start over")
        p.add_argument("--out", default=None, metavar="DIR", help="parent directory for run output")
    return parser


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.seed is not None:
        config = override_seed(config, args.seed)
    return config


def _run_stage(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    run_dir = run_experiment(config, out_dir=args.out, force=args.force, through_stage=args.command)
    print(f"{args.command}: done -> {run_dir}")
    if args.command == "report":
        print((run_dir / "report.txt").read_text(encoding="utf-8"), end="")
    return EXIT_OK


def _merge(base: dict, variant: dict) -> dict:
    merged = dict(base)
    for key, value in variant.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def _run_grid(args: argparse.Namespace) -> int:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON at line {exc.lineno}") from exc
    if not isinstance(data, dict) or "variants" not in data:
        raise ConfigError("grid config must be an object with 'base' and 'variants'")
    base = data.get("base", {})
    variants = data["variants"]
    if not isinstance(variants, list) or len(variants) < 2:
        raise ConfigError("grid needs at least two variants")

    reports = []
    out_root = None
    for variant in variants:
        if "run_id" not in variant:
            raise ConfigError("every grid variant needs its own run_id")
        config = config_from_dict(_merge(base, variant), base_dir=path.resolve().parent)
        config = _apply_overrides(config, args)
        run_dir = run_experiment(config, out_dir=args.out, force=args.force, through_stage="report")
        out_root = run_dir.parent
        reports.append(load_report(run_dir / "report.json"))
        print(f"grid: finished {config.run_id}")

    rows = tabulate_reports(reports)
    write_table_csv(out_root / "grid_summary.csv", rows)
    table = render_table(rows)
    (out_root / "grid_summary.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "grid":
            return _run_grid(args)
        return _run_stage(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        print(f"error: {exc!r}", file=sys.stderr)
        return EXIT_OTHER


def entry() -> None:
    sys.exit(main())
