"""
Bergman Toolkit - Command Line
verify | commutator | cover | constants run an experiment; report re-summarizes a reports file
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

import structlog
from pydantic import ValidationError

from bergman_toolkit.config import configure_logging
from bergman_toolkit.experiment_controller import ExperimentConfig, run
from bergman_toolkit.reports import read_jsonl, write_summary

logger = structlog.get_logger(__name__)

EXPERIMENTS = ("verify", "commutator", "cover", "constants")

# flag name -> ExperimentConfig field
OVERRIDES = {
    "n": "n",
    "seed": "seed",
    "degree": "degree",
    "out": "output_dir",
    "workers": "workers",
    "poly": "polynomials",
    "random": "random_count",
    "claims": "claims",
    "B": "B_list",
    "trials": "trials",
    "samples": "samples",
    "pairs": "pairs",
    "c": "c",
    "r": "r",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergman-toolkit", description=__doc__.strip().splitlines()[-1])
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=f"run a {name} experiment")
        cmd.add_argument("--config", type=Path, help="ExperimentConfig JSON file")
        cmd.add_argument("--n", type=int)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--degree", type=int, help="polynomial degree m")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--workers", type=int)
        cmd.add_argument("--poly", action="append", help="polynomial literal, e.g. 'z1*z2' (repeatable)")
        cmd.add_argument("--random", type=int, help="number of random polynomials")
        cmd.add_argument("--trials", type=int)
        if name == "verify":
            cmd.add_argument("--claims", nargs="+")
        if name == "commutator":
            cmd.add_argument("--B", type=int, nargs="+", help="truncation degrees")
        if name == "cover":
            cmd.add_argument("--samples", type=int)
            cmd.add_argument("--pairs", type=int)
            cmd.add_argument("--c", type=float)
            cmd.add_argument("--r", type=float)

    report = sub.add_parser("report", help="summarize an existing reports.jsonl")
    report.add_argument("path", type=Path)
    report.add_argument("--out", type=Path, help="summary CSV (default: next to the reports)")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """JSON file (if any) with command-line flags layered on top"""
    data: Dict = {}
    if args.config is not None:
        data = ExperimentConfig.from_file(args.config).model_dump()
    data["kind"] = args.command
    for flag, field_name in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[field_name] = value
    return ExperimentConfig(**data)


def _report(path: Path, out: Optional[Path]) -> int:
    records = read_jsonl(path)
    summary = write_summary(records, out or path.with_name("summary.csv"))
    print(summary.to_string(index=False))
    return 0 if all(r.get("passed") for r in records) else 1


def _field_of(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "config"
    return f"{location}: {first['msg']}"


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    if args.command == "report":
        if not args.path.exists():
            logger.error("❌ Reports file not found", path=str(args.path))
            return 2
        return _report(args.path, args.out)

    try:
        experiment = load_config(args)
    except ValidationError as e:
        print(f"invalid config: {_field_of(e)}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2
    return run(experiment)


if __name__ == "__main__":
    sys.exit(main())
