"""Command-line entry point.

Exit codes: 0 on success, 1 for bad flags or an invalid config, 2 for
file-system errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .config import parse_config
from .errors import ConfigIOError, IcnrError, InvalidParameterError, ReportIOError
from .report import RadarChartSpec, emit_radar_svg, emit_report
from .scenario import ALL_LEVELS, IntegrationLevel, ScenarioConfig
from .simulator import run_experiment

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2

OUTPUT_FORMATS = ("csv", "json", "svg", "all")
OUTPUT_NAMES = {"csv": "report.csv", "json": "report.json", "svg": "radar.svg"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; 2 is reserved for I/O errors here
    def error(self, message):
        raise _UsageError(message)


@dataclass(frozen=True)
class RunSpec:
    config_path: Path | None = None
    levels: tuple = ALL_LEVELS
    trials: int = 10_000
    seed: int = 42
    output_format: str = "all"
    out_dir: Path = Path(".")
    workers: int = 1


# argparse prefixes these messages with the offending flag
def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"must lie in [0, 2**64), got {value}")
    return value


def _levels(text):
    names = [t for t in text.split(",") if t.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty level list")
    try:
        return tuple(dict.fromkeys(IntegrationLevel.parse(t) for t in names))
    except InvalidParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="icnrsim",
                description="Monte Carlo comparison of separate and integrated LEO "
                            "communication, navigation and sensing constellations.")
    p.add_argument("--config", type=Path, default=None,
                   help="scenario file (key = value); defaults apply when omitted")
    p.add_argument("--levels", type=_levels, default=ALL_LEVELS,
                   help="comma-separated levels: traditional,function,signal (default: all)")
    p.add_argument("--trials", type=_positive_int, default=10_000,
                   help="Monte Carlo trials per level (default: 10000)")
    p.add_argument("--seed", type=_seed, default=42, help="master seed (default: 42)")
    p.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default="all",
                   help="output to write (default: all)")
    p.add_argument("--out", dest="out_dir", type=Path, default=Path("."),
                   help="output directory (default: current directory)")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes; results do not depend on it (default: 1)")
    return p


def parse_args(argv=None) -> RunSpec:
    ns = build_parser().parse_args(argv)
    return RunSpec(config_path=ns.config, levels=ns.levels, trials=ns.trials, seed=ns.seed,
                   output_format=ns.output_format, out_dir=ns.out_dir, workers=ns.workers)


def run(spec: RunSpec) -> list[Path]:
    """Execute a run and write its outputs; returns the written paths."""
    config = parse_config(spec.config_path) if spec.config_path else ScenarioConfig()
    try:
        spec.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportIOError(f"cannot create {spec.out_dir}: {exc.strerror or exc}") from exc
    report = run_experiment(spec.levels, config, spec.trials, spec.seed, spec.workers)
    formats = ("csv", "json", "svg") if spec.output_format == "all" else (spec.output_format,)
    written = []
    for fmt in formats:
        path = spec.out_dir / OUTPUT_NAMES[fmt]
        if fmt == "svg":
            emit_radar_svg(report, RadarChartSpec(), path)
        else:
            emit_report(report, fmt, path)
        written.append(path)
    return written


def main(argv=None) -> int:
    try:
        spec = parse_args(argv)
        written = run(spec)
    except _UsageError as exc:
        print(f"icnrsim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigIOError, ReportIOError) as exc:
        print(f"icnrsim: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IcnrError as exc:
        print(f"icnrsim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
