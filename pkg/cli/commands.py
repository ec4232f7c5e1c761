"""Command-line subcommands: simulate, analyze, correlate, ingest, timeseries."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from compression.spec import CompressionSpec
from core.exceptions import AppException, ConfigurationException
from estimators.types import Estimator
from metrics.statistics import Roi
from services import AnalysisService, IngestService, SimulationService, TimeSeriesService
from .models import (
    IngestConfig,
    ScenarioConfig,
    load_ingest_config,
    load_scenario,
    preset_scenario,
    with_overrides,
)

logger = logging.getLogger(__name__)


def parse_grid(values: Optional[Sequence[str]]) -> Optional[List[CompressionSpec]]:
    if values is None:
        return None
    try:
        return [CompressionSpec.parse(v) for v in values]
    except ValidationError as e:
        raise ConfigurationException(f"bad compression setting in {list(values)}: {e.errors()[0]['msg']}")


def cmd_simulate(scenario: ScenarioConfig, output_dir: Optional[Path] = None) -> dict:
    """Synthesize a scenario and write its ground-truth and compressed trees."""
    return SimulationService().run(scenario, output_dir)


def cmd_analyze(
    tree: Path,
    estimator: Optional[Estimator] = None,
    lag_m: Optional[int] = None,
    q: Optional[float] = None,
    display_range=None,
    output_dir: Optional[Path] = None,
) -> dict:
    """Activity maps per variant plus SSI maps and mean SSI against the ground truth."""
    return AnalysisService().analyze(tree, estimator, lag_m, q, display_range, output_dir)


def cmd_correlate(tree: Path, n_tau: int, output_dir: Optional[Path] = None) -> dict:
    return AnalysisService().correlate(tree, n_tau, output_dir)


def cmd_ingest(config: IngestConfig, output_dir: Optional[Path] = None) -> dict:
    return IngestService().ingest(config, output_dir)


def cmd_timeseries(analysis_dir: Path, roi: Optional[Roi] = None, output_dir: Optional[Path] = None) -> dict:
    return TimeSeriesService().run(analysis_dir, roi, output_dir)


def _run_simulate(args) -> None:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = preset_scenario(args.preset)
    grid = parse_grid(args.grid)
    scenario = with_overrides(
        scenario,
        seed=args.seed,
        nx=args.nx,
        ny=args.ny,
        n_frames=args.frames,
        lag_m=args.lag,
        compression_grid=[spec.model_dump() for spec in grid] if grid is not None else None,
    )
    result = cmd_simulate(scenario, args.output)
    print(f"{result['root']}: {result['sets']} set(s), variants {', '.join(result['variants'])}")


def _run_analyze(args) -> None:
    estimator = Estimator.parse(args.estimator) if args.estimator else None
    result = cmd_analyze(args.tree, estimator, args.lag, args.q,
                         tuple(args.display_range) if args.display_range else None, args.output)
    table = result["mean_ssi"]
    if table.empty:
        print("ground truth only; no SSI rows")
    else:
        print(table.to_string(index=False))


def _run_correlate(args) -> None:
    result = cmd_correlate(args.tree, args.n_tau, args.output)
    for name, table in result["curves"].items():
        print(f"{name}:")
        print(table.head(min(len(table), 11)).to_string(index=False))


def _run_ingest(args) -> None:
    if args.config:
        config = load_ingest_config(args.config)
    else:
        if not args.input_glob:
            raise ConfigurationException("ingest needs --config or --input-glob")
        grid = parse_grid(args.grid) or []
        try:
            config = IngestConfig(
                input_glob=args.input_glob,
                channel=args.channel or "red",
                frames_per_set=args.frames_per_set,
                set_stride=args.set_stride,
                compression_grid=grid,
            )
        except ValidationError as e:
            raise ConfigurationException(str(e.errors()[0]["msg"]))
    result = cmd_ingest(config, args.output)
    print(f"{result['root']}: {len(result['sequences'])} set(s)")


def _run_timeseries(args) -> None:
    roi = Roi.parse(args.roi) if args.roi else None
    result = cmd_timeseries(args.analysis_dir, roi, args.output)
    print(result["series"].to_string(index=False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsm",
        description="Dynamic speckle activity maps under lossy compression",
    )
    parser.add_argument("--log-level", default=None, help="Logging level (default from DSM_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Synthesize a scenario into a frame tree")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", type=Path, help="Scenario JSON file")
    source.add_argument("--preset", help="Shipped scenario name (logos, gaussian_logos, constant, two_disks, drying)")
    p.add_argument("--seed", type=int)
    p.add_argument("--nx", type=int, help="Frame width in pixels")
    p.add_argument("--ny", type=int, help="Frame height in pixels")
    p.add_argument("-N", "--frames", type=int, help="Frames per sequence")
    p.add_argument("-m", "--lag", type=int, help="Lag recorded for later analysis")
    p.add_argument("--grid", nargs="+", metavar="SPEC", help="Compression grid, e.g. jpg:q=10 jp2:ratio=6")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(handler=_run_simulate)

    p = sub.add_parser("analyze", help="Activity maps and SSI against the BMP ground truth")
    p.add_argument("tree", type=Path)
    p.add_argument("--estimator", help="S1, S2 or S1_NORM")
    p.add_argument("-m", "--lag", type=int)
    p.add_argument("-q", type=float, help="S2 stabilizer")
    p.add_argument("--display-range", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(handler=_run_analyze)

    p = sub.add_parser("correlate", help="Temporal correlation curve per variant")
    p.add_argument("tree", type=Path)
    p.add_argument("--n-tau", type=int, default=40)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(handler=_run_correlate)

    p = sub.add_parser("ingest", help="Read recorded frames into a frame tree")
    p.add_argument("--config", type=Path, help="Ingest JSON file")
    p.add_argument("--input-glob")
    p.add_argument("--channel", choices=["red", "green", "blue", "luminance"])
    p.add_argument("--frames-per-set", type=int)
    p.add_argument("--set-stride", type=int)
    p.add_argument("--grid", nargs="+", metavar="SPEC")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(handler=_run_ingest)

    p = sub.add_parser("timeseries", help="ROI mean of analyzed maps across sets")
    p.add_argument("analysis_dir", type=Path)
    p.add_argument("--roi", help="x0,y0,width,height")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(handler=_run_timeseries)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and run one subcommand.

    Returns:
        Exit code: 0 on success, 1 on a reported error (argparse exits with 2
        on usage errors)
    """
    args = build_parser().parse_args(argv)
    if args.log_level:
        logging.getLogger().setLevel(args.log_level.upper())
    try:
        args.handler(args)
        return 0
    except AppException as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        return 1
    except ValidationError as e:
        print(f"error [CONFIG_ERROR]: {e.errors()[0]['msg']}", file=sys.stderr)
        return 1
