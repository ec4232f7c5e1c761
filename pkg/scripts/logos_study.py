"""End-to-end logos study: simulate, analyze and correlate, then print the mean-SSI table."""
import argparse
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import logging

from config import settings
from cli.commands import cmd_analyze, cmd_correlate, cmd_simulate
from cli.models import load_scenario, preset_scenario, with_overrides
from core.exceptions import AppException

logging.basicConfig(
    level=settings.log_level.upper(),
    format=settings.log_format,
)

logger = logging.getLogger(__name__)


def run_study(preset: str, output: Path, n_tau: int, seed: int = None, scenario_file: Path = None) -> None:
    """
    Run the logos study:
    1. Synthesize the ground truth and compressed variants
    2. Build activity maps and compare them to the ground-truth map
    3. Estimate the temporal correlation of every variant
    """
    logger.info("=" * 60)
    logger.info("Starting logos study")
    logger.info("=" * 60)

    scenario = load_scenario(scenario_file) if scenario_file else preset_scenario(preset)
    scenario = with_overrides(scenario, seed=seed)

    logger.info("[Step 1/3] Simulating...")
    simulated = cmd_simulate(scenario, output)

    logger.info("[Step 2/3] Analyzing...")
    analysis = cmd_analyze(simulated["root"])

    logger.info("[Step 3/3] Correlating...")
    cmd_correlate(simulated["root"], n_tau)

    logger.info("=" * 60)
    logger.info("Logos study completed")
    logger.info("=" * 60)

    sizes = simulated["sizes"][["variant", "mean_bytes", "mean_ratio"]]
    table = analysis["mean_ssi"].merge(analysis["maps"][["variant", "region_contrast"]], on="variant") \
        if "region_contrast" in analysis["maps"] else analysis["mean_ssi"]
    print(sizes.to_string(index=False))
    print()
    print(table.to_string(index=False))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="logos")
    parser.add_argument("--scenario", type=Path)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n-tau", type=int, default=40)
    parser.add_argument("-o", "--output", type=Path, default=settings.output_dir / "logos_study")
    args = parser.parse_args()

    try:
        run_study(args.preset, args.output, args.n_tau, args.seed, args.scenario)
    except AppException as e:
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
