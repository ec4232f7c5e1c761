"""Time-series service: ROI mean of the activity map across sets."""
import logging
from pathlib import Path
from typing import Dict, Optional

import pandas as pd

from core.exceptions import AppException, ConfigurationException, MetricException
from metrics.statistics import Roi, activity_time_series
from storage.exporters import write_csv, write_line_plot
from storage.local_storage import load_activity_map, read_json
from .analysis_service import ANALYSIS_MANIFEST

logger = logging.getLogger(__name__)

DEFAULT_ROI_SIZE = 100


class TimeSeriesService:
    """Service for activity time series of analyzed set trees."""

    def run(self, analysis_dir: Path, roi: Optional[Roi] = None, output_dir: Optional[Path] = None) -> Dict:
        """
        Average each variant's map over roi in every analyzed set.

        Args:
            analysis_dir: Output directory of an analysis run
            roi: Averaging rectangle; a centred 100x100 square (clipped to the map) when None
            output_dir: Where to write timeseries.csv/png, analysis_dir by default

        Returns:
            Results dict with the series table (columns set, label, <variant>...)

        Raises:
            ConfigurationException: If the sets do not share the same variants
            MetricException: If roi is out of bounds
        """
        analysis_dir = Path(analysis_dir)
        out = Path(output_dir) if output_dir is not None else analysis_dir
        manifest = read_json(analysis_dir / ANALYSIS_MANIFEST)
        sets = manifest["sets"]
        if not sets:
            raise ConfigurationException(f"no analyzed sets in {analysis_dir}")

        variants = sets[0]["variants"]
        for entry in sets[1:]:
            if set(entry["variants"]) != set(variants):
                raise ConfigurationException(
                    f"set '{entry['name']}' has variants {entry['variants']}, expected {variants}; "
                    "time series need every variant at every set index"
                )

        try:
            logger.info(f"Building time series over {len(sets)} set(s) for variants {variants}")
            table = pd.DataFrame({"set": range(len(sets)), "label": [s["label"] for s in sets]})
            for variant in variants:
                maps = [load_activity_map(analysis_dir / s["directory"] / "maps", variant) for s in sets]
                if roi is None:
                    ny, nx = maps[0].shape
                    roi = Roi.centered(maps[0].shape, min(DEFAULT_ROI_SIZE, nx), min(DEFAULT_ROI_SIZE, ny))
                table[variant] = activity_time_series(maps, roi).to_numpy()

            header = {
                "scenario_hash": manifest.get("scenario_hash", "none"),
                "estimator": manifest.get("estimator"),
                "m": manifest.get("m"),
                "roi": str(roi),
            }
            first_maps = analysis_dir / sets[0]["directory"] / "maps"
            for variant in variants:
                sidecar = read_json(first_maps / f"{variant}.json")
                header[f"compression_{variant}"] = sidecar.get("compression_spec", variant)
            write_csv(table, out / "timeseries.csv", header)
            write_line_plot(table.drop(columns=["label"]), "set", out / "timeseries.png",
                            title=f"ROI mean {manifest.get('estimator')} (roi {roi})",
                            ylabel="activity estimate", markers=True, metadata=header)

            logger.info(f"✓ Time series written to {out}")
            return {"output_dir": out, "series": table, "roi": roi}

        except AppException:
            raise

        except Exception as e:
            logger.error(f"Time series failed: {e}")
            raise MetricException(str(e))
