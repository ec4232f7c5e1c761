"""Analysis service: activity maps, SSI against ground truth, correlation curves."""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import settings
from core.exceptions import AppException, ConfigurationException, EstimatorException, StorageException
from core.frames import FrameSequence
from estimators.correlation import temporal_corr
from estimators.msf import map_set
from estimators.types import ActivityMap, Estimator
from metrics.ssim import SsimParams, ssi_map
from metrics.statistics import joint_histograms, region_contrast
from storage.exporters import write_csv, write_heatmap, write_line_plot, write_map_csv
from storage.local_storage import FrameStore, save_activity_map, write_json
from .compression_service import GROUND_TRUTH
from .simulation_service import REGIONS_FILE

logger = logging.getLogger(__name__)

ANALYSIS_MANIFEST = "analysis.json"
SSI_DISPLAY_RANGE = (0.0, 1.0)
SSI_COLUMNS = ["set", "variant", "compression", "mean_ssi", "size_ratio", "mean_bytes", "data_range"]


class AnalysisService:
    """Service for analyzing frame trees."""

    def analyze(
        self,
        tree: Path,
        estimator: Optional[Estimator] = None,
        lag_m: Optional[int] = None,
        q: Optional[float] = None,
        display_range: Optional[Tuple[float, float]] = None,
        output_dir: Optional[Path] = None,
    ) -> Dict:
        """
        Activity maps of every variant and their SSI against the ground-truth map.

        Estimator, lag and q default to the values recorded by the scenario
        that produced the tree, then to the configured defaults.

        Args:
            tree: Frame tree root (single or multi-set)
            estimator: Activity estimator
            lag_m: Lag in frames
            q: S2 stabilizer
            display_range: Fixed heatmap range; the joint map range when None
            output_dir: Report directory, ``<tree>/analysis`` by default

        Returns:
            Results dict with the per-set map and SSI tables

        Raises:
            StorageException: If the tree or its ground truth is missing
        """
        tree = Path(tree)
        base = FrameStore(tree)
        out = Path(output_dir) if output_dir is not None else tree / "analysis"
        recorded = self._recorded(base)
        estimator = estimator or Estimator(recorded.get("estimator", Estimator.S1.value))
        lag_m = lag_m or recorded.get("lag_m") or settings.default_lag
        if q is None:
            q = recorded.get("q")
        if estimator is Estimator.S2 and q is None:
            q = settings.s2_stabilizer
        header = {
            "scenario_hash": recorded.get("scenario_hash", "none"),
            "estimator": estimator.value,
            "m": lag_m,
            "q": q if estimator is Estimator.S2 else "n/a",
        }

        try:
            logger.info("=" * 60)
            logger.info(f"Analyzing {tree}: {estimator.value}, m={lag_m}")
            logger.info("=" * 60)

            regions = self._regions(tree)
            stores = base.list_sets()
            labels = base.set_labels()
            sets = []
            map_tables, ssi_tables = [], []
            for i, store in enumerate(stores):
                set_out = out / store.root.name if base.is_multi_set() else out
                logger.info(f"[Step {i + 1}/{len(stores)}] Analyzing {store.root.name}...")
                maps_df, ssi_df, variants = self._analyze_set(
                    store, set_out, i, estimator, lag_m, q, display_range, regions, {**header, "set": labels[i]}
                )
                map_tables.append(maps_df)
                ssi_tables.append(ssi_df)
                sets.append({
                    "name": store.root.name,
                    "label": labels[i],
                    "directory": str(set_out.relative_to(out)) if set_out != out else ".",
                    "variants": variants,
                })

            write_json(out / ANALYSIS_MANIFEST, {**header, "tree": str(tree), "sets": sets})
            maps_all = pd.concat(map_tables, ignore_index=True)
            ssi_all = pd.concat(ssi_tables, ignore_index=True)
            if base.is_multi_set():
                write_csv(maps_all, out / "maps.csv", header)
                write_csv(ssi_all, out / "mean_ssi.csv", header)

            logger.info(f"✓ Analysis written to {out}")
            return {"output_dir": out, "maps": maps_all, "mean_ssi": ssi_all, "sets": sets}

        except AppException:
            raise

        except Exception as e:
            logger.error(f"Analysis failed: {e}")
            raise EstimatorException(str(e))

    def _recorded(self, base: FrameStore) -> Dict:
        """Scenario metadata stored with the tree, if any."""
        try:
            first = base.list_sets()[0]
            if (first.root / "tree.json").is_file():
                return first.read_manifest()
        except StorageException:
            pass
        return {}

    @staticmethod
    def _regions(tree: Path) -> Optional[np.ndarray]:
        path = tree / REGIONS_FILE
        if not path.is_file():
            return None
        try:
            return np.load(path)
        except (OSError, ValueError) as e:
            raise StorageException(f"cannot read region mask: {e}", path)

    @staticmethod
    def _save_ssi(values: np.ndarray, directory: Path, name: str, metadata: Dict) -> None:
        """Raw SSI map as <name>.npy with its provenance in <name>.json."""
        path = directory / f"{name}.npy"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            np.save(path, values)
        except OSError as e:
            raise StorageException(f"cannot write SSI map: {e}", path)
        write_json(directory / f"{name}.json", metadata)

    def load_variants(self, store: FrameStore) -> Dict[str, FrameSequence]:
        """
        Read every variant of a tree, ground truth first.

        Raises:
            StorageException: If the ground truth is missing
            ConfigurationException: If a variant differs from the ground truth in frame count or size
        """
        variants = store.list_variants()
        if GROUND_TRUTH not in variants or not store.has_variant(GROUND_TRUTH):
            raise StorageException("ground-truth variant 'bmp' is missing", store.root)
        ordered = [GROUND_TRUTH] + [v for v in variants if v != GROUND_TRUTH]
        seqs = {v: store.read_sequence(v) for v in ordered}
        reference = seqs[GROUND_TRUTH]
        for name, seq in seqs.items():
            if seq.n_frames != reference.n_frames:
                raise ConfigurationException(
                    f"variant '{name}' has {seq.n_frames} frames, ground truth has {reference.n_frames}"
                )
            if seq.shape != reference.shape:
                raise ConfigurationException(
                    f"variant '{name}' has frame size {seq.shape}, ground truth has {reference.shape}"
                )
        return seqs

    def _analyze_set(
        self,
        store: FrameStore,
        out: Path,
        set_index: int,
        estimator: Estimator,
        lag_m: int,
        q: Optional[float],
        display_range: Optional[Tuple[float, float]],
        regions: Optional[np.ndarray],
        header: Dict,
    ) -> Tuple[pd.DataFrame, pd.DataFrame, List[str]]:
        seqs = self.load_variants(store)
        names = list(seqs)
        maps = map_set(list(seqs.values()), estimator, lag_m, q)
        if display_range is not None:
            maps = [amap.with_display_range(display_range) for amap in maps]
        by_name: Dict[str, ActivityMap] = dict(zip(names, maps))
        ground_truth = by_name[GROUND_TRUTH]
        params = SsimParams()

        map_rows, ssi_rows = [], []
        for name, amap in by_name.items():
            meta = store.read_metadata(name)
            spec = meta.get("compression_spec", name)
            artifact = {**header, "variant": name, "compression_spec": spec}
            save_activity_map(amap, out / "maps", name, artifact)
            write_map_csv(amap.values, out / "maps" / f"{name}.csv", amap.valid_mask, artifact)
            if amap.display_range is not None:
                write_heatmap(amap.values, out / "maps" / f"{name}.png", amap.display_range,
                              amap.valid_mask, artifact)

            row = {
                "set": set_index,
                "variant": name,
                "compression": spec,
                "map_mean": amap.mean(),
                "map_std": float(amap.valid_values().std()),
                "map_min": amap.value_range()[0],
                "map_max": amap.value_range()[1],
                "valid_pixels": int(amap.valid_mask.sum()),
            }
            if regions is not None and regions.shape == amap.shape:
                row["region_contrast"] = region_contrast(amap, regions, ~regions)
            map_rows.append(row)

            if name == GROUND_TRUTH:
                continue
            report = ssi_map(ground_truth, amap, params)
            ssi_artifact = {**artifact, "mean_ssi": f"{report.mean_ssi:.6f}", "ssim_window": params.window}
            self._save_ssi(report.ssi_map, out / "ssi", name, ssi_artifact)
            write_map_csv(report.ssi_map, out / "ssi" / f"{name}.csv", report.valid_mask, ssi_artifact)
            write_heatmap(report.ssi_map, out / "ssi" / f"{name}.png", SSI_DISPLAY_RANGE,
                          report.valid_mask, ssi_artifact)
            size = meta.get("size_report") or {}
            ssi_rows.append({
                "set": set_index,
                "variant": name,
                "compression": spec,
                "mean_ssi": report.mean_ssi,
                "size_ratio": size.get("mean_ratio"),
                "mean_bytes": size.get("mean_bytes"),
                "data_range": report.data_range,
            })
            logger.info(f"  {name}: mean SSI {report.mean_ssi:.3f}")

        maps_df = pd.DataFrame(map_rows)
        ssi_df = pd.DataFrame(ssi_rows, columns=SSI_COLUMNS)
        write_csv(maps_df, out / "maps.csv", header)
        write_csv(ssi_df, out / "mean_ssi.csv", header)
        write_csv(self._histogram_table(by_name), out / "histograms.csv", header)
        return maps_df, ssi_df, names

    @staticmethod
    def _histogram_table(by_name: Dict[str, ActivityMap]) -> pd.DataFrame:
        """Estimate histograms of all variants over shared bin edges, in long form."""
        valid = {name: amap for name, amap in by_name.items() if amap.valid_mask.any()}
        tables = []
        for (name, amap), hist in zip(valid.items(), joint_histograms(list(valid.values()))):
            table = hist.to_frame()
            table.insert(0, "variant", name)
            table["mean"] = hist.mean
            table["std"] = hist.std
            tables.append(table)
        if not tables:
            return pd.DataFrame(columns=["variant", "bin_lo", "bin_hi", "count", "mean", "std"])
        return pd.concat(tables, ignore_index=True)

    def correlate(self, tree: Path, n_tau: int, output_dir: Optional[Path] = None) -> Dict:
        """
        Temporal correlation curve of every variant, aligned by lag.

        Returns:
            Results dict with one DataFrame (columns lag, <variant>...) per set

        Raises:
            EstimatorException: If n_tau is out of range for the sequences
        """
        tree = Path(tree)
        base = FrameStore(tree)
        out = Path(output_dir) if output_dir is not None else tree / "analysis"
        recorded = self._recorded(base)
        try:
            curves = {}
            for store in base.list_sets():
                set_out = out / store.root.name if base.is_multi_set() else out
                seqs = self.load_variants(store)
                table = pd.DataFrame({"lag": np.arange(n_tau + 1)})
                header = {
                    "scenario_hash": recorded.get("scenario_hash", "none"),
                    "estimator": "temporal_corr",
                    "n_tau": n_tau,
                }
                for name, seq in seqs.items():
                    header[f"compression_{name}"] = store.read_metadata(name).get("compression_spec", name)
                    curve = temporal_corr(seq, n_tau)
                    table[name] = curve.rho
                    if name != GROUND_TRUTH:
                        deviation = float(np.max(np.abs(curve.rho - table[GROUND_TRUTH].to_numpy())))
                        header[f"max_deviation_{name}"] = f"{deviation:.6f}"
                write_csv(table, set_out / "correlation.csv", header)
                write_line_plot(table, "lag", set_out / "correlation.png",
                                title=f"Temporal correlation, {store.root.name}", ylabel="rho", metadata=header)
                curves[store.root.name] = table

            logger.info(f"✓ Correlation curves written to {out}")
            return {"output_dir": out, "curves": curves}

        except AppException:
            raise

        except Exception as e:
            logger.error(f"Correlation failed: {e}")
            raise EstimatorException(str(e))
