"""Compression service: ground truth plus compressed variants of one sequence."""
import logging
from typing import Dict, List, Optional, Sequence

import pandas as pd

from compression.harness import SizeReport, encode_sequence
from compression.spec import CompressionSpec
from core.exceptions import AppException, CodecException
from core.frames import FrameSequence, Provenance
from storage.local_storage import FrameStore

logger = logging.getLogger(__name__)

GROUND_TRUTH = "bmp"


class CompressionService:
    """Writes a sequence and its compressed variants into a frame tree."""

    def store_variants(
        self,
        store: FrameStore,
        seq: FrameSequence,
        grid: Sequence[CompressionSpec],
        metadata: Optional[Dict] = None,
    ) -> Dict[str, SizeReport]:
        """
        Write the BMP ground truth and one variant per compression setting.

        Variant files hold the encoded payloads; the sidecar records the
        compression setting and its size report. The tree manifest lists the
        variants in grid order after the ground truth.

        Args:
            store: Target tree
            seq: Gray or RGB sequence to store
            grid: Compression settings, in configured order
            metadata: Entries added to every sidecar and to the manifest

        Returns:
            Size report per variant label

        Raises:
            CodecException: If encoding fails
        """
        metadata = dict(metadata or {})
        reports: Dict[str, SizeReport] = {}
        try:
            for spec in [CompressionSpec.bmp(), *grid]:
                payloads, report = encode_sequence(seq, spec)
                variant_seq = seq
                if not spec.is_lossless:
                    variant_seq = seq.with_frames(seq.frames, provenance=Provenance.decompressed(spec.label))
                store.write_sequence(
                    variant_seq,
                    spec.label,
                    payloads=payloads,
                    extension=spec.extension,
                    metadata={**metadata, "compression_spec": str(spec), "size_report": report.summary()},
                )
                reports[spec.label] = report
                logger.info(f"✓ Variant {spec.label}: size ratio {report.mean_ratio:.2f}")

            store.write_manifest(list(reports), metadata)
            return reports

        except AppException:
            raise

        except Exception as e:
            logger.error(f"Failed to store variants: {e}")
            raise CodecException(str(e))

    @staticmethod
    def size_table(reports: Dict[str, SizeReport], set_index: int = 0) -> pd.DataFrame:
        rows: List[Dict] = []
        for label, report in reports.items():
            summary = report.summary()
            rows.append({
                "set": set_index,
                "variant": label,
                "compression": summary["spec"],
                "mean_bytes": summary["mean_bytes"],
                "reference_bytes": summary["reference_bytes"],
                "mean_ratio": summary["mean_ratio"],
                "min_ratio": summary["min_ratio"],
                "max_ratio": summary["max_ratio"],
                "resolved_quality": summary["resolved_quality"],
            })
        return pd.DataFrame(rows)
