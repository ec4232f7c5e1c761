"""Ingest service: experimental frame files into grouped gray sequences."""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from PIL import Image

from cli.models import IngestConfig
from config import settings
from core.exceptions import AppException, IngestException
from core.frames import Channels, FrameSequence, Provenance, ProvenanceKind
from storage.exporters import write_csv
from storage.local_storage import FrameStore
from .compression_service import CompressionService

logger = logging.getLogger(__name__)

_CHANNEL_INDEX = {"red": 0, "green": 1, "blue": 2}


def read_frame(path: Path, channel: str) -> np.ndarray:
    """
    One 8-bit intensity frame from an image file.

    Gray images pass through; color images yield the selected channel, or
    ITU-R 601 luminance for ``luminance``.

    Raises:
        IngestException: If the file is unreadable or not 8-bit
    """
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ("L", "1"):
                return np.asarray(img.convert("L"), dtype=np.uint8)
            if img.mode not in ("RGB", "RGBA", "P", "CMYK", "YCbCr"):
                raise IngestException(f"unsupported image mode {img.mode}", path)
            rgb = img.convert("RGB")
            if channel == "luminance":
                return np.asarray(rgb.convert("L"), dtype=np.uint8)
            return np.ascontiguousarray(np.asarray(rgb, dtype=np.uint8)[..., _CHANNEL_INDEX[channel]])
    except IngestException:
        raise
    except (OSError, ValueError, SyntaxError) as e:
        raise IngestException(f"cannot read image: {e}", path)


def group_frames(n_frames: int, frames_per_set: Optional[int], set_stride: Optional[int]) -> List[range]:
    """Frame index ranges of the sets; only complete sets are kept."""
    per_set = frames_per_set or n_frames
    stride = set_stride or per_set
    return [range(start, start + per_set) for start in range(0, n_frames - per_set + 1, stride)]


class IngestService:
    """Service for turning recorded frames into stored sequences."""

    def __init__(self):
        """Initialize ingest service."""
        self._compression = CompressionService()

    def load_sets(self, config: IngestConfig) -> List[FrameSequence]:
        """
        Read, convert and group the configured frame files.

        Raises:
            IngestException: On missing files, unreadable files or inconsistent dims
        """
        files = config.files()
        if len(files) < 2:
            raise IngestException(f"need at least 2 frames, found {len(files)} matching '{config.input_glob}'")

        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            frames = list(pool.map(lambda p: read_frame(p, config.channel), files))

        reference = frames[0].shape
        for path, frame in zip(files, frames):
            if frame.shape != reference:
                raise IngestException(f"frame size {frame.shape} differs from {reference}", path)

        groups = group_frames(len(frames), config.frames_per_set, config.set_stride)
        if not groups:
            raise IngestException(
                f"{len(frames)} frames do not fill one set of {config.frames_per_set}"
            )
        used = groups[-1].stop
        if used < len(frames):
            logger.warning(f"Ignoring {len(frames) - used} trailing frames that do not fill a set")

        stack = np.stack(frames)
        return [
            FrameSequence(
                frames=np.ascontiguousarray(stack[group.start: group.stop]),
                dt=config.dt,
                pixel_pitch=config.pixel_pitch,
                channels=Channels.GRAY,
                provenance=Provenance(ProvenanceKind.INGESTED),
            )
            for group in groups
        ]

    def ingest(self, config: IngestConfig, output_dir: Optional[Path] = None) -> Dict:
        """
        Ingest frames and write them as a (multi-set) frame tree.

        Returns:
            Results dict with the output root, the sequences and the size table
        """
        root = Path(output_dir) if output_dir is not None else (
            config.output_dir or settings.output_dir / config.name
        )
        try:
            logger.info("=" * 60)
            logger.info(f"Ingesting '{config.input_glob}' (channel={config.channel}) into {root}")
            logger.info("=" * 60)

            logger.info("[Step 1/2] Reading frames...")
            sequences = self.load_sets(config)
            ny, nx = sequences[0].shape
            logger.info(f"✓ {len(sequences)} set(s) of {sequences[0].n_frames} frames, {nx}x{ny}")

            logger.info("[Step 2/2] Writing variants...")
            base = FrameStore(root)
            multi_set = len(sequences) > 1
            metadata = {
                "source": config.input_glob,
                "channel": config.channel,
                "interval_label": config.interval_label,
            }
            tables = []
            for i, seq in enumerate(sequences):
                store = base.set_store(i) if multi_set else base
                reports = self._compression.store_variants(store, seq, config.compression_grid, {**metadata, "set": i})
                tables.append(self._compression.size_table(reports, i))
            if multi_set:
                labels = [f"set {i}" for i in range(len(sequences))]
                base.write_sets(labels, metadata)

            sizes = pd.concat(tables, ignore_index=True)
            write_csv(sizes, root / "sizes.csv", {"source": config.input_glob, "channel": config.channel})

            logger.info(f"✓ Ingested {len(sequences)} set(s) into {root}")
            return {"root": root, "sequences": sequences, "sizes": sizes}

        except AppException:
            raise

        except Exception as e:
            logger.error(f"Ingest failed: {e}")
            raise IngestException(str(e))
