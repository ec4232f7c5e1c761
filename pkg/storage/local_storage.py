"""Local storage for frame trees: one directory of image files per variant."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import settings
from compression.codec import decode_frame, encode_bmp
from core.exceptions import AppException, StorageException
from core.frames import Channels, FrameSequence, Provenance, ProvenanceKind
from estimators.types import ActivityMap, Estimator

logger = logging.getLogger(__name__)

SIDECAR = "sequence.json"
MANIFEST = "tree.json"
SETS_MANIFEST = "sets.json"
SINGLE_SET_LABEL = "set 0"
FRAME_PATTERN = "frame_{:05d}{}"


def _to_json(value):
    if isinstance(value, dict):
        return {str(k): _to_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_json(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, payload: Dict) -> None:
    try:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(_to_json(payload), f, indent=2, ensure_ascii=False)
            f.write('\n')
    except OSError as e:
        raise StorageException(f"cannot write JSON: {e}", path)


def read_json(path: Path) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise StorageException("file not found", path)
    except (OSError, json.JSONDecodeError) as e:
        raise StorageException(f"cannot read JSON: {e}", path)


class FrameStore:
    """
    Frame tree rooted at one directory.

    Layout:
        <root>/tree.json                    variants in configured order
        <root>/<variant>/sequence.json      sequence metadata
        <root>/<variant>/frame_00000.<ext>  one image file per frame
    """

    def __init__(self, root: Path):
        """
        Initialize FrameStore.

        Args:
            root: Tree directory, created on first write
        """
        self.root = Path(root)

    def variant_dir(self, variant: str) -> Path:
        return self.root / variant

    def write_sequence(
        self,
        seq: FrameSequence,
        variant: str,
        payloads: Optional[Sequence[bytes]] = None,
        extension: str = ".bmp",
        metadata: Optional[Dict] = None,
    ) -> Path:
        """
        Write a sequence as numbered image files plus a sidecar.

        Args:
            seq: Sequence to store
            variant: Directory name under the root, e.g. ``bmp`` or ``jpg_q10``
            payloads: Already encoded frame files; BMP-encoded from seq when None
            extension: File extension of the payloads
            metadata: Extra sidecar entries (scenario hash, compression spec, ...)

        Returns:
            Variant directory
        """
        out_dir = self.variant_dir(variant)
        if payloads is None:
            payloads = [encode_bmp(frame) for frame in seq.frames]
            extension = ".bmp"
        if len(payloads) != seq.n_frames:
            raise StorageException(f"{len(payloads)} payloads for {seq.n_frames} frames", out_dir)

        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            for stale in out_dir.glob("frame_*"):
                stale.unlink()
            for i, data in enumerate(payloads):
                (out_dir / FRAME_PATTERN.format(i, extension)).write_bytes(data)
        except OSError as e:
            raise StorageException(f"cannot write frames: {e}", out_dir)

        ny, nx = seq.shape
        sidecar = {
            "variant": variant,
            "n_frames": seq.n_frames,
            "nx": nx,
            "ny": ny,
            "dt": seq.dt,
            "pixel_pitch": seq.pixel_pitch,
            "channels": seq.channels.value,
            "provenance": seq.provenance.kind.value,
            "compression": seq.provenance.compression,
            "extension": extension,
            "flags": sorted(seq.flags),
        }
        sidecar.update(metadata or {})
        write_json(out_dir / SIDECAR, sidecar)

        logger.info(f"Saved {seq.n_frames} frames of variant '{variant}' to {out_dir}")
        return out_dir

    def read_metadata(self, variant: str) -> Dict:
        return read_json(self.variant_dir(variant) / SIDECAR)

    def frame_files(self, variant: str) -> List[Path]:
        meta = self.read_metadata(variant)
        return sorted(self.variant_dir(variant).glob(f"frame_*{meta['extension']}"))

    def read_sequence(self, variant: str, workers: Optional[int] = None) -> FrameSequence:
        """
        Decode a stored variant back into a FrameSequence.

        Raises:
            StorageException: If the sidecar or frames are missing or unreadable
        """
        meta = self.read_metadata(variant)
        files = self.frame_files(variant)
        if len(files) != meta["n_frames"]:
            raise StorageException(
                f"variant '{variant}' holds {len(files)} frames, sidecar says {meta['n_frames']}",
                self.variant_dir(variant),
            )

        def load(path: Path) -> np.ndarray:
            try:
                return decode_frame(path.read_bytes())
            except AppException as e:
                raise StorageException(e.message, path)
            except OSError as e:
                raise StorageException(f"cannot read frame: {e}", path)

        with ThreadPoolExecutor(max_workers=workers or settings.workers) as pool:
            frames = list(pool.map(load, files))
        shapes = {f.shape for f in frames}
        if len(shapes) > 1:
            raise StorageException(f"frames of variant '{variant}' differ in size: {sorted(shapes)}",
                                   self.variant_dir(variant))

        return FrameSequence(
            frames=np.stack(frames),
            dt=float(meta["dt"]),
            pixel_pitch=float(meta["pixel_pitch"]),
            channels=Channels(meta["channels"]),
            provenance=Provenance(ProvenanceKind(meta["provenance"]), meta.get("compression")),
            flags=frozenset(meta.get("flags", [])),
        )

    def write_manifest(self, variants: Sequence[str], metadata: Optional[Dict] = None) -> Path:
        payload = {"variants": list(variants)}
        payload.update(metadata or {})
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / MANIFEST
        write_json(path, payload)
        return path

    def read_manifest(self) -> Dict:
        return read_json(self.root / MANIFEST)

    def list_variants(self) -> List[str]:
        """Variants in manifest order; sorted directory names when no manifest exists."""
        if (self.root / MANIFEST).exists():
            return list(self.read_manifest()["variants"])
        if not self.root.is_dir():
            raise StorageException("frame tree not found", self.root)
        return sorted(p.name for p in self.root.iterdir() if (p / SIDECAR).is_file())

    def has_variant(self, variant: str) -> bool:
        return (self.variant_dir(variant) / SIDECAR).is_file()

    def set_store(self, index: int) -> "FrameStore":
        return FrameStore(self.root / f"set_{index:03d}")

    def write_sets(self, labels: Sequence[str], metadata: Optional[Dict] = None) -> Path:
        """Write sets.json for a tree of set_NNN subtrees."""
        payload = {"sets": [f"set_{i:03d}" for i in range(len(labels))], "labels": list(labels)}
        payload.update(metadata or {})
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / SETS_MANIFEST
        write_json(path, payload)
        return path

    def is_multi_set(self) -> bool:
        return (self.root / SETS_MANIFEST).is_file()

    def list_sets(self) -> List["FrameStore"]:
        """Set subtrees in order; a single-set tree yields itself."""
        if not self.is_multi_set():
            return [self]
        manifest = read_json(self.root / SETS_MANIFEST)
        return [FrameStore(self.root / name) for name in manifest["sets"]]

    def set_labels(self) -> List[str]:
        """Labels from sets.json; a single-set tree is 'set 0' wherever it lives."""
        if not self.is_multi_set():
            return [SINGLE_SET_LABEL]
        return list(read_json(self.root / SETS_MANIFEST)["labels"])


def save_activity_map(amap: ActivityMap, directory: Path, name: str, metadata: Optional[Dict] = None) -> Path:
    """
    Store a map as ``<name>.npy`` (invalid pixels as NaN) plus ``<name>.json``.

    Returns:
        Path of the .npy file
    """
    directory = Path(directory)
    path = directory / f"{name}.npy"
    try:
        directory.mkdir(parents=True, exist_ok=True)
        np.save(path, np.where(amap.valid_mask, amap.values, np.nan))
    except OSError as e:
        raise StorageException(f"cannot write map: {e}", path)
    sidecar = {
        "estimator": amap.estimator.value,
        "lag_m": amap.lag_m,
        "q": amap.q,
        "display_range": list(amap.display_range) if amap.display_range else None,
        "valid_pixels": int(amap.valid_mask.sum()),
    }
    sidecar.update(metadata or {})
    write_json(directory / f"{name}.json", sidecar)
    return path


def load_activity_map(directory: Path, name: str) -> ActivityMap:
    directory = Path(directory)
    path = directory / f"{name}.npy"
    meta = read_json(directory / f"{name}.json")
    try:
        values = np.load(path)
    except FileNotFoundError:
        raise StorageException("map file not found", path)
    except (OSError, ValueError) as e:
        raise StorageException(f"cannot read map: {e}", path)
    valid = np.isfinite(values)
    display_range = meta.get("display_range")
    return ActivityMap(
        values=np.where(valid, values, 0.0),
        estimator=Estimator(meta["estimator"]),
        lag_m=int(meta["lag_m"]),
        valid_mask=valid,
        q=meta.get("q"),
        display_range=tuple(display_range) if display_range else None,
    )
