"""CSV tables, heatmap PNGs and line plots with their metadata attached."""
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from config import settings
from core.exceptions import StorageException

logger = logging.getLogger(__name__)


def write_csv(df: pd.DataFrame, path: Path, header: Optional[Dict] = None) -> Path:
    """
    Write a table preceded by ``# key: value`` metadata lines.

    Args:
        df: Table to write, without index
        path: Output file
        header: Metadata recorded above the column header row
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            for key, value in (header or {}).items():
                f.write(f"# {key}: {value}\n")
            df.to_csv(f, index=False, float_format="%.12g")
    except OSError as e:
        raise StorageException(f"cannot write CSV: {e}", path)
    logger.info(f"✓ Wrote {len(df)} rows to {path}")
    return path


def read_csv(path: Path) -> Tuple[pd.DataFrame, Dict[str, str]]:
    """Read a CSV written by write_csv; returns the table and its metadata."""
    path = Path(path)
    header: Dict[str, str] = {}
    try:
        with open(path, 'r', encoding='utf-8') as f:
            skip = 0
            for line in f:
                if not line.startswith("# "):
                    break
                key, _, value = line[2:].rstrip("\n").partition(": ")
                header[key] = value
                skip += 1
        return pd.read_csv(path, skiprows=skip), header
    except (OSError, pd.errors.ParserError) as e:
        raise StorageException(f"cannot read CSV: {e}", path)


def write_map_csv(
    values: np.ndarray,
    path: Path,
    valid_mask: Optional[np.ndarray] = None,
    header: Optional[Dict] = None,
) -> Path:
    """Write a 2D map row-major, one CSV row per image row, at full float64 precision; invalid pixels are empty."""
    values = np.asarray(values, dtype=np.float64)
    if valid_mask is not None:
        values = np.where(valid_mask, values, np.nan)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            for key, value in (header or {}).items():
                f.write(f"# {key}: {value}\n")
            pd.DataFrame(values).to_csv(f, index=False, header=False, float_format="%.17g")
    except OSError as e:
        raise StorageException(f"cannot write map CSV: {e}", path)
    return path


def read_map_csv(path: Path) -> np.ndarray:
    """Read a map written by write_map_csv; invalid pixels come back as NaN."""
    path = Path(path)
    try:
        return pd.read_csv(path, comment="#", header=None, float_precision="round_trip").to_numpy(dtype=np.float64)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise StorageException(f"cannot read map CSV: {e}", path)


def heatmap_image(
    values: np.ndarray,
    display_range: Tuple[float, float],
    valid_mask: Optional[np.ndarray] = None,
    colormap: Optional[str] = None,
) -> np.ndarray:
    """Map values linearly from display_range into an 8-bit RGB image; invalid pixels are black."""
    lo, hi = display_range
    span = hi - lo if hi > lo else 1.0
    scaled = np.clip((np.nan_to_num(values, nan=lo) - lo) / span, 0.0, 1.0)
    rgba = matplotlib.colormaps[colormap or settings.heatmap_colormap](scaled, bytes=True)
    rgb = np.ascontiguousarray(rgba[..., :3])
    if valid_mask is not None:
        rgb[~valid_mask] = 0
    return rgb


def write_heatmap(
    values: np.ndarray,
    path: Path,
    display_range: Tuple[float, float],
    valid_mask: Optional[np.ndarray] = None,
    metadata: Optional[Dict] = None,
    colormap: Optional[str] = None,
) -> Path:
    """Write a heatmap PNG with the display range and metadata as text chunks."""
    path = Path(path)
    info = PngInfo()
    info.add_text("display_range", f"{display_range[0]:.12g},{display_range[1]:.12g}")
    info.add_text("colormap", colormap or settings.heatmap_colormap)
    for key, value in (metadata or {}).items():
        info.add_text(str(key), str(value))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(heatmap_image(values, display_range, valid_mask, colormap), mode="RGB").save(
            path, format="PNG", pnginfo=info
        )
    except OSError as e:
        raise StorageException(f"cannot write heatmap: {e}", path)
    return path


def read_png_text(path: Path) -> Dict[str, str]:
    try:
        with Image.open(path) as img:
            return dict(img.text)
    except OSError as e:
        raise StorageException(f"cannot read PNG: {e}", path)


def write_line_plot(
    df: pd.DataFrame,
    x: str,
    path: Path,
    title: str = "",
    ylabel: str = "",
    markers: bool = False,
    metadata: Optional[Dict] = None,
) -> Path:
    """Plot every column except x against x, one labeled line per column; metadata goes to PNG text chunks."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    try:
        for column in df.columns:
            if column == x:
                continue
            ax.plot(df[x], df[column], marker="o" if markers else None, label=str(column))
        ax.set_xlabel(x)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=100, metadata={str(k): str(v) for k, v in (metadata or {}).items()})
    except OSError as e:
        raise StorageException(f"cannot write plot: {e}", path)
    finally:
        plt.close(fig)
    return path
