"""Spatial activity layouts: where the object is fast and where it is slow."""
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from core.exceptions import ConfigurationException
from .fields import TauField


def disk_mask(nx: int, ny: int, center: Tuple[float, float], radius: float) -> np.ndarray:
    """Boolean disk; center is (x, y) in camera pixels."""
    y, x = np.mgrid[0:ny, 0:nx]
    cx, cy = center
    return (x - cx) ** 2 + (y - cy) ** 2 <= radius ** 2


def text_mask(text: str, nx: int, ny: int, band: int = 0, bands: int = 1, fill: float = 0.7) -> np.ndarray:
    """
    Render text as a sharp-edged binary mask.

    The glyphs are drawn with Pillow's default font, thresholded, cropped and
    scaled up by an integer factor (nearest neighbour) so that the text spans
    about `fill` of the frame width, centred in horizontal band `band` of
    `bands` equal bands.
    """
    if not 0 <= band < bands:
        raise ConfigurationException(f"band {band} outside 0..{bands - 1}")
    font = ImageFont.load_default()
    left, top, right, bottom = ImageDraw.Draw(Image.new("L", (1, 1))).textbbox((0, 0), text, font=font)
    canvas = Image.new("L", (right - left + 4, bottom - top + 4), 0)
    ImageDraw.Draw(canvas).text((2 - left, 2 - top), text, fill=255, font=font)

    glyphs = np.asarray(canvas) >= 128
    rows = np.nonzero(glyphs.any(axis=1))[0]
    cols = np.nonzero(glyphs.any(axis=0))[0]
    if rows.size == 0:
        raise ConfigurationException(f"text '{text}' renders to an empty mask")
    glyphs = glyphs[rows[0]: rows[-1] + 1, cols[0]: cols[-1] + 1]

    band_height = ny // bands
    scale = max(1, min(int(fill * nx) // glyphs.shape[1], int(fill * band_height) // glyphs.shape[0]))
    glyph_img = Image.fromarray(glyphs.astype(np.uint8) * 255)
    glyph_img = glyph_img.resize((glyphs.shape[1] * scale, glyphs.shape[0] * scale), Image.Resampling.NEAREST)
    scaled = np.asarray(glyph_img) >= 128

    mask = np.zeros((ny, nx), dtype=bool)
    h, w = scaled.shape
    if h > band_height or w > nx:
        raise ConfigurationException(f"text '{text}' does not fit a {nx}x{band_height} band")
    top = band * band_height + (band_height - h) // 2
    left = (nx - w) // 2
    mask[top: top + h, left: left + w] = scaled
    return mask


def load_mask(path: Path, nx: int, ny: int) -> np.ndarray:
    """Binary mask from an image file; nonzero pixels belong to the region."""
    try:
        with Image.open(path) as img:
            mask = np.asarray(img.convert("L")) > 0
    except (OSError, ValueError) as e:
        raise ConfigurationException(f"cannot read mask {path}: {e}")
    if mask.shape != (ny, nx):
        raise ConfigurationException(f"mask {path} has shape {mask.shape}, expected ({ny}, {nx})")
    return mask


def compose_tau(
    nx: int,
    ny: int,
    background_tau: float,
    regions: Iterable[Tuple[np.ndarray, float]],
) -> TauField:
    """Paint regions (later ones on top) with their tau_c over a background."""
    tau = np.full((ny, nx), float(background_tau))
    for mask, value in regions:
        if mask.shape != (ny, nx):
            raise ConfigurationException(f"region mask shape {mask.shape} does not match ({ny}, {nx})")
        tau[mask] = float(value)
    return TauField(tau)


def disks_tau(
    nx: int,
    ny: int,
    disks: Sequence[Tuple[Tuple[float, float], float, float]],
    background_tau: float,
) -> TauField:
    """Tau field for disks given as ((x, y), radius, tau_c)."""
    return compose_tau(
        nx, ny, background_tau,
        ((disk_mask(nx, ny, center, radius), tau) for center, radius, tau in disks),
    )
