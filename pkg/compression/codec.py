"""Single-frame BMP / JPEG / JPEG2000 encoding through Pillow."""
import io
import logging
from functools import lru_cache
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from config import settings
from core.exceptions import CodecException
from .spec import CodecFormat, CompressionSpec

logger = logging.getLogger(__name__)

_MAGIC = (
    (b"BM", "bmp"),
    (b"\xff\xd8\xff", "jpg"),
    (b"\x00\x00\x00\x0cjP  \r\n\x87\n", "jp2"),
    (b"\xff\x4f\xff\x51", "j2k"),
)

JP2_SEARCH_STEPS = 12


def detect_format(data: bytes) -> Optional[str]:
    """Format name from the leading magic bytes, or None."""
    for magic, name in _MAGIC:
        if data[: len(magic)] == magic:
            return name
    return None


def _to_image(frame: np.ndarray) -> Image.Image:
    frame = np.ascontiguousarray(frame)
    if frame.dtype != np.uint8:
        raise CodecException(f"frames must be uint8, got {frame.dtype}")
    if frame.ndim == 2:
        return Image.fromarray(frame, mode="L")
    if frame.ndim == 3 and frame.shape[2] == 3:
        return Image.fromarray(frame, mode="RGB")
    raise CodecException(f"unsupported channel layout with shape {frame.shape}")


def _save(img: Image.Image, fmt: str, **params) -> bytes:
    buffer = io.BytesIO()
    img.save(buffer, format=fmt, **params)
    return buffer.getvalue()


def encode_bmp(frame: np.ndarray) -> bytes:
    return _save(_to_image(frame), "BMP")


def encode_jpeg(frame: np.ndarray, quality: int) -> bytes:
    """Baseline JPEG; gray frames are written as a single component."""
    params = {"quality": int(quality)}
    if settings.jpeg_subsampling is not None:
        params["subsampling"] = settings.jpeg_subsampling
    return _save(_to_image(frame), "JPEG", **params)


def _encode_jp2_rate(img: Image.Image, rate: float) -> bytes:
    return _save(
        img,
        "JPEG2000",
        quality_mode="rates",
        quality_layers=[float(rate)],
        irreversible=settings.jp2_irreversible,
    )


@lru_cache(maxsize=32)
def _reference_size(shape: tuple) -> int:
    return len(encode_bmp(np.zeros(shape, dtype=np.uint8)))


def reference_size(frame: np.ndarray) -> int:
    """Byte size of the BMP file of a frame with this shape."""
    return _reference_size(tuple(np.asarray(frame).shape))


def encode_jpeg2000(frame: np.ndarray, ratio: float) -> bytes:
    """
    JPEG2000 file whose size ratio to the BMP reference is within tolerance of ratio.

    The ratio is first requested directly from the encoder; if the achieved
    ratio misses the tolerance, the rate parameter is bisected.
    """
    img = _to_image(frame)
    reference = reference_size(frame)
    tolerance = settings.jp2_ratio_tolerance

    def attempt(rate: float):
        data = _encode_jp2_rate(img, rate)
        return data, reference / len(data)

    data, achieved = attempt(ratio)
    if abs(achieved / ratio - 1.0) <= tolerance:
        return data

    best_error, best = abs(achieved / ratio - 1.0), data
    lo, hi = (ratio, ratio * 4.0) if achieved < ratio else (max(1.0, ratio / 4.0), ratio)
    for _ in range(JP2_SEARCH_STEPS):
        mid = 0.5 * (lo + hi)
        data, achieved = attempt(mid)
        error = abs(achieved / ratio - 1.0)
        if error < best_error:
            best_error, best = error, data
        if error <= tolerance:
            return data
        if achieved < ratio:
            lo = mid
        else:
            hi = mid

    logger.warning(f"JPEG2000 ratio {ratio:g} missed by {best_error:.1%} after rate search")
    return best


def resolve_jpeg_quality(frame: np.ndarray, ratio: float) -> int:
    """Largest JPEG quality whose size ratio to the BMP reference is >= ratio."""
    reference = reference_size(frame)

    def achieved(quality: int) -> float:
        return reference / len(encode_jpeg(frame, quality))

    if achieved(1) < ratio:
        logger.warning(f"JPEG cannot reach size ratio {ratio:g}; using quality 1")
        return 1
    lo, hi = 1, 100
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if achieved(mid) >= ratio:
            lo = mid
        else:
            hi = mid - 1
    return lo


def encode_frame(frame: np.ndarray, spec: CompressionSpec, quality: Optional[int] = None) -> bytes:
    """
    Encode one 8-bit gray or RGB frame.

    Args:
        frame: uint8 array (ny, nx) or (ny, nx, 3)
        spec: Compression setting
        quality: Pre-resolved JPEG quality for ratio-targeted JPEG specs

    Returns:
        File bytes in the selected format
    """
    if spec.format is CodecFormat.BMP:
        return encode_bmp(frame)
    if spec.format is CodecFormat.JPEG:
        if spec.quality is not None:
            return encode_jpeg(frame, spec.quality)
        return encode_jpeg(frame, quality or resolve_jpeg_quality(frame, spec.ratio))
    return encode_jpeg2000(frame, spec.ratio)


def decode_frame(data: bytes) -> np.ndarray:
    """
    Decode file bytes to a uint8 frame.

    Raises:
        CodecException: If the payload is malformed or truncated
    """
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB" if img.mode in ("RGBA", "CMYK", "YCbCr") else "L")
            return np.array(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise CodecException(f"cannot decode payload of {len(data)} bytes: {e}", detect_format(data))
