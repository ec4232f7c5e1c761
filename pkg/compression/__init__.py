"""Compression harness for speckle frame sequences."""
from .codec import decode_frame, detect_format, encode_frame, reference_size, resolve_jpeg_quality
from .harness import (
    HistogramShiftReport,
    SizeReport,
    block_periodicity,
    decode_sequence,
    encode_sequence,
    histogram_shift_report,
    mean_absolute_error,
    roundtrip_sequence,
)
from .spec import CodecFormat, CompressionSpec

__all__ = [
    'decode_frame',
    'detect_format',
    'encode_frame',
    'reference_size',
    'resolve_jpeg_quality',
    'HistogramShiftReport',
    'SizeReport',
    'block_periodicity',
    'decode_sequence',
    'encode_sequence',
    'histogram_shift_report',
    'mean_absolute_error',
    'roundtrip_sequence',
    'CodecFormat',
    'CompressionSpec',
]
