import numpy as np
import pytest

from compression.codec import encode_jpeg, reference_size
from compression.harness import (
    SizeReport,
    block_periodicity,
    decode_sequence,
    encode_sequence,
    histogram_shift_report,
    intensity_histogram,
    mean_absolute_error,
    roundtrip_sequence,
)
from compression.spec import CompressionSpec
from core.exceptions import CodecException
from core.frames import DEGENERATE_RANGE, FrameSequence, ProvenanceKind
from synthesis.generator import synthesize
from tests.conftest import make_config


@pytest.fixture(scope="module")
def speckle():
    return synthesize(make_config(nx=64, ny=64, n_frames=4, seed=11))


def test_bmp_roundtrip_is_exact(speckle):
    decoded, report = roundtrip_sequence(speckle, CompressionSpec.bmp())
    np.testing.assert_array_equal(decoded.frames, speckle.frames)
    assert decoded.provenance.kind is ProvenanceKind.DECOMPRESSED
    assert decoded.provenance.compression == "bmp"
    assert report.mean_ratio == pytest.approx(1.0)


def test_jpeg_roundtrip_keeps_metadata(speckle):
    seq = speckle.with_frames(speckle.frames, dt=0.5, flags=frozenset({DEGENERATE_RANGE}))
    decoded, report = roundtrip_sequence(seq, CompressionSpec.jpeg(10), workers=1)
    assert decoded.frames.shape == seq.frames.shape
    assert decoded.dt == 0.5
    assert not decoded.flags
    assert decoded.provenance.describe() == "decompressed(jpg_q10)"
    assert report.mean_ratio > 1.0
    assert mean_absolute_error(seq, decoded) > 0


def test_size_report(speckle):
    payloads, report = encode_sequence(speckle, CompressionSpec.jpeg(30))
    assert report.frame_bytes.tolist() == [len(p) for p in payloads]
    assert report.reference_bytes == reference_size(speckle.frames[0])
    summary = report.summary()
    assert summary["frames"] == 4
    assert summary["min_ratio"] <= summary["mean_ratio"] <= summary["max_ratio"]
    assert summary["resolved_quality"] is None
    assert list(report.to_frame().columns) == ["frame", "bytes", "reference_bytes", "ratio"]


def test_ratio_mode_resolves_one_quality(speckle):
    payloads, report = encode_sequence(speckle, CompressionSpec.jpeg_ratio(6))
    assert report.resolved_quality is not None
    expected = [len(encode_jpeg(frame, report.resolved_quality)) for frame in speckle.frames]
    assert report.frame_bytes.tolist() == expected


def test_size_report_ratios():
    report = SizeReport(CompressionSpec.jpeg(10), np.array([100, 200]), 1000)
    np.testing.assert_allclose(report.ratios, [10.0, 5.0])
    assert report.mean_bytes == 150.0
    assert report.mean_ratio == 7.5


def test_decode_shape_mismatch(speckle):
    payloads, _ = encode_sequence(speckle, CompressionSpec.bmp())
    with pytest.raises(CodecException):
        decode_sequence(payloads[:2], speckle, CompressionSpec.bmp())


def test_identical_histograms(speckle):
    report = histogram_shift_report(speckle, speckle)
    assert report.total_variation == 0.0
    assert report.mean_shift == 0.0
    assert report.original.sum() == speckle.frames.size
    assert len(report.to_frame()) == 256


def test_histogram_shift_of_constant_offset():
    a = FrameSequence(np.full((2, 4, 4), 10, dtype=np.uint8))
    b = FrameSequence(np.full((2, 4, 4), 13, dtype=np.uint8))
    report = histogram_shift_report(a, b)
    assert report.total_variation == 1.0
    assert report.mean_shift == pytest.approx(3.0)
    assert intensity_histogram(a)[10] == 32


def test_mean_absolute_error():
    a = FrameSequence(np.zeros((2, 2, 2), dtype=np.uint8))
    b = FrameSequence(np.full((2, 2, 2), 255, dtype=np.uint8))
    assert mean_absolute_error(a, b) == 255.0
    with pytest.raises(CodecException):
        mean_absolute_error(a, FrameSequence(np.zeros((3, 2, 2), dtype=np.uint8)))


def test_jpeg_blocking_is_periodic():
    seq = synthesize(make_config(nx=128, ny=128, n_frames=2, seed=5))
    decoded, _ = roundtrip_sequence(seq, CompressionSpec.jpeg(10))
    assert block_periodicity(decoded.frames[0]) > block_periodicity(seq.frames[0])


def test_block_periodicity_needs_width():
    with pytest.raises(CodecException):
        block_periodicity(np.zeros((8, 10)))
