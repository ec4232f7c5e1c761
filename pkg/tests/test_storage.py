import numpy as np
import pandas as pd
import pytest
from PIL import Image

from compression.codec import encode_jpeg
from core.exceptions import StorageException
from core.frames import DEGENERATE_RANGE, FrameSequence, Provenance, ProvenanceKind
from estimators.types import ActivityMap, Estimator
from storage import (
    FrameStore,
    load_activity_map,
    read_csv,
    read_json,
    read_map_csv,
    read_png_text,
    save_activity_map,
    write_csv,
    write_heatmap,
    write_json,
    write_line_plot,
    write_map_csv,
)
from storage.exporters import heatmap_image


class TestFrameStore:
    def test_bmp_roundtrip(self, tmp_path, random_frames):
        seq = FrameSequence(random_frames, dt=0.25, pixel_pitch=2.0, flags=frozenset({DEGENERATE_RANGE}))
        store = FrameStore(tmp_path / "tree")
        out = store.write_sequence(seq, "bmp", metadata={"scenario_hash": "abc"})
        assert len(list(out.glob("frame_*.bmp"))) == 24

        loaded = store.read_sequence("bmp")
        np.testing.assert_array_equal(loaded.frames, seq.frames)
        assert loaded.dt == 0.25
        assert loaded.pixel_pitch == 2.0
        assert loaded.flags == seq.flags
        assert store.read_metadata("bmp")["scenario_hash"] == "abc"

    def test_encoded_payloads(self, tmp_path, random_frames):
        seq = FrameSequence(random_frames[:3], provenance=Provenance.decompressed("jpg_q50"))
        payloads = [encode_jpeg(frame, 50) for frame in seq.frames]
        store = FrameStore(tmp_path)
        store.write_sequence(seq, "jpg_q50", payloads, ".jpg")
        loaded = store.read_sequence("jpg_q50")
        assert loaded.frames.shape == seq.frames.shape
        assert loaded.provenance.kind is ProvenanceKind.DECOMPRESSED
        assert loaded.provenance.compression == "jpg_q50"
        assert [p.name for p in store.frame_files("jpg_q50")] == [
            "frame_00000.jpg", "frame_00001.jpg", "frame_00002.jpg"
        ]

    def test_rewrite_removes_stale_frames(self, tmp_path, random_frames):
        store = FrameStore(tmp_path)
        store.write_sequence(FrameSequence(random_frames), "bmp")
        store.write_sequence(FrameSequence(random_frames[:4]), "bmp")
        assert store.read_sequence("bmp").n_frames == 4

    def test_payload_count_mismatch(self, tmp_path, random_frames):
        with pytest.raises(StorageException):
            FrameStore(tmp_path).write_sequence(FrameSequence(random_frames), "bmp", [b"x"], ".bmp")

    def test_missing_frame_file(self, tmp_path, random_frames):
        store = FrameStore(tmp_path)
        out = store.write_sequence(FrameSequence(random_frames[:3]), "bmp")
        (out / "frame_00001.bmp").unlink()
        with pytest.raises(StorageException):
            store.read_sequence("bmp")

    def test_corrupt_frame_file(self, tmp_path, random_frames):
        store = FrameStore(tmp_path)
        out = store.write_sequence(FrameSequence(random_frames[:3]), "bmp")
        (out / "frame_00002.bmp").write_bytes(b"BM garbage")
        with pytest.raises(StorageException) as exc:
            store.read_sequence("bmp")
        assert exc.value.path.name == "frame_00002.bmp"

    def test_missing_variant(self, tmp_path):
        with pytest.raises(StorageException):
            FrameStore(tmp_path).read_sequence("jp2_x6")

    def test_manifest_order(self, tmp_path, random_frames):
        store = FrameStore(tmp_path)
        for name in ("bmp", "jpg_q70", "jp2_x2"):
            store.write_sequence(FrameSequence(random_frames[:2]), name)
        assert store.list_variants() == ["bmp", "jp2_x2", "jpg_q70"]
        store.write_manifest(["bmp", "jpg_q70", "jp2_x2"], {"scenario": "demo"})
        assert store.list_variants() == ["bmp", "jpg_q70", "jp2_x2"]
        assert store.read_manifest()["scenario"] == "demo"
        assert store.has_variant("jpg_q70")
        assert not store.has_variant("jpg_q10")

    def test_missing_tree(self, tmp_path):
        with pytest.raises(StorageException):
            FrameStore(tmp_path / "nowhere").list_variants()

    def test_sets(self, tmp_path, random_frames):
        store = FrameStore(tmp_path)
        assert not store.is_multi_set()
        assert store.list_sets()[0].root == store.root
        assert store.set_labels() == ["set 0"]
        for i in range(2):
            store.set_store(i).write_sequence(FrameSequence(random_frames[:2]), "bmp")
        store.write_sets(["0 min", "2 min"])
        assert store.is_multi_set()
        assert [s.root.name for s in store.list_sets()] == ["set_000", "set_001"]
        assert store.set_labels() == ["0 min", "2 min"]


class TestJson:
    def test_numpy_values(self, tmp_path):
        path = tmp_path / "meta.json"
        write_json(path, {"n": np.int64(3), "x": np.float64(0.5), "p": tmp_path, "t": (1, 2)})
        assert read_json(path) == {"n": 3, "x": 0.5, "p": str(tmp_path), "t": [1, 2]}

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageException) as exc:
            read_json(tmp_path / "none.json")
        assert exc.value.code == "STORAGE_ERROR"

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(StorageException):
            read_json(path)


class TestActivityMaps:
    def test_exact_roundtrip(self, tmp_path):
        values = np.random.default_rng(4).random((6, 5)) * 30.0
        valid = np.ones((6, 5), dtype=bool)
        valid[2, 3] = False
        amap = ActivityMap(values, Estimator.S2, 7, valid, q=1.0, display_range=(0.1, 29.5))
        save_activity_map(amap, tmp_path, "bmp", {"variant": "bmp"})
        loaded = load_activity_map(tmp_path, "bmp")
        np.testing.assert_array_equal(loaded.values[valid], values[valid])
        np.testing.assert_array_equal(loaded.valid_mask, valid)
        assert loaded.estimator is Estimator.S2
        assert loaded.lag_m == 7
        assert loaded.q == 1.0
        assert loaded.display_range == (0.1, 29.5)
        assert read_json(tmp_path / "bmp.json")["valid_pixels"] == 29

    def test_missing_map(self, tmp_path):
        with pytest.raises(StorageException):
            load_activity_map(tmp_path, "nothing")


class TestExporters:
    def test_csv_header_roundtrip(self, tmp_path):
        df = pd.DataFrame({"variant": ["bmp", "jpg_q10"], "mean_ssi": [1.0, 0.123456789012345]})
        path = write_csv(df, tmp_path / "out" / "table.csv", {"estimator": "S1", "lag_m": 10})
        table, header = read_csv(path)
        assert header == {"estimator": "S1", "lag_m": "10"}
        assert table["variant"].tolist() == ["bmp", "jpg_q10"]
        assert table["mean_ssi"][1] == pytest.approx(0.123456789012, abs=1e-12)

    def test_csv_without_header(self, tmp_path):
        path = write_csv(pd.DataFrame({"a": [1, 2]}), tmp_path / "plain.csv")
        table, header = read_csv(path)
        assert header == {}
        assert table["a"].tolist() == [1, 2]

    def test_heatmap_text_chunks(self, tmp_path):
        values = np.linspace(0.0, 1.0, 20).reshape(4, 5)
        valid = np.ones((4, 5), dtype=bool)
        valid[0, 0] = False
        path = write_heatmap(values, tmp_path / "map.png", (0.0, 2.0), valid, {"variant": "jp2_x6"})
        text = read_png_text(path)
        assert text["display_range"] == "0,2"
        assert text["variant"] == "jp2_x6"
        assert text["colormap"] == "viridis"
        with Image.open(path) as img:
            pixels = np.asarray(img)
        assert pixels.shape == (4, 5, 3)
        assert pixels[0, 0].tolist() == [0, 0, 0]

    def test_heatmap_uses_display_range(self):
        values = np.array([[0.0, 5.0, 10.0]])
        narrow = heatmap_image(values, (0.0, 5.0))
        np.testing.assert_array_equal(narrow[0, 1], narrow[0, 2])
        assert not np.array_equal(narrow[0, 0], narrow[0, 1])

    def test_line_plot(self, tmp_path):
        df = pd.DataFrame({"lag": [0, 1, 2], "bmp": [1.0, 0.5, 0.2], "jpg_q10": [1.0, 0.6, 0.3]})
        path = write_line_plot(df, "lag", tmp_path / "plot.png", title="rho", markers=True)
        with Image.open(path) as img:
            assert img.format == "PNG"


def test_map_csv_keeps_full_precision(tmp_path):
    values = np.random.default_rng(9).random((3, 4)) * 1e3
    valid = np.ones((3, 4), dtype=bool)
    valid[1, 2] = False
    path = write_map_csv(values, tmp_path / "map.csv", valid, {"estimator": "S1", "m": 10})
    loaded = read_map_csv(path)
    assert loaded.shape == (3, 4)
    assert np.isnan(loaded[1, 2])
    np.testing.assert_array_equal(loaded[valid], values[valid])
    _, header = read_csv(path)
    assert header["m"] == "10"
