"""Reproduction checks on full-size synthetic scenarios. Run with ``pytest -m acceptance``."""
import numpy as np
import pytest
from scipy.ndimage import binary_dilation

from cli.commands import cmd_analyze, cmd_simulate
from cli.models import ScenarioConfig, preset_scenario, with_overrides
from compression.codec import encode_bmp
from compression.harness import encode_sequence, roundtrip_sequence
from compression.spec import CompressionSpec
from estimators.correlation import temporal_corr
from estimators.msf import msf_s1
from estimators.types import Estimator
from metrics.statistics import aligned_block_means, estimate_histogram
from services import TimeSeriesService
from storage import load_activity_map, read_csv
from synthesis.generator import synthesize

pytestmark = pytest.mark.acceptance

REGION_CONTRAST_THRESHOLD = 1.3
# pilot run of the shipped gaussian_logos seed: minimum 1.202 (jpg_q10)
GAUSSIAN_REGION_CONTRAST_THRESHOLD = 1.15
# PSF blur spreads logo activity this far into the background
LOGO_EDGE_MARGIN = 4
SSI_TOLERANCE = 0.15
REFERENCE_SSI = {
    "jpg_q70": 0.955,
    "jpg_q30": 0.783,
    "jpg_q10": 0.503,
    "jp2_x2": 0.992,
    "jp2_x3": 0.925,
    "jp2_x6": 0.639,
}


@pytest.fixture(scope="module")
def constant_sequence():
    scenario = preset_scenario("constant")
    return synthesize(scenario.synthesis_configs()[0])


@pytest.fixture(scope="module")
def logos_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("logos")
    cmd_simulate(preset_scenario("logos"), root)
    cmd_analyze(root)
    return root


def test_correlation_law(constant_sequence):
    rho = temporal_corr(constant_sequence, 40).rho
    assert rho[0] == 1.0
    assert np.all(np.diff(rho) < 0.02)
    # finite-sequence bias of the mean-subtracted estimate pulls rho[20] below exp(-1) at N=256
    assert 0.12 <= rho[20] <= 0.22


def test_correlation_bias_shrinks_with_length():
    scenario = with_overrides(preset_scenario("constant"), nx=64, ny=64)
    short = synthesize(with_overrides(scenario, n_frames=256).synthesis_configs()[0])
    long = synthesize(with_overrides(scenario, n_frames=2048).synthesis_configs()[0])
    rho_short = temporal_corr(short, 20).rho[20]
    rho_long = temporal_corr(long, 20).rho[20]
    assert 0.28 <= rho_long <= 0.40
    assert rho_long - rho_short > 0.08


@pytest.mark.parametrize("spec", ["jpg:q=10", "jp2:ratio=6"])
def test_compression_changes_correlation(constant_sequence, spec):
    reference = temporal_corr(constant_sequence, 40)
    decoded, _ = roundtrip_sequence(constant_sequence, CompressionSpec.parse(spec))
    assert temporal_corr(decoded, 40).max_deviation(reference) > 0.01


def test_file_sizes(constant_sequence):
    assert 65536 < len(encode_bmp(constant_sequence.frames[0])) <= 65536 + 1078
    _, jpeg = encode_sequence(constant_sequence.subsequence(0, 16), CompressionSpec.jpeg(10))
    # pilot: 5758 B with Pillow 12.2 on libjpeg-turbo
    assert 4.5 * 1024 <= jpeg.mean_bytes <= 7.5 * 1024
    for ratio in (2.0, 3.0, 6.0):
        _, report = encode_sequence(constant_sequence.subsequence(0, 8), CompressionSpec.jpeg2000(ratio))
        np.testing.assert_allclose(report.ratios, ratio, rtol=0.15)


def test_histogram_narrowing(constant_sequence):
    decoded, _ = roundtrip_sequence(constant_sequence, CompressionSpec.jpeg(10))
    bmp = estimate_histogram(msf_s1(constant_sequence, 10))
    jpg = estimate_histogram(msf_s1(decoded, 10))
    assert jpg.std < bmp.std
    assert abs(jpg.mean - bmp.mean) > 0.005 * bmp.mean


def test_logos_region_contrast(logos_tree):
    maps, _ = read_csv(logos_tree / "analysis" / "maps.csv")
    assert len(maps) == 7
    assert (maps["region_contrast"] > REGION_CONTRAST_THRESHOLD).all()


def test_mean_ssi_ordering(logos_tree):
    table, _ = read_csv(logos_tree / "analysis" / "mean_ssi.csv")
    ssi = dict(zip(table["variant"], table["mean_ssi"]))
    assert ssi["jpg_q70"] > ssi["jpg_q30"] > ssi["jpg_q10"]
    assert ssi["jp2_x2"] > ssi["jp2_x3"] > ssi["jp2_x6"]
    # libjpeg-turbo and OpenJPEG land above the reference values (jpg_q30: 0.973), never far below
    for variant, reference in REFERENCE_SSI.items():
        assert ssi[variant] >= reference - SSI_TOLERANCE, variant


def test_jp2_beats_jpeg_at_matched_size(logos_tree):
    table, _ = read_csv(logos_tree / "analysis" / "mean_ssi.csv")
    jpg = table[table["variant"].str.startswith("jpg")]
    jp2 = table[table["variant"].str.startswith("jp2")]
    for _, a in jp2.iterrows():
        for _, b in jpg.iterrows():
            if abs(a["size_ratio"] / b["size_ratio"] - 1.0) <= 0.10:
                assert a["mean_ssi"] >= b["mean_ssi"]


def test_gaussian_illumination(tmp_path):
    scenario = preset_scenario("gaussian_logos")
    assert scenario.estimator is Estimator.S2
    result = cmd_simulate(scenario, tmp_path)
    analysis = cmd_analyze(result["root"])
    assert (analysis["maps"]["region_contrast"] > GAUSSIAN_REGION_CONTRAST_THRESHOLD).all()

    logos = np.load(tmp_path / "regions.npy")
    background = ~binary_dilation(logos, iterations=LOGO_EDGE_MARGIN)
    for variant in result["variants"]:
        amap = load_activity_map(analysis["output_dir"] / "maps", variant)
        logo_mean = amap.values[logos & amap.valid_mask].mean()
        blocks = aligned_block_means(amap, background)
        assert np.nanmax(blocks) <= logo_mean, variant


def test_time_series_stand_in(tmp_path):
    scenario = ScenarioConfig.model_validate({
        "name": "drying_small",
        "synthesis": {"nx": 128, "ny": 128, "n_frames": 64, "seed": 1602},
        "activity_layout": {
            "kind": "disks",
            "disks": [{"center": [64, 64], "radius": 40, "tau": 4.0}],
            "background_tau": 60.0,
        },
        "lag_m": 10,
        "activity_sets": [1.0, 2.0, 4.0, 8.0],
        "compression_grid": ["jpg:ratio=10", "jp2:ratio=10"],
    })
    result = cmd_simulate(scenario, tmp_path / "tree")
    analysis = cmd_analyze(result["root"])
    series = TimeSeriesService().run(analysis["output_dir"])["series"]
    for variant in ("bmp", "jpg_x10", "jp2_x10"):
        assert np.all(np.diff(series[variant].to_numpy()) < 0), variant
    # pilot set 0: jp2 23.54 against bmp 24.02
    assert np.all(series["jp2_x10"].to_numpy() >= 0.95 * series["bmp"].to_numpy())


def test_determinism(tmp_path):
    scenario = with_overrides(preset_scenario("logos"), n_frames=32)
    trees = []
    for name in ("first", "second"):
        root = tmp_path / name
        cmd_simulate(scenario, root)
        cmd_analyze(root)
        trees.append(root)

    first, second = trees
    for path in sorted(first.rglob("*")):
        if path.suffix in (".bmp", ".csv"):
            assert path.read_bytes() == (second / path.relative_to(first)).read_bytes(), path
