import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ilssumm.features import (
    FrameError,
    FrameImage,
    HistogramConfig,
    build_instance,
    compute_histogram,
    parse_ppm,
    read_frame,
    write_ppm,
)
from ilssumm.instance import InstanceError


def frame(rgb):
    return FrameImage.from_array(np.array(rgb, dtype=np.uint8))


def test_black_frame_normalized():
    hist = compute_histogram(frame(np.zeros((2, 2, 3))), HistogramConfig(32, True))
    expected = np.zeros(96)
    expected[[0, 32, 64]] = 1.0
    assert hist.shape == (96,)
    assert np.array_equal(hist, expected)


def test_white_pixel_raw_counts():
    hist = compute_histogram(frame([[[255, 255, 255]]]), HistogramConfig(32, False))
    expected = np.zeros(96)
    expected[[31, 63, 95]] = 1.0
    assert np.array_equal(hist, expected)


def test_value_eight_lands_in_bin_one():
    hist = compute_histogram(frame([[[0, 0, 0], [8, 0, 0]]]), HistogramConfig(32, True))
    expected = np.zeros(96)
    expected[[0, 1]] = 0.5
    expected[[32, 64]] = 1.0
    assert np.array_equal(hist, expected)


@pytest.mark.parametrize("bins", [1, 8, 16, 32, 64, 256])
def test_bin_boundaries(bins):
    values = np.arange(256, dtype=np.uint8)
    pixels = np.stack([values, values, values], axis=1)
    hist = compute_histogram(FrameImage(256, 1, pixels), HistogramConfig(bins, False))
    # 256 divisible by bins: each bin receives exactly 256 / bins values
    assert np.array_equal(hist, np.full(3 * bins, 256 // bins, dtype=float))


def test_empty_frame_rejected():
    with pytest.raises(FrameError):
        compute_histogram(FrameImage(0, 0, np.zeros((0, 3), dtype=np.uint8)))


@pytest.mark.parametrize("bins", [0, 257])
def test_bad_bin_count(bins):
    with pytest.raises(ValueError):
        HistogramConfig(bins)


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12), st.just(3))))
def test_normalized_channels_sum_to_one(rgb):
    hist = compute_histogram(FrameImage.from_array(rgb))
    assert np.all(hist >= 0)
    for c in range(3):
        assert abs(hist[32 * c : 32 * (c + 1)].sum() - 1.0) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 30), st.just(3))), st.randoms())
def test_pixel_order_invariance(pixels, rnd):
    perm = list(range(len(pixels)))
    rnd.shuffle(perm)
    a = compute_histogram(FrameImage(len(pixels), 1, pixels))
    b = compute_histogram(FrameImage(1, len(pixels), pixels[perm]))
    assert np.array_equal(a, b)


def test_ppm_round_trip(tmp_path):
    rgb = np.random.default_rng(3).integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
    write_ppm(FrameImage.from_array(rgb), tmp_path / "f.ppm")
    back = read_frame(tmp_path / "f.ppm")
    assert (back.width, back.height) == (7, 5)
    assert np.array_equal(back.pixels, rgb.reshape(-1, 3))


def test_plain_ppm_with_comments():
    data = b"P3\n# a comment\n2 1\n255\n0 0 0  8 0 255\n"
    img = parse_ppm(data)
    assert img.pixels.tolist() == [[0, 0, 0], [8, 0, 255]]


@pytest.mark.parametrize(
    "data", [b"P5\n1 1\n255\n\x00", b"P6\n2 2\n255\n\x00\x00", b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00"]
)
def test_malformed_ppm(data):
    with pytest.raises(FrameError):
        parse_ppm(data)


def test_png_through_pillow(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    rgb = np.array([[[255, 255, 255]]], dtype=np.uint8)
    Image.fromarray(rgb).save(tmp_path / "w.png")
    hist = compute_histogram(read_frame(tmp_path / "w.png"), HistogramConfig(32, False))
    assert hist[[31, 63, 95]].tolist() == [1.0, 1.0, 1.0]


def make_frames(tmp_path, durations=(2, 3, 2)):
    rng = np.random.default_rng(0)
    lines = ["frame,duration"]
    for k, t in enumerate(durations):
        rgb = rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8)
        write_ppm(FrameImage.from_array(rgb), tmp_path / f"shot{k}.ppm")
        lines.append(f"shot{k}.ppm,{t}")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def test_build_instance(tmp_path):
    manifest = make_frames(tmp_path)
    inst = build_instance(tmp_path, manifest, 5.0)
    assert (inst.n, inst.dim) == (3, 96)
    assert [s.id for s in inst.shots] == ["shot0", "shot1", "shot2"]
    assert [s.duration_s for s in inst.shots] == [2.0, 3.0, 2.0]
    assert build_instance(tmp_path, manifest, 5.0, HistogramConfig(16)).dim == 48


def test_build_instance_missing_frame(tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("nope.ppm,2.0\n")
    with pytest.raises(FrameError, match="missing"):
        build_instance(tmp_path, manifest, 5.0)


def test_build_instance_empty_manifest(tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("")
    with pytest.raises(InstanceError):
        build_instance(tmp_path, manifest, 5.0)
