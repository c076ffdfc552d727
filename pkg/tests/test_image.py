import numpy as np
import png
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bci.boxcox import Mode, estimate_lambda
from bci.errors import CorruptFile, DegenerateSample, UnsupportedFormat, WrongChannelCount
from bci.image import (
    EPS,
    Histogram,
    ImageBuffer,
    compute_histogram,
    full_data_sample,
    histogram_sample,
    lambda_from_histogram,
    luma,
    quantize,
    read_image,
    write_image,
)
from bci.synth import gradient_image, lognormal_image
from oracles import brute_force_grid, loglik_vectorized


def rgb(*pixel):
    return ImageBuffer(np.array(pixel, dtype=float).reshape(1, 1, 3))


def test_image_buffer_validation():
    with pytest.raises(ValueError):
        ImageBuffer(np.array([[1.5]]))
    with pytest.raises(WrongChannelCount):
        ImageBuffer(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((2, 2)), source_depth=12)
    img = ImageBuffer(np.zeros((3, 5, 3)))
    assert (img.width, img.height, img.channels) == (5, 3, 3)
    assert img.flat().size == 45


@pytest.mark.parametrize("v", [0.0, 0.25, 0.6, 1.0])
def test_luma_gray_pixel(v):
    assert luma(rgb(v, v, v)).data.item() == pytest.approx(v, rel=1e-12)


def test_luma_primaries():
    assert luma(rgb(1, 0, 0)).data.item() == pytest.approx(0.299, rel=1e-12)
    assert luma(rgb(0, 1, 0)).data.item() == pytest.approx(0.587, rel=1e-12)
    assert luma(rgb(0, 0, 1)).data.item() == pytest.approx(0.114, rel=1e-12)


def test_luma_rejects_gray():
    with pytest.raises(WrongChannelCount):
        luma(ImageBuffer(np.zeros((2, 2))))


@settings(max_examples=50, deadline=None)
@given(
    data=arrays(np.float64, (4, 3, 3), elements=st.floats(0, 1)),
    a=st.floats(0, 1),
)
def test_luma_linear(data, a):
    img = ImageBuffer(data)
    scaled = luma(ImageBuffer(a * data)).data
    assert np.allclose(scaled, a * luma(img).data, rtol=1e-12, atol=1e-15)


def test_histogram_examples():
    h = compute_histogram(ImageBuffer(np.zeros((2, 2))))
    assert h.counts[0] == 4 and h.counts[1:].sum() == 0
    h = compute_histogram(ImageBuffer(np.array([[0.0, 1.0]])))
    assert h.counts[0] == 1 and h.counts[255] == 1 and h.total == 2


def test_histogram_gradient():
    # k/256 for k = 0..256 lands in bin k, except k = 256 which clamps into 255
    h = compute_histogram(gradient_image(257, 64))
    assert h.counts[255] == 128
    assert np.all(h.counts[:255] == 64)
    assert h.total == 257 * 64


def test_histogram_bin_centers():
    h = compute_histogram(gradient_image())
    c = h.bin_centers
    assert c[0] == 0.5 / 256 and c[-1] == 255.5 / 256
    assert np.all(np.diff(c) > 0)


def test_histogram_requires_gray():
    with pytest.raises(WrongChannelCount):
        compute_histogram(ImageBuffer(np.zeros((2, 2, 3))))


def test_histogram_validation():
    with pytest.raises(ValueError):
        Histogram(np.ones(255, dtype=int), 255)
    with pytest.raises(ValueError):
        Histogram(np.ones(256, dtype=int), 7)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 9), st.integers(1, 9)), elements=st.floats(0, 1)))
def test_histogram_total_conservation(data):
    h = compute_histogram(ImageBuffer(data))
    assert h.counts.sum() == h.total == data.size


def test_counts_mode_equal_counts_degenerate():
    with pytest.raises(DegenerateSample):
        lambda_from_histogram(Histogram(np.full(256, 10), 2560), Mode.HISTOGRAM_COUNTS)


def test_counts_mode_drops_empty_bins():
    counts = np.zeros(256, dtype=int)
    counts[[3, 40, 200]] = [5, 9, 30]
    s = histogram_sample(Histogram(counts, 44), Mode.HISTOGRAM_COUNTS)
    assert list(s.values) == [5.0, 9.0, 30.0]


def test_weighted_levels_span_positive_range():
    s = histogram_sample(compute_histogram(gradient_image()), Mode.HISTOGRAM_WEIGHTED)
    assert s.values.min() == pytest.approx(EPS) and s.values.max() == pytest.approx(1.0)
    assert s.weights.sum() == 257 * 64


def test_full_mode_rejected_for_histograms():
    with pytest.raises(ValueError):
        histogram_sample(compute_histogram(gradient_image()), Mode.FULL_DATA)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_weighted_equals_expanded_quantized(seed):
    img = lognormal_image(96, 80, 0.0, 0.7, seed)
    est = lambda_from_histogram(compute_histogram(img), Mode.HISTOGRAM_WEIGHTED)
    full = estimate_lambda(full_data_sample(quantize(img)))
    assert est.lam == pytest.approx(full.lam, abs=1e-3)
    assert est.mode is Mode.HISTOGRAM_WEIGHTED


def test_dark_lognormal_weighted_lambda_near_log():
    img = lognormal_image(256, 256, 0.0, 1.0, 42)
    est = lambda_from_histogram(compute_histogram(img), Mode.HISTOGRAM_WEIGHTED)
    assert -0.4 <= est.lam <= 0.4
    lam_grid, _ = brute_force_grid(loglik_vectorized(full_data_sample(quantize(img)).values))
    assert -0.4 <= lam_grid <= 0.4


# --------------------------------------------------------------------------
# I/O
# --------------------------------------------------------------------------


@pytest.mark.parametrize("ext, channels", [(".png", 1), (".png", 3), (".pgm", 1), (".ppm", 3), (".pnm", 3)])
@pytest.mark.parametrize("depth", [8, 16])
def test_round_trip(tmp_path, ext, depth, channels):
    data = np.random.default_rng(depth + channels).random((7, 5, channels))
    img = ImageBuffer(data, depth)
    path = tmp_path / f"img{ext}"
    write_image(img, path)
    back = read_image(path)
    assert back.data.shape == img.data.shape
    assert back.source_depth == depth
    assert np.max(np.abs(back.data - img.data)) <= 1 / (2 * (2**depth - 1)) + 1e-12
    # second trip is exact
    write_image(back, tmp_path / f"again{ext}")
    assert np.array_equal(read_image(tmp_path / f"again{ext}").data, back.data)


def test_read_pgm_with_comments(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1\n# max\n255\n" + bytes([255, 0]))
    img = read_image(path)
    assert img.data[0, 0, 0] == 1.0 and img.data[0, 1, 0] == 0.0
    assert img.source_depth == 8


def test_read_16bit_png(tmp_path):
    path = tmp_path / "a.png"
    with open(path, "wb") as fh:
        png.Writer(2, 1, greyscale=True, bitdepth=16).write(fh, [[32768, 65535]])
    img = read_image(path)
    assert img.data[0, 0, 0] == 32768 / 65535
    assert img.data[0, 1, 0] == 1.0
    assert img.source_depth == 16


def test_read_16bit_ppm(tmp_path):
    path = tmp_path / "a.ppm"
    path.write_bytes(b"P6 1 1 65535\n" + np.array([0, 32768, 65535], ">u2").tobytes())
    img = read_image(path)
    assert img.data.ravel() == pytest.approx([0, 32768 / 65535, 1.0])


def test_png_alpha_unsupported(tmp_path):
    path = tmp_path / "a.png"
    with open(path, "wb") as fh:
        png.Writer(1, 1, greyscale=True, alpha=True).write(fh, [[10, 255]])
    with pytest.raises(UnsupportedFormat):
        read_image(path)


def test_corrupt_files(tmp_path):
    bad_png = tmp_path / "bad.png"
    bad_png.write_bytes(b"\x89PNG\r\n\x1a\n garbage")
    with pytest.raises(CorruptFile):
        read_image(bad_png)
    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5 4 4 255\n" + bytes(3))
    with pytest.raises(CorruptFile):
        read_image(short)
    header = tmp_path / "header.pgm"
    header.write_bytes(b"P5 x 4 255\n")
    with pytest.raises(CorruptFile):
        read_image(header)


def test_unsupported_formats(tmp_path):
    with pytest.raises(UnsupportedFormat):
        read_image(tmp_path / "a.jpg")
    ascii_pgm = tmp_path / "a.pgm"
    ascii_pgm.write_bytes(b"P2 1 1 255\n7\n")
    with pytest.raises(UnsupportedFormat):
        read_image(ascii_pgm)
    with pytest.raises(UnsupportedFormat):
        write_image(ImageBuffer(np.zeros((1, 1, 3))), tmp_path / "a.pgm")
