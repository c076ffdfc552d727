"""
Image container, luma, 256-bin histograms, histogram-based lambda estimation,
and lossless PNG / PGM / PPM I/O.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
import png

from .boxcox import (
    DEFAULT_HI,
    DEFAULT_LO,
    DEFAULT_TOL,
    LambdaEstimate,
    Mode,
    PositiveSample,
    estimate_lambda,
)
from .errors import CorruptFile, DegenerateSample, UnsupportedFormat, WrongChannelCount

N_BINS = 256
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
# lower end of the strictly positive range data are mapped onto before Box-Cox
EPS = 1.0 / 255.0


@dataclass
class ImageBuffer:
    """Normalized raster, ``data`` shaped (height, width, channels) with samples in [0, 1]."""

    data: np.ndarray
    source_depth: int = 8

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise WrongChannelCount(f"expected 1 or 3 channels, got shape {data.shape}")
        if data.size and not (data.min() >= 0.0 and data.max() <= 1.0):
            raise ValueError("samples must lie in [0, 1]")
        if self.source_depth not in (8, 16):
            raise ValueError("source_depth must be 8 or 16")
        self.data = data

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def flat(self) -> np.ndarray:
        """Row-major sample vector (pixel-interleaved for color)."""
        return self.data.ravel()


@dataclass
class Histogram:
    counts: np.ndarray
    total: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (N_BINS,):
            raise ValueError(f"histogram must have {N_BINS} bins")
        if int(self.counts.sum()) != self.total:
            raise ValueError("counts do not sum to total")

    @property
    def bin_centers(self) -> np.ndarray:
        return (np.arange(N_BINS) + 0.5) / N_BINS


def luma(img: ImageBuffer) -> ImageBuffer:
    if img.channels != 3:
        raise WrongChannelCount(f"luma needs 3 channels, got {img.channels}")
    y = img.data @ LUMA_WEIGHTS
    # weights sum to 1 but rounding can push a white pixel a hair above 1
    return ImageBuffer(np.clip(y, 0.0, 1.0), img.source_depth)


def gray(img: ImageBuffer) -> ImageBuffer:
    """The luma of a color image, or the image itself if already single-channel."""
    return luma(img) if img.channels == 3 else img


def bin_index(samples: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(samples * N_BINS), 0, N_BINS - 1).astype(np.intp)


def compute_histogram(img: ImageBuffer) -> Histogram:
    if img.channels != 1:
        raise WrongChannelCount(f"histogram needs 1 channel, got {img.channels}")
    counts = np.bincount(bin_index(img.flat()), minlength=N_BINS)
    return Histogram(counts, img.n_pixels)


def quantize(img: ImageBuffer) -> ImageBuffer:
    """Replace every sample with the center of its histogram bin."""
    centers = (np.arange(N_BINS) + 0.5) / N_BINS
    return ImageBuffer(centers[bin_index(img.data)], img.source_depth)


def positive_levels(levels: np.ndarray) -> np.ndarray:
    """Affinely map values onto [EPS, 1] using their own min and max."""
    lo, hi = levels.min(), levels.max()
    if hi == lo:
        raise DegenerateSample("constant data cannot be mapped onto a positive range")
    return EPS + (levels - lo) * ((1.0 - EPS) / (hi - lo))


def histogram_sample(hist: Histogram, mode: Mode = Mode.HISTOGRAM_COUNTS) -> PositiveSample:
    """The data a histogram-mode lambda search runs on."""
    occupied = hist.counts > 0
    if mode is Mode.HISTOGRAM_COUNTS:
        return PositiveSample(hist.counts[occupied].astype(np.float64))
    if mode is Mode.HISTOGRAM_WEIGHTED:
        levels = positive_levels(hist.bin_centers[occupied])
        return PositiveSample(levels, hist.counts[occupied].astype(np.float64))
    raise ValueError(f"not a histogram mode: {mode!r}")


def lambda_from_histogram(
    hist: Histogram,
    mode: Mode = Mode.HISTOGRAM_COUNTS,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    tol: float = DEFAULT_TOL,
) -> LambdaEstimate:
    """
    Estimate lambda from at most 256 histogram points instead of every pixel.

    ``HISTOGRAM_COUNTS`` runs the search on the nonzero bin counts themselves.
    ``HISTOGRAM_WEIGHTED`` runs it on the occupied gray levels (mapped onto
    [EPS, 1] like the pixels are before transforming) weighted by their
    counts, which is exactly the full-data likelihood of the quantized image.
    """
    mode = Mode(mode)
    return estimate_lambda(histogram_sample(hist, mode), lo, hi, tol, mode=mode)


def full_data_sample(img: ImageBuffer) -> PositiveSample:
    """Every luma sample, mapped onto [EPS, 1]."""
    return PositiveSample(positive_levels(gray(img).flat()))


# --------------------------------------------------------------------------
# I/O
# --------------------------------------------------------------------------

_PNM_EXT = {".pgm", ".ppm", ".pnm"}


def _to_buffer(raw: np.ndarray, maxval: int, depth: int) -> ImageBuffer:
    return ImageBuffer(raw.astype(np.float64) / maxval, depth)


def _encode(img: ImageBuffer) -> Tuple[np.ndarray, int]:
    maxval = (1 << img.source_depth) - 1
    dtype = np.uint8 if img.source_depth == 8 else np.uint16
    return np.rint(img.data * maxval).astype(dtype), maxval


def _read_png(path: Path) -> ImageBuffer:
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        raw = np.vstack([np.asarray(r, dtype=np.uint32) for r in rows])
    except (png.FormatError, png.ChunkError, png.ProtocolError) as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    except (EOFError, ValueError) as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    if info.get("alpha"):
        raise UnsupportedFormat(f"{path}: alpha channel not supported")
    planes = info["planes"]
    bitdepth = info["bitdepth"]
    raw = raw.reshape(height, width, planes)
    depth = 16 if bitdepth > 8 else 8
    return _to_buffer(raw, (1 << bitdepth) - 1, depth)


def _write_png(img: ImageBuffer, path: Path) -> None:
    raw, _ = _encode(img)
    writer = png.Writer(
        img.width,
        img.height,
        greyscale=img.channels == 1,
        bitdepth=img.source_depth,
    )
    with open(path, "wb") as fh:
        writer.write(fh, raw.reshape(img.height, img.width * img.channels))


def _pnm_tokens(buf: bytes, count: int, pos: int):
    tokens = []
    while len(tokens) < count:
        while pos < len(buf) and (buf[pos : pos + 1].isspace() or buf[pos : pos + 1] == b"#"):
            if buf[pos : pos + 1] == b"#":
                pos = buf.find(b"\n", pos)
                if pos < 0:
                    raise CorruptFile("unterminated comment in PNM header")
            pos += 1
        start = pos
        while pos < len(buf) and buf[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptFile("malformed PNM header")
        tokens.append(int(buf[start:pos]))
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def _read_pnm(path: Path) -> ImageBuffer:
    buf = path.read_bytes()
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"{path}: only binary PGM (P5) / PPM (P6) are supported")
    (width, height, maxval), pos = _pnm_tokens(buf, 3, 2)
    if not 0 < maxval < 65536 or width <= 0 or height <= 0:
        raise CorruptFile(f"{path}: bad PNM dimensions or maxval")
    planes = 1 if magic == b"P5" else 3
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    n = width * height * planes
    if len(buf) - pos < n * dtype.itemsize:
        raise CorruptFile(f"{path}: truncated raster")
    raw = np.frombuffer(buf, dtype=dtype, count=n, offset=pos).reshape(height, width, planes)
    if raw.max(initial=0) > maxval:
        raise CorruptFile(f"{path}: sample exceeds maxval")
    return _to_buffer(raw, maxval, 8 if maxval < 256 else 16)


def _write_pnm(img: ImageBuffer, path: Path) -> None:
    raw, maxval = _encode(img)
    magic = b"P5" if img.channels == 1 else b"P6"
    if path.suffix.lower() == ".pgm" and img.channels != 1:
        raise UnsupportedFormat(f"{path}: PGM holds single-channel images only")
    if path.suffix.lower() == ".ppm" and img.channels != 3:
        raise UnsupportedFormat(f"{path}: PPM holds 3-channel images only")
    if img.source_depth == 16:
        raw = raw.astype(">u2")
    header = b"%s\n%d %d\n%d\n" % (magic, img.width, img.height, maxval)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(raw.tobytes())


def read_image(path) -> ImageBuffer:
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".png":
        return _read_png(path)
    if ext in _PNM_EXT:
        return _read_pnm(path)
    raise UnsupportedFormat(f"{path}: unsupported extension {ext!r}")


def write_image(img: ImageBuffer, path) -> None:
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".png":
        _write_png(img, path)
    elif ext in _PNM_EXT:
        _write_pnm(img, path)
    else:
        raise UnsupportedFormat(f"{path}: unsupported extension {ext!r}")
