"""
Box-Cox image enhancement: one lambda per image, estimated from the luma
histogram, applied to every sample, then min-max rescaled to [0, 1].
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .boxcox import (
    DEFAULT_HI,
    DEFAULT_LO,
    DEFAULT_TOL,
    LambdaEstimate,
    Mode,
    boxcox_transform,
    estimate_lambda,
)
from .errors import DegenerateSample, NoMaximumInRange, NonPositiveGamma
from .image import EPS, ImageBuffer, compute_histogram, full_data_sample, gray, lambda_from_histogram

log = logging.getLogger(__name__)


@dataclass
class EnhancementResult:
    output: ImageBuffer
    lam: LambdaEstimate
    pre_min: float
    pre_max: float
    degenerate: bool = False
    # lambda search failed on non-constant image data; identity lambda used
    fallback: bool = False
    # the likelihood maximizer hit the search boundary and was clamped there
    clamped: bool = False
    timings: Dict[str, float] = field(default_factory=dict)


def normalize_positive(img: ImageBuffer) -> Optional[ImageBuffer]:
    """
    Affinely map all samples onto [EPS, 1] using the global min/max over channels.

    Returns None for a constant image, which has no positive-range mapping.
    """
    lo, hi = img.data.min(), img.data.max()
    if hi == lo:
        return None
    scale = (1.0 - EPS) / (hi - lo)
    data = EPS + (img.data - lo) * scale
    # the top sample must land on 1.0 exactly; min() keeps the map monotone
    np.minimum(data, 1.0, out=data)
    data[img.data == hi] = 1.0
    return ImageBuffer(data, img.source_depth)


def _identity_estimate(lo, hi, mode) -> LambdaEstimate:
    return LambdaEstimate(1.0, float("nan"), lo, hi, mode)


def estimate_image_lambda(
    img: ImageBuffer,
    mode: Mode = Mode.HISTOGRAM_COUNTS,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    tol: float = DEFAULT_TOL,
):
    """Run the lambda search on the image's luma.

    Returns ``(estimate, timings)``; NoMaximumInRange and DegenerateSample
    propagate.
    """
    mode = Mode(mode)
    g = gray(img)
    timings = {}
    t0 = time.perf_counter()
    if mode is Mode.FULL_DATA:
        sample = full_data_sample(g)
        timings["histogram"] = 0.0
        t1 = time.perf_counter()
        est = estimate_lambda(sample, lo, hi, tol, mode=mode)
    else:
        hist = compute_histogram(g)
        t1 = time.perf_counter()
        timings["histogram"] = t1 - t0
        est = lambda_from_histogram(hist, mode, lo, hi, tol)
    timings["lambda"] = time.perf_counter() - t1
    return est, timings


def apply_bci(
    img: ImageBuffer,
    mode: Mode = Mode.HISTOGRAM_COUNTS,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    tol: float = DEFAULT_TOL,
) -> EnhancementResult:
    """
    Enhance an image with a data-driven Box-Cox power transform.

    Pipeline: luma -> histogram -> lambda -> map samples onto [EPS, 1] ->
    Box-Cox at lambda -> global min-max rescale. Every degeneracy resolves to
    an identity result with flags set, so this never raises for a valid image.
    """
    mode = Mode(mode)
    fallback = clamped = False
    try:
        est, timings = estimate_image_lambda(img, mode, lo, hi, tol)
    except NoMaximumInRange as exc:
        est, clamped = exc.estimate, True
        timings = {}
        log.warning("lambda clamped to search boundary %g", est.lam)
    except DegenerateSample:
        est, fallback = _identity_estimate(lo, hi, mode), True
        timings = {}
        log.warning("lambda search degenerate; using lambda=1")
    timings.setdefault("histogram", 0.0)
    timings.setdefault("lambda", 0.0)

    t0 = time.perf_counter()
    norm = normalize_positive(img)
    if norm is None:
        timings["transform"] = time.perf_counter() - t0
        value = float(img.data.flat[0]) if img.data.size else 0.0
        return EnhancementResult(
            output=ImageBuffer(img.data.copy(), img.source_depth),
            lam=_identity_estimate(lo, hi, mode),
            pre_min=value,
            pre_max=value,
            degenerate=True,
            timings=timings,
        )

    y = boxcox_transform(norm.data, est.lam)
    y_min, y_max = float(y.min()), float(y.max())
    if not y_max > y_min:
        # distinct inputs collapsed in floating point; fall back to the stretch
        est, fallback = _identity_estimate(lo, hi, mode), True
        y = boxcox_transform(norm.data, 1.0)
        y_min, y_max = float(y.min()), float(y.max())
    out = (y - y_min) / (y_max - y_min)
    np.clip(out, 0.0, 1.0, out=out)
    timings["transform"] = time.perf_counter() - t0
    return EnhancementResult(
        output=ImageBuffer(out, img.source_depth),
        lam=est,
        pre_min=y_min,
        pre_max=y_max,
        fallback=fallback,
        clamped=clamped,
        timings=timings,
    )


def apply_gamma(img: ImageBuffer, gamma: float) -> ImageBuffer:
    """Fixed power-law baseline, ``s -> s**gamma``."""
    if not gamma > 0:
        raise NonPositiveGamma(f"gamma must be positive, got {gamma}")
    return ImageBuffer(np.power(img.data, gamma), img.source_depth)
