"""
Distribution-shape and reference metrics for evaluating enhancement results.

Skewness and kurtosis use the population moment estimators (kurtosis is
non-excess, so a normal sample gives 3); the ``_adjusted`` variants apply the
usual small-sample bias corrections.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import AllZero, DegenerateSample, ShapeMismatch, TooFewSamples
from .image import ImageBuffer, gray

PSNR_IDENTICAL = math.inf


def _vec(v) -> np.ndarray:
    if isinstance(v, ImageBuffer):
        v = v.data
    return np.asarray(v, dtype=np.float64).ravel()


def _central_moments(a: np.ndarray):
    # exact test first: the mean of identical values can round away from them
    if a.min() == a.max():
        raise DegenerateSample("zero variance")
    d = a - a.mean()
    d2 = d * d
    m2 = d2.mean()
    if not m2 > 0:
        raise DegenerateSample("zero variance")
    return m2, (d2 * d).mean(), (d2 * d2).mean()


def _need(a: np.ndarray, n: int):
    if a.size < n:
        raise TooFewSamples(f"need at least {n} values, got {a.size}")


def skewness(v) -> float:
    a = _vec(v)
    _need(a, 3)
    m2, m3, _ = _central_moments(a)
    return float(m3 / m2**1.5)


def kurtosis(v) -> float:
    a = _vec(v)
    _need(a, 4)
    m2, _, m4 = _central_moments(a)
    return float(m4 / (m2 * m2))


def skewness_adjusted(v) -> float:
    n = _vec(v).size
    g1 = skewness(v)
    return g1 * math.sqrt(n * (n - 1)) / (n - 2)


def kurtosis_adjusted(v) -> float:
    n = _vec(v).size
    g2 = kurtosis(v)
    return 3.0 + (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * (g2 - 3.0) + 6.0)


def rayleigh_fit(v) -> float:
    """Maximum-likelihood Rayleigh scale, ``sqrt(sum(x**2) / (2n))``."""
    a = _vec(v)
    if a.size == 0:
        raise TooFewSamples("need at least one value")
    if np.any(a < 0):
        raise ValueError("Rayleigh data must be non-negative")
    ss = float(np.dot(a, a))
    if ss == 0:
        raise AllZero("all values are zero")
    return math.sqrt(ss / (2 * a.size))


def rayleigh_quantiles(n: int, sigma: float) -> np.ndarray:
    """Theoretical quantiles at Hazen plotting positions (i - 0.5)/n."""
    p = (np.arange(1, n + 1) - 0.5) / n
    return sigma * np.sqrt(-2.0 * np.log1p(-p))


def _corr(x: np.ndarray, y: np.ndarray) -> float:
    if x.min() == x.max() or y.min() == y.max():
        raise DegenerateSample("correlation undefined for constant input")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(np.dot(dx, dx)), float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        raise DegenerateSample("correlation undefined for constant input")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def qq_rayleigh(v) -> Tuple[float, np.ndarray]:
    """
    Rayleigh QQ goodness of fit.

    Returns
    -------
    qq_corr : float
        Pearson correlation between sorted data and Rayleigh quantiles.
    points : np.ndarray
        Shape (n, 2); columns are (empirical, theoretical) quantiles.
    """
    a = np.sort(_vec(v))
    _need(a, 3)
    if a[0] == a[-1]:
        raise DegenerateSample("constant data")
    sigma = rayleigh_fit(a)
    theo = rayleigh_quantiles(a.size, sigma)
    return _corr(a, theo), np.column_stack([a, theo])


def _pair(a, b):
    if isinstance(a, ImageBuffer) and isinstance(b, ImageBuffer):
        if a.data.shape != b.data.shape:
            raise ShapeMismatch(f"{a.data.shape} vs {b.data.shape}")
    x, y = _vec(a), _vec(b)
    if x.shape != y.shape:
        raise ShapeMismatch(f"{x.shape} vs {y.shape}")
    return x, y


def psnr(a, b) -> float:
    """PSNR in dB for data on the [0, 1] scale; identical inputs give +inf."""
    x, y = _pair(a, b)
    d = x - y
    mse = float(np.dot(d, d)) / d.size
    if mse == 0:
        return PSNR_IDENTICAL
    return 10.0 * math.log10(1.0 / mse)


def pearson(a, b) -> float:
    x, y = _pair(a, b)
    return _corr(x, y)


@dataclass
class QualityReport:
    """Shape metrics of an image's luma, plus reference metrics when given.

    Fields are None where the metric is undefined (e.g. a constant image).
    """

    skew: Optional[float]
    skew_adj: Optional[float]
    kurt: Optional[float]
    kurt_adj: Optional[float]
    rayleigh_sigma: Optional[float]
    qq_corr: Optional[float]
    mean: float
    psnr_db: Optional[float] = None
    pearson: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _try(fn, *args):
    try:
        return fn(*args)
    except (DegenerateSample, TooFewSamples, AllZero):
        return None


def quality_report(img: ImageBuffer, reference: Optional[ImageBuffer] = None) -> QualityReport:
    v = gray(img).flat()
    qq = _try(qq_rayleigh, v)
    report = QualityReport(
        skew=_try(skewness, v),
        skew_adj=_try(skewness_adjusted, v),
        kurt=_try(kurtosis, v),
        kurt_adj=_try(kurtosis_adjusted, v),
        rayleigh_sigma=_try(rayleigh_fit, v),
        qq_corr=None if qq is None else qq[0],
        mean=float(img.data.mean()),
    )
    if reference is not None:
        report.psnr_db = psnr(img, reference)
        report.pearson = _try(pearson, img, reference)
    return report
