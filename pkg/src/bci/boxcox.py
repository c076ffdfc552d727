"""
Box-Cox power transform and maximum-likelihood estimation of lambda.

The transform is the standard one-parameter family

    y = (x**lam - 1) / lam      if |lam| > LN_THRESHOLD
    y = ln(x)                   otherwise

and lambda is chosen to maximize the profile log-likelihood

    L(lam) = -N/2 * ln( sum_j w_j (y_j - ybar)**2 / N ) + (lam - 1) * sum_j w_j ln x_j

with N = sum_j w_j. Unweighted data are the all-ones case, so a histogram
(values = bin levels, weights = counts) gives exactly the likelihood of the
expanded pixel vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DegenerateSample, NoMaximumInRange, NonPositiveInput

LN_THRESHOLD = 0.01

DEFAULT_LO = -5.0
DEFAULT_HI = 5.0
DEFAULT_TOL = 1e-3
DEFAULT_GRID_STEP = 0.05

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Mode(str, Enum):
    """Which data the lambda estimate was computed from."""

    FULL_DATA = "full"
    HISTOGRAM_COUNTS = "counts"
    HISTOGRAM_WEIGHTED = "weighted"


@dataclass(frozen=True)
class PositiveSample:
    """Strictly positive values with optional non-negative multiplicities."""

    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size == 0:
            raise DegenerateSample("empty sample")
        if not np.all(values > 0):
            raise NonPositiveInput("Box-Cox requires strictly positive values")
        object.__setattr__(self, "values", values)
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=np.float64).ravel()
            if weights.shape != values.shape:
                raise ValueError("weights and values must have the same length")
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise ValueError("weights must be finite and non-negative")
            if weights.sum() <= 0:
                raise ValueError("weights must have a positive sum")
            object.__setattr__(self, "weights", weights)

    @property
    def total_weight(self) -> float:
        if self.weights is None:
            return float(self.values.size)
        return float(self.weights.sum())


@dataclass
class LambdaEstimate:
    lam: float
    loglik: float
    search_lo: float
    search_hi: float
    mode: Mode = Mode.FULL_DATA
    profile: Optional[List[Tuple[float, float]]] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "loglik": self.loglik,
            "search_lo": self.search_lo,
            "search_hi": self.search_hi,
            "mode": self.mode.value,
        }


def _as_sample(sample) -> PositiveSample:
    if isinstance(sample, PositiveSample):
        return sample
    return PositiveSample(sample)


def boxcox_transform(x, lam: float):
    """
    Apply the Box-Cox transform to a scalar or array.

    Parameters
    ----------
    x : float or array_like
        Strictly positive input.
    lam : float
        Power parameter. ``|lam| <= LN_THRESHOLD`` selects the log branch.

    Returns
    -------
    float or np.ndarray
        Transformed values, strictly increasing in ``x`` for every ``lam``.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(arr > 0):
        raise NonPositiveInput("Box-Cox requires strictly positive values")
    logx = np.log(arr)
    if abs(lam) <= LN_THRESHOLD:
        out = logx
    else:
        # exp(lam * ln x) keeps x**lam finite for large counts at |lam| near 5
        out = np.expm1(lam * logx) / lam
    if np.ndim(x) == 0:
        return float(out)
    return out


class _LogLikelihood:
    """L(lam) for one sample, with ln(x) and the Jacobian sum cached."""

    def __init__(self, sample: PositiveSample):
        self.logx = np.log(sample.values)
        self.weights = sample.weights
        self.n = sample.total_weight
        if self.weights is None:
            self.sum_log = float(self.logx.sum())
            support = sample.values
        else:
            self.sum_log = float(np.dot(self.weights, self.logx))
            support = sample.values[self.weights > 0]
        if support.size < 2 or support.min() == support.max():
            raise DegenerateSample("sample is constant; Box-Cox likelihood undefined")
        self._buf = np.empty_like(self.logx)

    def __call__(self, lam: float) -> float:
        y = self._buf
        if abs(lam) <= LN_THRESHOLD:
            np.copyto(y, self.logx)
            jac_lam = 0.0
        else:
            np.multiply(self.logx, lam, out=y)
            np.expm1(y, out=y)
            y /= lam
            jac_lam = lam
        if self.weights is None:
            mean = y.sum() / self.n
            y -= mean
            ss = float(np.dot(y, y))
        else:
            mean = float(np.dot(self.weights, y)) / self.n
            y -= mean
            np.multiply(y, y, out=y)
            ss = float(np.dot(self.weights, y))
        var = ss / self.n
        if not (var > 0 and math.isfinite(var)):
            raise DegenerateSample(f"transformed variance is {var!r} at lambda={lam}")
        # the log branch is the lam -> 0 limit, whose Jacobian is prod(1/x)
        return -0.5 * self.n * math.log(var) + (jac_lam - 1.0) * self.sum_log


def boxcox_loglik(sample, lam: float) -> float:
    """Profile log-likelihood of ``lam`` (up to an additive constant)."""
    return _LogLikelihood(_as_sample(sample))(lam)


def _safe(f: Callable[[float], float]) -> Callable[[float], float]:
    def g(lam):
        try:
            v = f(lam)
        except (DegenerateSample, FloatingPointError, OverflowError):
            return -math.inf
        return v if math.isfinite(v) else -math.inf

    return g


def _golden_max(f, a, b, tol, evals):
    # Maximize f on [a, b]; every evaluation is appended to evals.
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals += [(c, fc), (d, fd)]
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
            evals.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
            evals.append((d, fd))
    return a, b


def _parabolic_polish(f, a, b, x, fx, evals, steps=2):
    # Near the optimum L is close to quadratic; a vertex step recovers the
    # precision the tol-wide bracket leaves on the table.
    h = (b - a) / 4.0
    for _ in range(steps):
        if h <= 0:
            break
        lo, hi = max(a, x - h), min(b, x + h)
        flo, fhi = f(lo), f(hi)
        evals += [(lo, flo), (hi, fhi)]
        for p, fp in ((lo, flo), (hi, fhi)):
            if fp > fx:
                x, fx = p, fp
        denom = (x - lo) * (fx - fhi) - (x - hi) * (fx - flo)
        if denom == 0 or not all(map(math.isfinite, (flo, fhi, fx))):
            break
        num = (x - lo) ** 2 * (fx - fhi) - (x - hi) ** 2 * (fx - flo)
        v = x - 0.5 * num / denom
        if not (a <= v <= b):
            break
        fv = f(v)
        evals.append((v, fv))
        if fv > fx:
            x, fx = v, fv
        h /= 10.0
    return x, fx


def estimate_lambda(
    sample,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    tol: float = DEFAULT_TOL,
    *,
    grid_step: float = DEFAULT_GRID_STEP,
    mode: Mode = Mode.FULL_DATA,
) -> LambdaEstimate:
    """
    Maximum-likelihood lambda by coarse grid search plus golden-section refinement.

    The coarse grid guards against local maxima; golden-section then shrinks
    the bracket around the best grid point to width ``tol``.

    Raises
    ------
    DegenerateSample
        Constant data.
    NoMaximumInRange
        The best grid point is ``lo`` or ``hi``; the boundary estimate is
        attached to the exception.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = _safe(_LogLikelihood(_as_sample(sample)))

    n_steps = max(2, int(math.ceil((hi - lo) / grid_step - 1e-9)))
    grid = np.linspace(lo, hi, n_steps + 1)
    profile = [(float(g), f(float(g))) for g in grid]
    values = np.array([v for _, v in profile])
    if not np.any(np.isfinite(values)):
        raise DegenerateSample("likelihood is undefined over the whole search range")
    i = int(np.argmax(values))

    if i == 0 or i == len(grid) - 1:
        est = LambdaEstimate(profile[i][0], profile[i][1], lo, hi, mode, profile)
        raise NoMaximumInRange(
            f"likelihood maximizer at search boundary lambda={est.lam}", est
        )

    evals = [profile[i]]
    a, b = _golden_max(f, float(grid[i - 1]), float(grid[i + 1]), tol, evals)
    x, fx = max(evals, key=lambda e: e[1])
    if b - a > 0 and not (a <= x <= b):
        # best point left the final bracket only if the grid point itself won
        a, b = x - tol / 2.0, x + tol / 2.0
    x, fx = _parabolic_polish(f, a, b, x, fx, evals)
    return LambdaEstimate(float(x), float(fx), float(lo), float(hi), mode, profile)
