"""Wall-clock comparison of full-data and histogram lambda estimation."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, fields
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from .boxcox import DEFAULT_HI, DEFAULT_LO, DEFAULT_TOL, Mode, estimate_lambda
from .errors import NoMaximumInRange
from .image import ImageBuffer, compute_histogram, full_data_sample, lambda_from_histogram
from .synth import lognormal_image

DEFAULT_SIZES = (256, 512, 1024, 2048)


@dataclass
class BenchRow:
    size: int
    method: str
    median_s: float
    prep_median_s: float
    speedup: float
    lam: float


def bench_fixture(size: int, seed: int) -> ImageBuffer:
    """Square right-skewed image quantized to 8 bits, like a real dark photo."""
    img = lognormal_image(size, size, mu=0.0, sigma=1.0, seed=seed)
    return ImageBuffer(np.rint(img.data * 255.0) / 255.0, 8)


def _median_time(fn: Callable[[], object], repeats: int) -> Tuple[float, object]:
    result = fn()  # warm-up, also the value reported
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def _lam(fn):
    def run():
        try:
            return fn().lam
        except NoMaximumInRange as exc:
            return exc.estimate.lam

    return run


def bench_size(size, seed=0, repeats=5, lo=DEFAULT_LO, hi=DEFAULT_HI, tol=DEFAULT_TOL) -> List[BenchRow]:
    img = bench_fixture(size, seed)
    prep_full, sample = _median_time(lambda: full_data_sample(img), repeats)
    full_s, full_lam = _median_time(_lam(lambda: estimate_lambda(sample, lo, hi, tol)), repeats)
    rows = [BenchRow(size, Mode.FULL_DATA.value, full_s, prep_full, 1.0, full_lam)]

    prep_hist, hist = _median_time(lambda: compute_histogram(img), repeats)
    for mode in (Mode.HISTOGRAM_COUNTS, Mode.HISTOGRAM_WEIGHTED):
        t, lam = _median_time(_lam(lambda: lambda_from_histogram(hist, mode, lo, hi, tol)), repeats)
        rows.append(BenchRow(size, mode.value, t, prep_hist, full_s / t, lam))
    return rows


def run_bench(
    sizes: Sequence[int] = DEFAULT_SIZES,
    repeats: int = 5,
    seed: int = 0,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    tol: float = DEFAULT_TOL,
) -> List[BenchRow]:
    rows = []
    for size in sizes:
        rows.extend(bench_size(size, seed, repeats, lo, hi, tol))
    return rows


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    names = [f.name for f in fields(BenchRow)]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow([getattr(r, n) for n in names])
    return buf.getvalue()
