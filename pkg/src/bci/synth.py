"""
Deterministic synthetic test images.

Random fixtures draw raw 64-bit words from PCG64 (O'Neill's permuted
congruential generator, 128-bit state, XSL-RR output), whose output stream for
a given seed is fixed by the algorithm. Words become uniforms with 53-bit
resolution and then standard normals via the Box-Muller transform, both done
here rather than through numpy's distribution samplers, whose algorithms are
allowed to change between releases.
"""

from __future__ import annotations

import numpy as np

from .image import ImageBuffer

_TWO_M53 = 2.0**-53


def standard_normal(n: int, seed: int) -> np.ndarray:
    """``n`` standard normal draws from PCG64(seed) via Box-Muller."""
    pairs = (n + 1) // 2
    raw = np.random.PCG64(seed).random_raw(2 * pairs)
    top = (raw >> np.uint64(11)).astype(np.float64)
    u1 = (top[0::2] + 1.0) * _TWO_M53  # (0, 1], safe for log
    u2 = top[1::2] * _TWO_M53  # [0, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]


def gradient_image(n_points: int = 257, rows: int = 64) -> ImageBuffer:
    """Horizontal ramp: pixel (row, col) = col / (n_points - 1)."""
    if n_points < 2 or rows < 1:
        raise ValueError("need n_points >= 2 and rows >= 1")
    ramp = np.arange(n_points) / (n_points - 1)
    return ImageBuffer(np.tile(ramp, (rows, 1)))


def lognormal_image(
    width: int, height: int, mu: float = 0.0, sigma: float = 1.0, seed: int = 0
) -> ImageBuffer:
    """
    Single-channel image of i.i.d. ``exp(mu + sigma * Z)`` samples, min-max
    mapped onto [0, 1]. Right-skewed and mostly dark.
    """
    if width < 1 or height < 1 or not sigma > 0:
        raise ValueError("need width, height >= 1 and sigma > 0")
    x = np.exp(mu + sigma * standard_normal(width * height, seed))
    lo, hi = x.min(), x.max()
    data = (x - lo) / (hi - lo) if hi > lo else np.zeros_like(x)
    np.clip(data, 0.0, 1.0, out=data)
    return ImageBuffer(data.reshape(height, width))
