"""Test images and prime-size padding.

The head phantom is the classic ten-ellipse arrangement with the off-axis
features placed as exact mirror pairs, so the rasterized image satisfies
I[x, y] = I[N-1-x, y] identically — convenient for transform symmetry
checks, and visually indistinguishable from the usual variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import is_prime, next_prime

__all__ = ["shepp_logan", "PadResult", "pad_to_prime"]

# (value, x0, y0, semi_x, semi_y, angle_deg); x is the first array index.
# Off-axis entries come in mirrored pairs (x0, angle) <-> (-x0, -angle).
_ELLIPSES = (
    (1.00, 0.0, 0.0, 0.69, 0.92, 0.0),
    (-0.80, 0.0, -0.0184, 0.6624, 0.874, 0.0),
    (-0.20, 0.22, 0.0, 0.14, 0.36, -18.0),
    (-0.20, -0.22, 0.0, 0.14, 0.36, 18.0),
    (0.10, 0.0, 0.35, 0.21, 0.25, 0.0),
    (0.10, 0.0, 0.10, 0.046, 0.046, 0.0),
    (0.10, 0.0, -0.10, 0.046, 0.046, 0.0),
    (0.10, -0.07, -0.605, 0.035, 0.023, 0.0),
    (0.10, 0.0, -0.605, 0.023, 0.023, 0.0),
    (0.10, 0.07, -0.605, 0.035, 0.023, 0.0),
)


def shepp_logan(n: int) -> np.ndarray:
    """Head phantom rasterized at n x n, intensities in [0, 255].

    Pixel centres sit on the exactly sign-symmetric lattice
    (2k - (n-1)) / (n-1), k = 0..n-1, over [-1, 1]; no anti-aliasing.
    """
    if n < 16:
        raise ValueError(f"phantom size must be >= 16, got {n}")
    c = (2.0 * np.arange(n) - (n - 1)) / (n - 1)
    x, y = np.meshgrid(c, c, indexing="ij")
    img = np.zeros((n, n))
    for value, x0, y0, a, b, angle in _ELLIPSES:
        rad = math.radians(angle)
        ct, st = math.cos(rad), math.sin(rad)
        xr = (x - x0) * ct + (y - y0) * st
        yr = (y - y0) * ct - (x - x0) * st
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    # overlapping values cancel exactly in exact arithmetic; clip the
    # 1e-16-scale float residue so the range is genuinely [0, 255]
    return np.clip(img * 255.0, 0.0, 255.0)


@dataclass(frozen=True)
class PadResult:
    """Zero-padded image plus the bookkeeping to undo it."""

    image: np.ndarray
    offset: int
    original_n: int

    def crop(self, arr: np.ndarray) -> np.ndarray:
        o, n = self.offset, self.original_n
        return arr[o : o + n, o : o + n]


def pad_to_prime(image: np.ndarray) -> PadResult:
    """Zero-pad a square image to the next prime size.

    Padding is split evenly, with the odd leftover unit going to the
    trailing edge; prime inputs pass through unchanged.
    """
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"image must be square, got shape {arr.shape}")
    n = arr.shape[0]
    if is_prime(n):
        return PadResult(arr, 0, n)
    p = next_prime(n)
    lead = (p - n) // 2
    out = np.zeros((p, p), dtype=arr.dtype)
    out[lead : lead + n, lead : lead + n] = arr
    return PadResult(out, lead, n)
