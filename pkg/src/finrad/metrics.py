"""Image-quality metrics: RMSE, PSNR, and mean SSIM.

PSNR is computed *through* RMSE as 20·log10(peak/rmse) so that the pair
satisfies that identity bit-exactly, not merely to rounding.  Identical
images report ``math.inf``.  Metrics are defined on real images; take
magnitudes before calling for complex reconstructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

__all__ = ["MetricsReport", "rmse", "psnr", "ssim", "metrics_report"]


@dataclass(frozen=True)
class MetricsReport:
    psnr: float  # dB; math.inf when images identical
    ssim: float
    rmse: float


def _pair(reference: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def rmse(reference: np.ndarray, test: np.ndarray) -> float:
    """Root of the mean squared difference."""
    a, b = _pair(reference, test)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(reference: np.ndarray, test: np.ndarray, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB against a stated peak intensity."""
    err = rmse(reference, test)
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(peak / err)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2
    g = np.exp(-((np.arange(size) - half) ** 2) / (2 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(reference: np.ndarray, test: np.ndarray, peak: float = 255.0) -> float:
    """Mean local SSIM, 11×11 Gaussian window σ=1.5, C1=(0.01·peak)²,
    C2=(0.03·peak)², statistics over fully interior (valid) windows.
    """
    a, b = _pair(reference, test)
    if min(a.shape) < 11:
        raise ValueError("image smaller than the 11×11 SSIM window")
    w = _gaussian_window()
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2

    def filt(x):
        return fftconvolve(x, w, mode="valid")

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a**2
    var_b = filt(b * b) - mu_b**2
    cov = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def metrics_report(reference: np.ndarray, test: np.ndarray, peak: float = 255.0) -> MetricsReport:
    return MetricsReport(psnr(reference, test, peak), ssim(reference, test, peak), rmse(reference, test))
