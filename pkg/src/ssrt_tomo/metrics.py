"""Image quality measures: MSE/PSNR on a 255 peak, SSIM, and profile errors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ssrt_tomo.geometry import Image

PEAK = 255.0
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _pair(reference: Image, test: Image) -> tuple[np.ndarray, np.ndarray]:
    if reference.shape != test.shape:
        raise ValueError(f"image shapes differ: {reference.shape} vs {test.shape}")
    return reference.data, test.data


def mse(reference: Image, test: Image) -> float:
    a, b = _pair(reference, test)
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(value: float) -> float:
    if value == 0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 / value)


def psnr(reference: Image, test: Image) -> float:
    """``10 log10(255^2 / MSE)``; identical images give ``inf``."""
    return psnr_from_mse(mse(reference, test))


def _gaussian_window() -> np.ndarray:
    half = SSIM_WINDOW // 2
    t = np.arange(-half, half + 1)
    w = np.exp(-(t**2) / (2 * SSIM_SIGMA**2))
    return w / w.sum()


def _local_mean(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(a, w, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, w, axis=1, mode="reflect")
    half = w.size // 2
    # keep only positions where the window fits (MATLAB 'valid')
    return out[half:-half, half:-half]


def ssim_map(reference: Image, test: Image) -> np.ndarray:
    a, b = _pair(reference, test)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    w = _gaussian_window()
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    mu_a = _local_mean(a, w)
    mu_b = _local_mean(b, w)
    var_a = _local_mean(a * a, w) - mu_a**2
    var_b = _local_mean(b * b, w) - mu_b**2
    cov = _local_mean(a * b, w) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return num / den


def ssim(reference: Image, test: Image) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, L=255."""
    if reference.shape == test.shape and np.array_equal(reference.data, test.data):
        return 1.0
    return float(ssim_map(reference, test).mean())


def profile_mae(reference: Image, test: Image, row: int, x_range: tuple[int, int]) -> float:
    """Mean absolute difference along ``row`` for columns ``x_range[0]..x_range[1]`` inclusive."""
    a, b = _pair(reference, test)
    x0, x1 = x_range
    h, w = a.shape
    if not (0 <= row < h and 0 <= x0 <= x1 < w):
        raise ValueError(f"profile row {row}, columns {x0}..{x1} outside a {w}x{h} image")
    return float(np.mean(np.abs(a[row, x0 : x1 + 1] - b[row, x0 : x1 + 1])))


def format_metric(value: float) -> str:
    """CSV-safe rendering; infinite PSNR is written as ``inf``."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6f}"


@dataclass(frozen=True)
class QualityReport:
    mse: float
    psnr: float
    ssim: float
    runtime_seconds: float = 0.0

    @classmethod
    def compare(cls, reference: Image, test: Image, runtime_seconds: float = 0.0) -> "QualityReport":
        m = mse(reference, test)
        return cls(m, psnr_from_mse(m), ssim(reference, test), runtime_seconds)

    def as_dict(self) -> dict:
        return {
            "mse": format_metric(self.mse),
            "psnr": format_metric(self.psnr),
            "ssim": format_metric(self.ssim),
            "runtime_seconds": format_metric(self.runtime_seconds),
        }
