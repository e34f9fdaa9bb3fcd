"""Radon and scale space Radon forward projection.

The discrete Radon transform integrates the bilinear interpolant of the
image along each ray, sampled at unit steps. The SSRT of an image is its
Radon transform convolved along ``rho`` with a Gaussian of scale ``sigma``:

    SSRT_sigma f(rho, theta) = (g_sigma *_rho Rf)(rho, theta)

``ssrt_direct`` evaluates the same quantity the other way round, as a
Gaussian-weighted sum over pixels, and exists to cross-check
``ssrt_forward``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import ndimage

from ssrt_tomo._kernels import ray_march
from ssrt_tomo.geometry import Image, Provenance, Sinogram, SinogramGeometry

KERNEL_TRUNCATION = 4.0
SINGULAR_SIN2THETA = 1e-8


def gaussian_density(t, sigma: float):
    """Continuous Gaussian ``g_sigma(t)`` with unit mass."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    t = np.asarray(t, dtype=float)
    return np.exp(-(t**2) / (2 * sigma**2)) / (math.sqrt(2 * math.pi) * sigma)


@dataclass(frozen=True)
class GaussianKernel:
    """Sampled ``g_sigma`` on the detector grid, truncated at 4 sigma and renormalized.

    ``sigma == 0`` is the Dirac limit: a single unit tap.
    """

    sigma: float
    spacing: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.spacing <= 0:
            raise ValueError("kernel spacing must be positive")

    @property
    def half_width(self) -> int:
        if self.sigma == 0:
            return 0
        return int(math.floor(KERNEL_TRUNCATION * self.sigma / self.spacing + 1e-12))

    @property
    def offsets(self) -> np.ndarray:
        m = self.half_width
        return np.arange(-m, m + 1) * self.spacing

    @property
    def taps(self) -> np.ndarray:
        if self.half_width == 0:
            return np.ones(1)
        t = self.offsets
        w = np.exp(-(t**2) / (2 * self.sigma**2))
        return w / w.sum()

    def __call__(self, offset) -> np.ndarray:
        """Tap weight at detector offsets (multiples of ``spacing``); zero off-support."""
        idx = np.rint(np.asarray(offset, dtype=float) / self.spacing).astype(int) + self.half_width
        taps = self.taps
        inside = (idx >= 0) & (idx < taps.size)
        return np.where(inside, taps[np.clip(idx, 0, taps.size - 1)], 0.0)


def _march_extent(img: Image) -> int:
    # the bilinear interpolant reaches half a pixel beyond the outer centers
    return int(math.ceil(math.hypot(img.width + 1, img.height + 1) / 2.0))


def _check_coverage(img: Image, geom: SinogramGeometry) -> None:
    if not geom.covers(img):
        raise ValueError(
            f"geometry rho span +-{geom.rho_max} does not cover the "
            f"{img.width}x{img.height} image diagonal"
        )


def radon_forward(img: Image, geom: SinogramGeometry) -> Sinogram:
    """Line integrals of the bilinear image interpolant, one per ``(rho_k, theta_i)``."""
    _check_coverage(img, geom)
    out = ray_march(img.data, geom.rho_grid, geom.angles, _march_extent(img))
    return Sinogram(geom, out, Provenance("rt"))


def smooth_sinogram(values: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Convolve every column with ``kernel`` along rho, zero-extended."""
    if kernel.half_width == 0:
        return np.array(values, dtype=float)
    return ndimage.convolve1d(values, kernel.taps, axis=0, mode="constant", cval=0.0)


def ssrt_forward(img: Image, geom: SinogramGeometry, sigma: float) -> Sinogram:
    """SSRT via the Radon transform followed by Gaussian smoothing along rho."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rt = radon_forward(img, geom)
    if sigma == 0:
        return rt
    kernel = GaussianKernel(sigma, geom.detector_spacing)
    return rt.with_values(smooth_sinogram(rt.values, kernel), Provenance("ssrt", sigma))


def ssrt_direct(img: Image, geom: SinogramGeometry, sigma: float) -> Sinogram:
    """SSRT as an explicit per-pixel weighted sum ``p_i = sum_j c_j w_ij``.

    Pixel ``j`` contributes to detector ``k`` through the Gaussian weight of
    each lattice offset its bilinear footprint touches. The weights are
    assembled pixel by pixel, so no Radon sinogram is ever formed. Slow; meant
    for small images.
    """
    if sigma <= 0:
        raise ValueError(f"ssrt_direct needs sigma > 0, got {sigma}")
    _check_coverage(img, geom)
    kernel = GaussianKernel(sigma, geom.detector_spacing)
    taps = kernel.taps
    m = kernel.half_width
    tau = geom.detector_spacing
    n_det = geom.n_detectors
    half = (n_det - 1) // 2
    n_s = _march_extent(img)

    x, y = img.coordinates()
    c = img.data.ravel()
    x, y = x.ravel(), y.ravel()
    n_pix = c.size
    pix = np.arange(n_pix)
    reach = math.sqrt(2.0)
    out = np.empty((n_det, geom.n_angles))

    for i, theta in enumerate(geom.angles):
        ct, st = math.cos(theta), math.sin(theta)
        t = x * ct + y * st
        u = -x * st + y * ct
        k_lo = np.ceil((t - reach) / tau).astype(int)
        s_lo = np.ceil(u - reach).astype(int)
        n_k = int(math.ceil(2 * reach / tau)) + 1
        flat_idx, flat_w = [], []
        for dk in range(n_k):
            k = k_lo + dk
            for ds in range(4):
                s = s_lo + ds
                px = k * tau * ct - s * st
                py = k * tau * st + s * ct
                lam = np.clip(1 - np.abs(px - x), 0, None) * np.clip(1 - np.abs(py - y), 0, None)
                ok = (lam > 0) & (np.abs(k) <= half) & (np.abs(s) <= n_s)
                if not ok.any():
                    continue
                # spread this lattice hit over neighbouring detectors with the Gaussian taps
                for j, tap in enumerate(taps):
                    det = k + (j - m)
                    good = ok & (np.abs(det) <= half)
                    flat_idx.append((det[good] + half) * n_pix + pix[good])
                    flat_w.append(tap * lam[good])
        weights = np.bincount(
            np.concatenate(flat_idx), np.concatenate(flat_w), minlength=n_det * n_pix
        ).reshape(n_det, n_pix)
        out[:, i] = weights @ c
    return Sinogram(geom, out, Provenance("ssrt", sigma))


def unit_square_radon(r, theta: float):
    """Radon transform of the centered unit square (chord length at offset ``r``).

    Computed as the overlap of ``[-|cos|/2, |cos|/2]`` with
    ``[r - |sin|/2, r + |sin|/2]`` divided by ``|cos sin|``; at jumps
    (axis-aligned views, ``|r| = 1/2``) the midpoint value is returned.
    """
    r = np.abs(np.asarray(r, dtype=float))
    a, b = abs(math.cos(theta)), abs(math.sin(theta))
    lo, hi = min(a, b), max(a, b)
    if lo == 0.0:
        edge = hi / 2.0
        return np.where(r < edge, 1.0 / hi, np.where(r == edge, 0.5 / hi, 0.0))
    overlap = np.minimum(a / 2.0, r + b / 2.0) - np.maximum(-a / 2.0, r - b / 2.0)
    return np.clip(overlap, 0.0, None) / (a * b)


def ssrt_pixel_footprint(r, theta: float, sigma: float):
    """Gaussian-weighted unit-pixel footprint ``S(r) = g_sigma(r) R_square(r, theta)``.

    Closed form with absolute values; where ``sin 2 theta`` vanishes the
    product form (its limit) is used instead.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = np.asarray(r, dtype=float)
    s2 = math.sin(2 * theta)
    if abs(s2) < SINGULAR_SIN2THETA:
        return gaussian_density(r, sigma) * unit_square_radon(r, theta)
    sp = math.sin(theta) + math.cos(theta)
    sm = math.sin(theta) - math.cos(theta)
    bracket = np.abs(sp - 2 * r) + np.abs(sp + 2 * r) - np.abs(sm - 2 * r) - np.abs(sm + 2 * r)
    return np.exp(-(r**2) / (2 * sigma**2)) / (2 * math.sqrt(2 * math.pi) * sigma * s2) * bracket


@dataclass(frozen=True)
class Rotate:
    """Resample so that projections at ``theta`` equal the original's at ``theta + theta0``."""

    theta0: float  # radians


@dataclass(frozen=True)
class Scale:
    """Magnify about the center: ``g(z) = f(z / alpha)``."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"scale factor must be positive, got {self.alpha}")


@dataclass(frozen=True)
class Translate:
    """Shift content by ``(bx, by)`` pixels (y up): ``g(z) = f(z - b)``."""

    bx: float
    by: float


Transform = Union[Rotate, Scale, Translate]


def apply_geometric_transform(img: Image, kind: Transform) -> Image:
    """Bilinear resampling of ``img`` under ``kind`` about the image center, zero fill."""
    x, y = img.coordinates()
    if isinstance(kind, Rotate):
        c, s = math.cos(kind.theta0), math.sin(kind.theta0)
        xs, ys = x * c - y * s, x * s + y * c
    elif isinstance(kind, Scale):
        xs, ys = x / kind.alpha, y / kind.alpha
    elif isinstance(kind, Translate):
        xs, ys = x - kind.bx, y - kind.by
    else:
        raise TypeError(f"unsupported transform {kind!r}")
    h, w = img.shape
    coords = np.stack([(h - 1) / 2.0 - ys, xs + (w - 1) / 2.0])
    out = ndimage.map_coordinates(img.data, coords, order=1, mode="grid-constant", cval=0.0)
    return Image(out, img.pixel_spacing)
