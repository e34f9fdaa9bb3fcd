"""Filtered backprojection from Radon and SSRT sinograms.

Three pipelines are provided:

* ``radon_fbp``: ram-lak filtering of an RT sinogram, then backprojection.
* ``ssrt_fbp``: per view, DFT, Wiener deconvolution of the Gaussian, windowed
  ramp, inverse DFT, then backprojection.
* ``deconv_rad_fbp``: regularized 1-D deconvolution of the SSRT sinogram back
  to an RT estimate, followed by ``radon_fbp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ssrt_tomo._kernels import backproject_sum
from ssrt_tomo.filters import (
    FilterSpec,
    apply_response,
    frequency_grid,
    ramp_response,
    wiener_response,
)
from ssrt_tomo.geometry import Image, Provenance, Sinogram, SinogramGeometry
from ssrt_tomo.projection import GaussianKernel, radon_forward

METHODS = ("radon_fbp", "ssrt_fbp", "deconv_rad_fbp")


@dataclass(frozen=True)
class ReconConfig:
    """Reconstruction settings; the filter spec is resolved against the sinogram geometry."""

    method: str = "ssrt_fbp"
    output_size: int = 256
    sigma: float = 0.0
    wiener_k: float = 0.02
    deconv_gamma: float = 1e-3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.output_size < 1:
            raise ValueError("output_size must be positive")
        if self.deconv_gamma < 0:
            raise ValueError("deconv_gamma must be >= 0")

    def filter_spec(self, geom: SinogramGeometry) -> FilterSpec:
        return FilterSpec.for_geometry(geom, self.sigma, self.wiener_k)


def _check_size(geom: SinogramGeometry, size: int) -> None:
    half_diag = math.sqrt(2) * size / 2.0
    if half_diag > geom.rho_max + 1e-9:
        raise ValueError(f"output size {size} exceeds the span of the sinogram geometry")


def backproject(filtered: Sinogram, size: int) -> Image:
    """Smear filtered projections back over a ``size x size`` grid.

    ``f(x, y) = dtheta * sum_i Q_i(x cos(theta_i) + y sin(theta_i))`` with
    linear interpolation in rho; offsets outside the rho grid contribute 0.
    """
    geom = filtered.geometry
    values = np.ascontiguousarray(filtered.values)
    out = backproject_sum(values, float(geom.rho_grid[0]), geom.detector_spacing, geom.angles, size)
    out *= geom.delta_theta
    return Image(out)


def _ensure_rt(sino: Sinogram) -> None:
    if not sino.provenance.is_rt:
        raise ValueError(
            f"Radon FBP expects an RT sinogram, got {sino.provenance.label()}; "
            "use ssrt_fbp or deconv_rad_fbp"
        )


def reconstruct_radon_fbp(sino: Sinogram, cfg: ReconConfig) -> Image:
    _ensure_rt(sino)
    _check_size(sino.geometry, cfg.output_size)
    spec = FilterSpec.for_geometry(sino.geometry)
    filtered = apply_response(sino.values, ramp_response(spec))
    return backproject(sino.with_values(filtered), cfg.output_size)


def reconstruct_ssrt_fbp(sino: Sinogram, cfg: ReconConfig) -> Image:
    if not math.isclose(cfg.sigma, sino.sigma, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError(f"filter sigma {cfg.sigma} does not match sinogram sigma {sino.sigma}")
    _check_size(sino.geometry, cfg.output_size)
    spec = cfg.filter_spec(sino.geometry)
    omega = frequency_grid(spec)
    # step 1: spectrum of every SSRT projection
    spectrum = np.fft.fft(sino.values, n=spec.padded_len, axis=0)
    # step 2: Wiener estimate of the RT spectrum (only inside the band, see step 3)
    band = np.abs(omega) < spec.omega_max
    spectrum *= np.where(band, wiener_response(np.where(band, omega, 0.0), spec), 0.0)[:, None]
    # step 3: windowed ramp
    spectrum *= np.where(band, np.abs(omega), 0.0)[:, None]
    # step 4: back to rho
    filtered = np.fft.ifft(spectrum, axis=0)[: sino.geometry.n_detectors].real
    # step 5
    return backproject(sino.with_values(filtered), cfg.output_size)


def kernel_transfer(sigma: float, spec: FilterSpec) -> np.ndarray:
    """DFT of the discrete Gaussian blur kernel placed circularly about index 0."""
    kernel = GaussianKernel(sigma, spec.tau)
    h = np.zeros(spec.padded_len)
    idx = np.arange(-kernel.half_width, kernel.half_width + 1) % spec.padded_len
    h[idx] = kernel.taps
    # symmetric taps: the transform is real up to round-off
    return np.fft.fft(h).real


def laplacian_power(spec: FilterSpec) -> np.ndarray:
    """``|L(w)|^2`` of the 1-D Laplacian stencil (1, -2, 1) on the DFT grid."""
    return 16.0 * np.sin(np.pi * np.arange(spec.padded_len) / spec.padded_len) ** 4


def deconvolve_sinogram(sino: Sinogram, gamma: float) -> Sinogram:
    """Constrained least-squares deconvolution of the Gaussian blur along rho.

    ``R(w) = conj(G) P(w) / (|G|^2 + gamma |L|^2)`` per view, with ``G`` the
    transfer function of the blur kernel that produced the sinogram and ``L``
    the 1-D Laplacian. ``gamma = 0`` is the plain inverse filter.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    sigma = sino.sigma
    spec = FilterSpec.for_geometry(sino.geometry)
    g = kernel_transfer(sigma, spec)
    response = g / (g * g + gamma * laplacian_power(spec))
    values = apply_response(sino.values, response)
    kind = "noisy" if sino.provenance.kind == "noisy" else "rt"
    return sino.with_values(values, Provenance(kind, 0.0, sino.provenance.noise))


def reconstruct_deconv_rad_fbp(sino: Sinogram, cfg: ReconConfig) -> Image:
    if sino.sigma <= 0:
        raise ValueError("Deconv-Rad-FBP needs an SSRT sinogram with sigma > 0")
    if not math.isclose(cfg.sigma, sino.sigma, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError(f"config sigma {cfg.sigma} does not match sinogram sigma {sino.sigma}")
    rt = deconvolve_sinogram(sino, cfg.deconv_gamma)
    return reconstruct_radon_fbp(rt, cfg)


def reconstruct(sino: Sinogram, cfg: ReconConfig) -> Image:
    """Dispatch on ``cfg.method``."""
    if cfg.method == "radon_fbp":
        return reconstruct_radon_fbp(sino, cfg)
    if cfg.method == "ssrt_fbp":
        return reconstruct_ssrt_fbp(sino, cfg)
    return reconstruct_deconv_rad_fbp(sino, cfg)


def fst_residual(img: Image, geom: SinogramGeometry, theta: float) -> float:
    """Relative L2 gap between a projection spectrum and the central image slice at ``theta``.

    The image is zero padded to twice its size before the 2-D DFT; the slice is
    read off the (origin-corrected) spectrum by bilinear interpolation.
    """
    n = img.width
    if img.height != n:
        raise ValueError("fst_residual needs a square image")
    if geom.detector_spacing != 1.0:
        raise ValueError("fst_residual assumes a unit detector pitch")
    if not np.any(img.data):
        return 0.0
    m = 2 * n
    proj = radon_forward(img, geom.with_angles([theta])).values[:, 0]
    if proj.size > m:
        raise ValueError("projection longer than the padded image grid")

    # 1-D spectrum at w_j = j / m, phase-corrected for rho_0 < 0
    freqs = np.fft.fftfreq(m)
    p_hat = np.fft.fft(proj, n=m) * np.exp(-2j * np.pi * freqs * geom.rho_grid[0])

    # 2-D spectrum F(u, v) with u along x and v along y (y up)
    padded = np.zeros((m, m))
    padded[:n, :n] = img.data
    c0 = (n - 1) / 2.0
    spec2 = np.fft.fft2(padded)
    fr, fc = np.meshgrid(freqs, freqs, indexing="ij")
    # row frequency fr corresponds to v = -fr; undo the corner origin
    spec2 = spec2 * np.exp(2j * np.pi * (fc * c0 + fr * c0))
    spec2 = np.fft.fftshift(spec2)
    axis = np.fft.fftshift(freqs)

    usable = np.abs(freqs) <= (n - 1) / m
    w = freqs[usable]
    u, v = w * math.cos(theta), w * math.sin(theta)
    col = np.interp(u, axis, np.arange(m))
    row = np.interp(-v, axis, np.arange(m))
    coords = np.stack([row, col])
    slice_re = ndimage.map_coordinates(spec2.real, coords, order=1)
    slice_im = ndimage.map_coordinates(spec2.imag, coords, order=1)
    f_slice = slice_re + 1j * slice_im
    ref = np.linalg.norm(f_slice)
    if ref == 0:
        return 0.0
    return float(np.linalg.norm(p_hat[usable] - f_slice) / ref)
