"""Frequency responses for SSRT filtered backprojection and DFT-based filtering.

Frequencies are in cycles per unit length. With ``G(w) = exp(-2 pi^2 sigma^2 w^2)``
the Gaussian spectrum, the Wiener deconvolution response is
``H_W = G / (G^2 + K)`` and the SSRT-FBP filter is ``H_s = |w| H_W``,
windowed to ``|w| < 1 / (2 tau)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ssrt_tomo.geometry import Sinogram, SinogramGeometry

DIVISION_FLOOR = 1e-300


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True)
class FilterSpec:
    """Parameters that fully determine ``H_s``.

    ``omega_max`` is the Nyquist frequency ``1 / (2 tau)`` of the detector grid.
    ``padded_len`` is the DFT length used to filter a projection.
    """

    sigma: float = 0.0
    wiener_k: float = 0.0
    omega_max: float = 0.5
    padded_len: int = 64

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.wiener_k < 0:
            raise ValueError("Wiener constant K must be >= 0")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        n = self.padded_len
        if n < 2 or n & (n - 1):
            raise ValueError(f"padded_len must be a power of two, got {n}")

    @classmethod
    def for_geometry(cls, geom: SinogramGeometry, sigma: float = 0.0, wiener_k: float = 0.0) -> "FilterSpec":
        return cls(
            sigma=sigma,
            wiener_k=wiener_k,
            omega_max=1.0 / (2.0 * geom.detector_spacing),
            padded_len=next_pow2(2 * geom.n_detectors),
        )

    @property
    def tau(self) -> float:
        return 1.0 / (2.0 * self.omega_max)

    def check_geometry(self, geom: SinogramGeometry) -> None:
        if self.padded_len < 2 * geom.n_detectors:
            raise ValueError(
                f"padded_len {self.padded_len} is shorter than 2 x {geom.n_detectors} detectors"
            )
        if not math.isclose(self.tau, geom.detector_spacing):
            raise ValueError("filter spec and geometry disagree on the detector spacing")


def frequency_grid(spec: FilterSpec) -> np.ndarray:
    """DFT bin frequencies ``m / (L tau)``; the Nyquist bin is taken as positive."""
    n = spec.padded_len
    w = np.fft.fftfreq(n, d=spec.tau)
    w[n // 2] = abs(w[n // 2])
    return w


def gaussian_spectrum(omega, sigma: float):
    """Fourier transform of the unit-mass Gaussian: ``exp(-2 pi^2 sigma^2 omega^2)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    omega = np.asarray(omega, dtype=float)
    return np.exp(-2.0 * math.pi**2 * sigma**2 * omega**2)


def wiener_response(omega, spec: FilterSpec):
    """``G / (G^2 + K)``; reduces to the inverse filter ``1 / G`` when ``K = 0``."""
    g = gaussian_spectrum(omega, spec.sigma)
    if spec.wiener_k == 0:
        return 1.0 / np.maximum(g, DIVISION_FLOOR)
    return g / np.maximum(g * g + spec.wiener_k, DIVISION_FLOOR)


def combined_response(omega, spec: FilterSpec):
    """Windowed ``|omega| H_W(omega)``, zero for ``|omega| >= omega_max``."""
    omega = np.asarray(omega, dtype=float)
    inside = np.abs(omega) < spec.omega_max
    # evaluate H_W only inside the band: 1/G overflows far outside it
    safe = np.where(inside, omega, 0.0)
    return np.where(inside, np.abs(safe) * wiener_response(safe, spec), 0.0)


def ramp_response(spec: FilterSpec) -> np.ndarray:
    """Windowed ramp on the DFT grid (the classical ram-lak filter)."""
    plain = FilterSpec(0.0, 0.0, spec.omega_max, spec.padded_len)
    return combined_response(frequency_grid(plain), plain)


def apply_response(values: np.ndarray, response: np.ndarray) -> np.ndarray:
    """Filter the columns of ``values`` with a per-bin ``response`` (zero padded DFT)."""
    n_det = values.shape[0]
    n = response.shape[0]
    spectrum = np.fft.fft(values, n=n, axis=0)
    spectrum *= np.asarray(response)[:, None]
    return np.fft.ifft(spectrum, axis=0)[:n_det].real


def filter_projections(sino: Sinogram, response) -> Sinogram:
    """Apply ``response`` (one value per DFT bin) to every projection of ``sino``."""
    response = np.asarray(response, dtype=float)
    if response.ndim != 1 or response.size < 2 * sino.geometry.n_detectors:
        raise ValueError(
            f"response length {response.size} must be a padded length >= "
            f"{2 * sino.geometry.n_detectors}"
        )
    n = response.size
    if n & (n - 1):
        raise ValueError(f"response length must be a power of two, got {n}")
    return sino.with_values(apply_response(sino.values, response))
