"""Poisson-Gaussian CT measurement noise through the Lambert-Beer model.

Line integrals ``S`` are rescaled by ``c = mu_max / max(S)`` and turned into
mean photon counts ``I0 exp(-c S)``. Measured counts are
``Z = Poisson(mean) + Normal(0, sigma_n^2)``, and are converted back with
``-ln(max(Z, eps) / I0) / c``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ssrt_tomo.geometry import Provenance, Sinogram, SinogramGeometry

COUNT_FLOOR = 0.5


@dataclass(frozen=True)
class NoiseModel:
    incident_flux: float  # I0, photons per ray
    electronic_std: float = 0.0  # sigma_n, photon-equivalent counts
    mu_max: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.incident_flux <= 0:
            raise ValueError("incident_flux must be positive")
        if self.electronic_std < 0:
            raise ValueError("electronic_std must be >= 0")
        if self.mu_max <= 0:
            raise ValueError("mu_max must be positive")

    def with_seed(self, seed: int) -> "NoiseModel":
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class Transmission:
    """Photon counts on a sinogram grid together with the attenuation scale used."""

    counts: np.ndarray
    scale: float
    geometry: SinogramGeometry
    sigma: float = 0.0


def to_transmission(sino: Sinogram, model: NoiseModel) -> Transmission:
    values = sino.values
    if np.any(values < 0):
        raise ValueError("line integrals must be nonnegative for the transmission model")
    peak = float(values.max())
    if peak <= 0:
        raise ValueError("cannot scale an all-zero sinogram")
    scale = model.mu_max / peak
    mean = model.incident_flux * np.exp(-scale * values)
    return Transmission(mean, scale, sino.geometry, sino.sigma)


def _column_rng(seed: int, column: int) -> np.random.Generator:
    # one independent stream per view: results do not depend on evaluation order
    return np.random.default_rng([seed, column])


def corrupt(mean_counts: Union[Transmission, np.ndarray], model: NoiseModel):
    """Draw ``Poisson(mean) + Normal(0, sigma_n^2)`` counts, reproducibly from ``model.seed``.

    Accepts a :class:`Transmission` (returned with sampled counts) or a bare array.
    Columns of a 2-D array are sampled from independent per-column streams.
    """
    wrapped = isinstance(mean_counts, Transmission)
    mean = np.asarray(mean_counts.counts if wrapped else mean_counts, dtype=float)
    if not np.all(np.isfinite(mean)) or np.any(mean < 0):
        raise ValueError("mean counts must be finite and nonnegative")
    cols = mean.reshape(mean.shape[0], -1) if mean.ndim > 1 else mean.reshape(-1, 1)
    out = np.empty_like(cols)
    for j in range(cols.shape[1]):
        rng = _column_rng(model.seed, j)
        z = rng.poisson(cols[:, j]).astype(float)
        if model.electronic_std > 0:
            z += rng.normal(0.0, model.electronic_std, size=z.shape)
        out[:, j] = z
    out = out.reshape(mean.shape)
    if wrapped:
        return replace(mean_counts, counts=out)
    return out


def to_line_integrals(counts: Transmission, model: NoiseModel) -> Sinogram:
    z = np.maximum(counts.counts, COUNT_FLOOR)
    values = -np.log(z / model.incident_flux) / counts.scale
    noise = {
        "i0": float(model.incident_flux),
        "sigma_n": float(model.electronic_std),
        "seed": int(model.seed),
        "scale": float(counts.scale),
        "mu_max": float(model.mu_max),
    }
    return Sinogram(counts.geometry, values, Provenance("noisy", counts.sigma, noise))


def add_ct_noise(sino: Sinogram, model: NoiseModel) -> Sinogram:
    """Round trip a clean sinogram through transmission, noise and log conversion."""
    return to_line_integrals(corrupt(to_transmission(sino, model), model), model)

