"""Image and sinogram data model, coordinate conventions and sinogram files.

Coordinates: the image origin sits at the image center with the y axis
pointing up, so pixel ``(row, col)`` of an ``H x W`` image has center
``x = col - (W - 1) / 2`` and ``y = (H - 1) / 2 - row`` (in pixels).
A ray ``(rho, theta)`` is the line ``x cos(theta) + y sin(theta) = rho``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """A 2-D real image stored row-major, ``data[row, col]``."""

    data: np.ndarray
    pixel_spacing: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 2:
            raise ValueError(f"image data must be 2-D, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image intensities must be finite")
        if self.pixel_spacing <= 0:
            raise ValueError("pixel_spacing must be positive")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates ``(x, y)`` as 2-D arrays, origin at the center."""
        h, w = self.data.shape
        x = np.arange(w) - (w - 1) / 2.0
        y = (h - 1) / 2.0 - np.arange(h)
        return np.meshgrid(x, y)


@dataclass(frozen=True, eq=False)
class SinogramGeometry:
    """Parallel-beam sampling: detector offsets ``rho_grid`` and view angles (radians)."""

    n_detectors: int
    detector_spacing: float
    angles: np.ndarray

    def __post_init__(self):
        angles = _frozen(self.angles).ravel()
        if self.n_detectors < 1 or self.n_detectors % 2 == 0:
            raise ValueError("n_detectors must be a positive odd integer")
        if self.detector_spacing <= 0:
            raise ValueError("detector_spacing must be positive")
        if angles.size == 0:
            raise ValueError("at least one projection angle is required")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        # [0, 2pi) is accepted so that redundant half-turns can be sampled
        if angles[0] < 0 or angles[-1] >= 2 * math.pi:
            raise ValueError("angles must lie in [0, 2*pi)")
        object.__setattr__(self, "angles", angles)

    @property
    def n_angles(self) -> int:
        return self.angles.size

    @property
    def rho_grid(self) -> np.ndarray:
        half = (self.n_detectors - 1) // 2
        return np.arange(-half, half + 1) * self.detector_spacing

    @property
    def rho_max(self) -> float:
        return (self.n_detectors - 1) // 2 * self.detector_spacing

    @property
    def delta_theta(self) -> float:
        """Angular step in radians (for a single view, pi is returned)."""
        if self.n_angles == 1:
            return math.pi
        return float(self.angles[1] - self.angles[0])

    @property
    def delta_theta_deg(self) -> float:
        return math.degrees(self.delta_theta)

    def covers(self, image: Image) -> bool:
        """True when the rho grid spans the diagonal of ``image``."""
        half_diag = math.hypot(image.width, image.height) / 2.0
        return self.rho_max >= half_diag - 1e-9

    def with_angles(self, angles) -> "SinogramGeometry":
        return replace(self, angles=np.asarray(angles, dtype=float))


def make_geometry(image_size: int, delta_theta: float, span: float = 180.0) -> SinogramGeometry:
    """Build a parallel-beam geometry for an ``image_size`` square image.

    ``delta_theta`` and ``span`` are in degrees. Angles run over
    ``[0, span)``; ``span=360`` gives the redundant full circle.
    """
    if image_size < 2:
        raise ValueError("image_size must be >= 2")
    if not 0 < delta_theta <= 90:
        raise ValueError(f"delta_theta must be in (0, 90] degrees, got {delta_theta}")
    if span not in (180.0, 360.0):
        raise ValueError("span must be 180 or 360 degrees")
    n_det = 2 * math.ceil(math.sqrt(2) * image_size / 2) + 1
    # integer step count avoids float drift in the last angle
    n_views = math.ceil(span / delta_theta - 1e-9)
    angles_deg = np.arange(n_views) * delta_theta
    angles_deg = angles_deg[angles_deg < span - 1e-9]
    return SinogramGeometry(n_det, 1.0, np.deg2rad(angles_deg))


def normalize_image(img: Image, lo: float, hi: float) -> Image:
    """Affinely rescale intensities to ``[lo, hi]``; a constant image maps to ``lo``."""
    if hi <= lo:
        raise ValueError(f"need hi > lo, got lo={lo}, hi={hi}")
    d = img.data
    dmin, dmax = float(d.min()), float(d.max())
    if dmax == dmin:
        return Image(np.full_like(d, lo), img.pixel_spacing)
    out = lo + (d - dmin) * ((hi - lo) / (dmax - dmin))
    # pin the extremes exactly so repeated normalization is idempotent
    out[d == dmin] = lo
    out[d == dmax] = hi
    return Image(out, img.pixel_spacing)


@dataclass(frozen=True)
class Provenance:
    """Where sinogram values came from.

    ``kind`` is ``"rt"``, ``"ssrt"`` or ``"noisy"``. ``sigma`` is the Gaussian
    scale of the underlying clean sinogram (0 for RT). Noisy sinograms also
    carry the noise parameters and the attenuation scale used to simulate them.
    """

    kind: str = "rt"
    sigma: float = 0.0
    noise: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("rt", "ssrt", "noisy"):
            raise ValueError(f"unknown provenance kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("provenance sigma must be >= 0")

    @property
    def is_rt(self) -> bool:
        return self.sigma == 0.0 and self.kind in ("rt", "noisy")

    def label(self) -> str:
        if self.kind == "rt":
            return "RT"
        if self.kind == "ssrt":
            return f"SSRT({self.sigma:g})"
        return f"noisy({'RT' if self.sigma == 0 else f'SSRT({self.sigma:g})'})"


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Projection values ``values[k, i]`` at ``(rho_k, theta_i)``."""

    geometry: SinogramGeometry
    values: np.ndarray
    provenance: Provenance = Provenance()

    def __post_init__(self):
        values = _frozen(self.values)
        expected = (self.geometry.n_detectors, self.geometry.n_angles)
        if values.shape != expected:
            raise ValueError(f"sinogram shape {values.shape} does not match geometry {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sinogram values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def sigma(self) -> float:
        return self.provenance.sigma

    def with_values(self, values, provenance: Optional[Provenance] = None) -> "Sinogram":
        return Sinogram(self.geometry, values, provenance or self.provenance)


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta")


def write_keyvalue(path, items: dict) -> None:
    with open(path, "w") as fh:
        for key, value in items.items():
            fh.write(f"{key}={value}\n")


def read_keyvalue(path) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def save_sinogram_csv(sino: Sinogram, path) -> None:
    """Write ``rho,theta_deg,value`` rows plus a ``<path>.meta`` key=value sidecar."""
    path = Path(path)
    geom = sino.geometry
    rho = geom.rho_grid
    theta_deg = np.rad2deg(geom.angles)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rho", "theta_deg", "value"])
        for i, t in enumerate(theta_deg):
            for k, r in enumerate(rho):
                writer.writerow([repr(float(r)), repr(float(t)), repr(float(sino.values[k, i]))])
    meta = {
        "n_detectors": geom.n_detectors,
        "tau": repr(geom.detector_spacing),
        "delta_theta_deg": repr(geom.delta_theta_deg),
        "n_angles": geom.n_angles,
        "provenance": sino.provenance.kind,
        "sigma": repr(sino.provenance.sigma),
    }
    for key, value in (sino.provenance.noise or {}).items():
        meta[key] = repr(value) if isinstance(value, float) else value
    write_keyvalue(_meta_path(path), meta)


def load_sinogram_csv(path) -> Sinogram:
    path = Path(path)
    meta = read_keyvalue(_meta_path(path))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["rho", "theta_deg", "value"]:
            raise ValueError(f"unexpected sinogram header {header}")
        rows = np.array([[float(v) for v in row] for row in reader])
    n_det = int(meta["n_detectors"])
    angles_deg = rows[::n_det, 1]
    geom = SinogramGeometry(n_det, float(meta["tau"]), np.deg2rad(angles_deg))
    values = rows[:, 2].reshape(geom.n_angles, n_det).T
    noise_keys = ("i0", "sigma_n", "seed", "scale", "mu_max")
    noise = {k: float(meta[k]) for k in noise_keys if k in meta} or None
    prov = Provenance(meta.get("provenance", "rt"), float(meta.get("sigma", 0.0)), noise)
    return Sinogram(geom, values, prov)
