"""Analytic test images and binary PGM input/output."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ssrt_tomo.geometry import Image, normalize_image

SUPERSAMPLE = 4


class PGMFormatError(ValueError):
    """Malformed PGM file."""


class UnsupportedFormatError(PGMFormatError):
    """Valid netpbm header, but not an 8-bit binary graymap."""


@dataclass(frozen=True)
class EllipseSpec:
    """Ellipse in normalized ``[-1, 1]^2`` coordinates; rotation in degrees."""

    x0: float
    y0: float
    a: float
    b: float
    rotation: float
    intensity: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("ellipse semi-axes must be positive")

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        phi = math.radians(self.rotation)
        c, s = math.cos(phi), math.sin(phi)
        dx, dy = x - self.x0, y - self.y0
        u = dx * c + dy * s
        v = -dx * s + dy * c
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


# Original (high contrast) Shepp-Logan table.
SHEPP_LOGAN_ELLIPSES = (
    EllipseSpec(0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
    EllipseSpec(0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
    EllipseSpec(0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    EllipseSpec(-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    EllipseSpec(0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    EllipseSpec(0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    EllipseSpec(0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    EllipseSpec(-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    EllipseSpec(0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
    EllipseSpec(0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
)


def _subpixel_grid(n: int, factor: int = SUPERSAMPLE):
    """Normalized coordinates of ``factor x factor`` sub-samples per pixel.

    Returned arrays have shape ``(n*factor, n*factor)``; block-averaging by
    ``factor`` brings them back to pixel resolution.
    """
    m = n * factor
    centers = (np.arange(m) + 0.5) / factor - n / 2.0
    x = centers / (n / 2.0)
    y = -x
    return np.meshgrid(x, y)


def _block_mean(a: np.ndarray, factor: int) -> np.ndarray:
    n0, n1 = a.shape[0] // factor, a.shape[1] // factor
    return a.reshape(n0, factor, n1, factor).mean(axis=(1, 3))


def rasterize_ellipses(n: int, ellipses, factor: int = SUPERSAMPLE) -> np.ndarray:
    x, y = _subpixel_grid(n, factor)
    out = np.zeros_like(x)
    for e in ellipses:
        out[e.contains(x, y)] += e.intensity
    return _block_mean(out, factor)


def shepp_logan(n: int) -> Image:
    """Classical 10-ellipse Shepp-Logan head at ``n x n``, mapped to [0, 255]."""
    if n < 16:
        raise ValueError(f"shepp_logan needs n >= 16, got {n}")
    return normalize_image(Image(rasterize_ellipses(n, SHEPP_LOGAN_ELLIPSES)), 0.0, 255.0)


def disk_phantom(n: int, radius: float, value: float = 1.0) -> Image:
    """Centered disk; ``radius`` is a fraction of the half-width ``n/2``."""
    if not 0 < radius <= 1:
        raise ValueError(f"radius must be in (0, 1], got {radius}")
    disk = EllipseSpec(0.0, 0.0, radius, radius, 0.0, value)
    return Image(rasterize_ellipses(n, [disk]))


def gaussian_blob(n: int, width: float, center=(0.0, 0.0), amplitude: float = 255.0) -> Image:
    """Smooth isotropic Gaussian bump; ``width`` and ``center`` in pixels."""
    img = Image(np.zeros((n, n)))
    x, y = img.coordinates()
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    return Image(amplitude * np.exp(-r2 / (2 * width**2)))


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        if buf[pos : pos + 1].isspace():
            pos += 1
        elif buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PGMFormatError("truncated PGM header")
    return buf[start:pos], pos


def load_pgm(path) -> Image:
    buf = Path(path).read_bytes()
    if len(buf) < 2 or buf[:1] != b"P":
        raise PGMFormatError("missing netpbm magic number")
    magic = buf[:2]
    if magic != b"P5":
        raise UnsupportedFormatError(f"only binary P5 graymaps are supported, got {magic!r}")
    pos = 2
    fields = []
    try:
        for _ in range(3):
            tok, pos = _read_token(buf, pos)
            fields.append(int(tok))
    except ValueError as exc:
        raise PGMFormatError(f"bad PGM header: {exc}") from exc
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PGMFormatError(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormatError(f"maxval must be 255, got {maxval}")
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise PGMFormatError("missing whitespace after maxval")
    payload = buf[pos + 1 :]
    if len(payload) != width * height:
        raise PGMFormatError(f"expected {width * height} payload bytes, found {len(payload)}")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return Image(data.astype(float))


def save_pgm(img: Image, path) -> None:
    """Write ``img`` as an 8-bit P5 file; intensities are clamped and rounded."""
    data = np.clip(np.rint(img.data), 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())
