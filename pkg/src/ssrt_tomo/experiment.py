"""Parameter sweeps over (sigma, delta_theta, noise) and their summaries.

A sweep reconstructs a phantom with every requested method on every grid
cell, averages PSNR and SSIM over seeded noise repeats and writes one CSV row
per ``(method, sigma, dtheta, noise)``. ``sigma_opt_ridge`` extracts the best
scale per angular step and ``render_heatmap`` draws the metric surface.
"""

from __future__ import annotations

import csv
import math
import os
import struct
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ssrt_tomo.geometry import Image, Provenance, Sinogram, make_geometry
from ssrt_tomo.metrics import psnr, ssim
from ssrt_tomo.noise import NoiseModel, add_ct_noise
from ssrt_tomo.phantom import disk_phantom, load_pgm, shepp_logan
from ssrt_tomo.projection import GaussianKernel, radon_forward, smooth_sinogram
from ssrt_tomo.reconstruction import METHODS, ReconConfig, reconstruct

CSV_COLUMNS = (
    "method",
    "sigma",
    "dtheta_deg",
    "i0",
    "sigma_n",
    "repeat_mean_psnr",
    "repeat_mean_ssim",
    "mean_runtime_s",
)
DEFAULT_SIGMAS = tuple(round(0.2 * i, 10) for i in range(15))
DEFAULT_DTHETAS = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0)
THREADS_ENV = "SSRT_TOMO_THREADS"


def load_phantom(name: str, size: int) -> Image:
    """``shepp_logan``, ``disk`` or a path to a P5 PGM file (its own size is kept)."""
    if name == "shepp_logan":
        return shepp_logan(size)
    if name == "disk":
        return disk_phantom(size, 0.5, 255.0)
    if Path(name).suffix.lower() == ".pgm":
        return load_pgm(name)
    raise ValueError(f"unknown phantom {name!r}; use shepp_logan, disk or a .pgm path")


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition for :func:`run_sweep`.

    ``noise_settings`` holds :class:`NoiseModel` entries (their seeds are
    ignored; repeat ``r`` uses ``base_seed + r``) or ``None`` for clean data.
    Runtimes are only measured when ``record_runtime`` is set, since wall
    clock values would otherwise make reruns differ.
    """

    phantom: str = "shepp_logan"
    size: int = 256
    sigma_grid: tuple = DEFAULT_SIGMAS
    delta_theta_grid: tuple = DEFAULT_DTHETAS
    noise_settings: tuple = (None,)
    n_repeats: int = 20
    methods: tuple = METHODS
    wiener_k: float = 0.02
    deconv_gamma: float = 1e-3
    base_seed: int = 0
    record_runtime: bool = False

    def __post_init__(self):
        for name in ("sigma_grid", "delta_theta_grid", "noise_settings", "methods"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, value)
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be >= 1")
        if any(s < 0 for s in self.sigma_grid):
            raise ValueError("sigma values must be >= 0")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")


@dataclass(frozen=True)
class SweepRow:
    method: str
    sigma: float
    dtheta_deg: float
    i0: Optional[float]
    sigma_n: Optional[float]
    psnr: float = field(compare=False)
    ssim: float = field(compare=False)
    runtime_s: float = field(default=0.0, compare=False)

    @property
    def noise_key(self) -> tuple:
        return (self.i0, self.sigma_n)

    def sort_key(self) -> tuple:
        noisy = self.i0 is not None
        return (
            METHODS.index(self.method) if self.method in METHODS else len(METHODS),
            self.method,
            noisy,
            -(self.i0 or 0.0),
            self.sigma_n or 0.0,
            self.dtheta_deg,
            self.sigma,
        )


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _angle_plan(grid: Sequence[float]) -> tuple[float, dict]:
    """Finest step plus the view stride for each grid value (0 when not a multiple)."""
    finest = min(grid)
    strides = {}
    for d in grid:
        ratio = d / finest
        strides[d] = int(round(ratio)) if abs(ratio - round(ratio)) < 1e-9 else 0
    return finest, strides


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


class _Cell:
    """All reconstructions for one (dtheta, noise, repeat) work item."""

    def __init__(self, cfg: SweepConfig, phantom: Image, rt: Sinogram, dtheta: float, noise, repeat: int):
        self.cfg, self.phantom, self.rt = cfg, phantom, rt
        self.dtheta, self.noise, self.repeat = dtheta, noise, repeat

    def _noisy(self, sino: Sinogram) -> Sinogram:
        if self.noise is None:
            return sino
        return add_ct_noise(sino, self.noise.with_seed(self.cfg.base_seed + self.repeat))

    def _score(self, sino: Sinogram, rc: ReconConfig) -> tuple[float, float, float]:
        img, seconds = _timed(reconstruct, sino, rc)
        return psnr(self.phantom, img), ssim(self.phantom, img), seconds

    def run(self) -> list[tuple]:
        cfg, size = self.cfg, self.phantom.width
        rt = self._noisy(self.rt)
        radon = None
        out = []
        for sigma in cfg.sigma_grid:
            if sigma == 0:
                sino = rt
            else:
                kernel = GaussianKernel(sigma, self.rt.geometry.detector_spacing)
                clean = self.rt.with_values(smooth_sinogram(self.rt.values, kernel), Provenance("ssrt", sigma))
                sino = self._noisy(clean)
            for method in cfg.methods:
                if method == "radon_fbp" or (method == "deconv_rad_fbp" and sigma == 0):
                    # RT input: these do not depend on sigma, so score once
                    if radon is None:
                        radon = self._score(rt, ReconConfig("radon_fbp", size))
                    score = radon
                else:
                    rc = ReconConfig(method, size, sigma, cfg.wiener_k, cfg.deconv_gamma)
                    score = self._score(sino, rc)
                out.append((method, sigma, self.dtheta, self.noise, self.repeat) + score)
        return out


def run_sweep(cfg: SweepConfig, workers: Optional[int] = None) -> list[SweepRow]:
    """Evaluate every grid cell and return canonically sorted, repeat-averaged rows."""
    phantom = load_phantom(cfg.phantom, cfg.size)
    if phantom.width != phantom.height:
        raise ValueError("sweeps need a square phantom")
    n = phantom.width
    finest, strides = _angle_plan(cfg.delta_theta_grid)
    fine_rt = radon_forward(phantom, make_geometry(n, finest))
    sinos = {}
    for d in cfg.delta_theta_grid:
        if strides[d]:
            geom = fine_rt.geometry.with_angles(fine_rt.geometry.angles[:: strides[d]])
            sinos[d] = Sinogram(geom, fine_rt.values[:, :: strides[d]], fine_rt.provenance)
        else:
            sinos[d] = radon_forward(phantom, make_geometry(n, d))

    cells = []
    for d in cfg.delta_theta_grid:
        for noise in cfg.noise_settings:
            # clean data is deterministic: one pass stands for every repeat
            repeats = 1 if noise is None else cfg.n_repeats
            cells += [_Cell(cfg, phantom, sinos[d], d, noise, r) for r in range(repeats)]

    n_workers = workers or worker_count()
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            results = list(pool.map(_Cell.run, cells))
    else:
        results = [c.run() for c in cells]

    groups: dict = {}
    for batch in results:
        for method, sigma, dtheta, noise, repeat, p, s, t in batch:
            key = (method, sigma, dtheta, None if noise is None else (noise.incident_flux, noise.electronic_std))
            groups.setdefault(key, []).append((repeat, p, s, t))
    rows = []
    for (method, sigma, dtheta, nk), vals in groups.items():
        vals.sort()
        p = [v[1] for v in vals]
        mean_psnr = math.inf if all(math.isinf(x) for x in p) else float(np.mean(p))
        mean_ssim = float(np.mean([v[2] for v in vals]))
        runtime = float(np.mean([v[3] for v in vals])) if cfg.record_runtime else 0.0
        i0, sn = nk if nk is not None else (None, None)
        rows.append(SweepRow(method, sigma, dtheta, i0, sn, mean_psnr, mean_ssim, runtime))
    rows.sort(key=SweepRow.sort_key)
    return rows


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def _fmt_opt(value: Optional[float]) -> str:
    return "none" if value is None else _fmt(value)


def _parse_opt(text: str) -> Optional[float]:
    return None if text == "none" else float(text)


def write_table(rows: Sequence[SweepRow], path, n_repeats: Optional[int] = None) -> None:
    """Write rows in the fixed column order; a leading ``#`` line states the averaging."""
    rows = sorted(rows, key=SweepRow.sort_key)
    note = "# psnr and ssim are arithmetic means of per-repeat values"
    if n_repeats is not None:
        note += f" over {n_repeats} noisy repeats (clean cells are evaluated once)"
    with open(path, "w", newline="") as fh:
        fh.write(note + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [r.method, _fmt(r.sigma), _fmt(r.dtheta_deg), _fmt_opt(r.i0), _fmt_opt(r.sigma_n),
                 _fmt(r.psnr), _fmt(r.ssim), _fmt(r.runtime_s)]
            )


def read_table(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = tuple(next(reader))
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected sweep header {header}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        method, sigma, dtheta, i0, sn, p, s, t = rec
        rows.append(SweepRow(method, float(sigma), float(dtheta), _parse_opt(i0), _parse_opt(sn),
                             float(p), float(s), float(t)))
    return rows


def _select(rows, method: str, noise_key) -> list[SweepRow]:
    picked = [r for r in rows if r.method == method]
    keys = sorted({r.noise_key for r in picked}, key=lambda k: (k[0] is not None, k))
    if not picked:
        raise ValueError(f"table has no {method} rows")
    if noise_key is None:
        if len(keys) > 1:
            raise ValueError(f"table mixes noise settings {keys}; pick one")
        noise_key = keys[0]
    picked = [r for r in picked if r.noise_key == tuple(noise_key)]
    if not picked:
        raise ValueError(f"no {method} rows for noise setting {noise_key}")
    return picked


def _grid(rows: Sequence[SweepRow], metric: str):
    if metric not in ("psnr", "ssim"):
        raise ValueError(f"metric must be psnr or ssim, got {metric!r}")
    sigmas = sorted({r.sigma for r in rows})
    dthetas = sorted({r.dtheta_deg for r in rows})
    values = np.full((len(dthetas), len(sigmas)), np.nan)
    for r in rows:
        values[dthetas.index(r.dtheta_deg), sigmas.index(r.sigma)] = getattr(r, metric)
    if np.isnan(values).any():
        raise ValueError("table does not cover the full sigma x dtheta grid")
    return sigmas, dthetas, values


def sigma_opt_ridge(rows: Sequence[SweepRow], metric: str = "psnr", method: str = "ssrt_fbp",
                    noise_key=None) -> list[tuple[float, float]]:
    """Per dtheta, the sigma with the best ``metric``; ties go to the smaller sigma."""
    sigmas, dthetas, values = _grid(_select(rows, method, noise_key), metric)
    # argmax returns the first maximum, i.e. the smallest sigma
    return [(d, sigmas[int(np.argmax(values[i]))]) for i, d in enumerate(dthetas)]


CELL_PX = 12
RIDGE_RGB = (220, 30, 30)


def heatmap_array(rows: Sequence[SweepRow], metric: str = "psnr", method: str = "ssrt_fbp",
                  noise_key=None, cell: int = CELL_PX) -> np.ndarray:
    """RGB raster of one method's surface: sigma left to right, dtheta bottom to top.

    Gray level follows the metric (white is best); the sigma_opt cell of each row
    carries a red center mark.
    """
    sigmas, dthetas, values = _grid(_select(rows, method, noise_key), metric)
    finite = values[np.isfinite(values)]
    top = finite.max() if finite.size else 1.0
    values = np.where(np.isposinf(values), top, values)
    values = np.where(np.isneginf(values), finite.min() if finite.size else 0.0, values)
    lo, hi = values.min(), values.max()
    level = np.full(values.shape, 128.0) if hi == lo else 255.0 * (values - lo) / (hi - lo)
    ny, nx = values.shape
    img = np.empty((ny * cell, nx * cell, 3), dtype=np.uint8)
    ridge = dict(sigma_opt_ridge(rows, metric, method, noise_key))
    m = max(1, cell // 4)
    for i, d in enumerate(dthetas):
        r0 = (ny - 1 - i) * cell
        for j, s in enumerate(sigmas):
            c0 = j * cell
            img[r0 : r0 + cell, c0 : c0 + cell] = int(round(level[i, j]))
            if ridge[d] == s:
                img[r0 + cell // 2 - m : r0 + cell // 2 + m, c0 + cell // 2 - m : c0 + cell // 2 + m] = RIDGE_RGB
    return img


def write_png(path, rgb: np.ndarray) -> None:
    """Minimal 8-bit RGB PNG encoder (filter type 0 on every scanline)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    raw = b"".join(b"\x00" + rgb[y].tobytes() for y in range(h))

    def chunk(tag: bytes, data: bytes) -> bytes:
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

    png = b"\x89PNG\r\n\x1a\n"
    png += chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0))
    png += chunk(b"IDAT", zlib.compress(raw, 9))
    png += chunk(b"IEND", b"")
    Path(path).write_bytes(png)


def render_heatmap(rows: Sequence[SweepRow], metric: str, path, methods: Optional[Sequence[str]] = None,
                   noise_key=None) -> Path:
    """One panel per method, side by side with a white gutter, written as PNG."""
    present = [m for m in METHODS if any(r.method == m for r in rows)]
    methods = list(methods or present)
    if not methods:
        raise ValueError("table is empty")
    panels = [heatmap_array(rows, metric, m, noise_key) for m in methods]
    gap = CELL_PX // 2
    h = max(p.shape[0] for p in panels)
    w = sum(p.shape[1] for p in panels) + gap * (len(panels) - 1)
    canvas = np.full((h, w, 3), 255, dtype=np.uint8)
    x = 0
    for p in panels:
        canvas[: p.shape[0], x : x + p.shape[1]] = p
        x += p.shape[1] + gap
    write_png(path, canvas)
    return Path(path)
