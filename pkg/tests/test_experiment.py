import math
import zlib

import numpy as np
import pytest

from ssrt_tomo.experiment import (
    CSV_COLUMNS,
    SweepConfig,
    SweepRow,
    heatmap_array,
    load_phantom,
    read_table,
    render_heatmap,
    run_sweep,
    sigma_opt_ridge,
    worker_count,
    write_png,
    write_table,
)
from ssrt_tomo.noise import NoiseModel
from ssrt_tomo.phantom import save_pgm, shepp_logan


def synthetic(values, method="ssrt_fbp", sigmas=(0.0, 0.2, 0.4), dthetas=(1.0, 2.0), noise=(None, None)):
    """Rows whose metric surface is ``values[dtheta index][sigma index]``."""
    return [
        SweepRow(method, s, d, noise[0], noise[1], float(values[i][j]), float(values[i][j]) / 100.0)
        for i, d in enumerate(dthetas)
        for j, s in enumerate(sigmas)
    ]


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(sigma_grid=())
    with pytest.raises(ValueError):
        SweepConfig(n_repeats=0)
    with pytest.raises(ValueError):
        SweepConfig(methods=("sart",))
    with pytest.raises(ValueError):
        SweepConfig(sigma_grid=(-0.2,))
    assert len(SweepConfig().sigma_grid) == 15 and SweepConfig().sigma_grid[-1] == 2.8


def test_load_phantom(tmp_path):
    assert load_phantom("disk", 32).shape == (32, 32)
    p = tmp_path / "p.pgm"
    save_pgm(shepp_logan(20), p)
    assert load_phantom(str(p), 999).shape == (20, 20)
    with pytest.raises(ValueError):
        load_phantom("head", 32)


def test_full_grid_row_count():
    rows = run_sweep(SweepConfig(size=16, n_repeats=1), workers=1)
    assert len(rows) == 15 * 7 * 1 * 3
    assert {r.method for r in rows} == {"radon_fbp", "ssrt_fbp", "deconv_rad_fbp"}


def test_sweep_is_deterministic_and_worker_independent(tmp_path):
    cfg = SweepConfig(size=24, sigma_grid=(0.0, 1.0), delta_theta_grid=(3.0, 6.0, 7.0),
                      noise_settings=(None, NoiseModel(2e4, 1.0)), n_repeats=3, base_seed=4)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table(run_sweep(cfg, workers=1), a, cfg.n_repeats)
    write_table(run_sweep(cfg, workers=4), b, cfg.n_repeats)
    assert a.read_bytes() == b.read_bytes()
    rows = read_table(a)
    assert len(rows) == 2 * 3 * 2 * 3
    assert all(r.runtime_s == 0.0 for r in rows)


def test_noisy_rows_average_repeats():
    base = dict(size=24, sigma_grid=(0.0,), delta_theta_grid=(6.0,), methods=("radon_fbp",),
                noise_settings=(NoiseModel(1e4, 1.0),))
    one = run_sweep(SweepConfig(n_repeats=1, **base), workers=1)[0]
    two = run_sweep(SweepConfig(n_repeats=2, **base), workers=1)[0]
    shifted = run_sweep(SweepConfig(n_repeats=1, base_seed=1, **base), workers=1)[0]
    assert two.psnr == pytest.approx((one.psnr + shifted.psnr) / 2)


def test_sigma_zero_deconv_equals_radon():
    rows = run_sweep(SweepConfig(size=24, sigma_grid=(0.0,), delta_theta_grid=(6.0,), n_repeats=1), workers=1)
    by = {r.method: r.psnr for r in rows}
    assert by["deconv_rad_fbp"] == by["radon_fbp"]


def test_runtime_column_when_enabled():
    rows = run_sweep(SweepConfig(size=24, sigma_grid=(1.0,), delta_theta_grid=(6.0,), n_repeats=1,
                                 record_runtime=True), workers=1)
    assert all(r.runtime_s > 0 for r in rows)


def test_table_round_trip(tmp_path):
    rows = synthetic([[1.0, math.inf, 2.0], [3.0, 4.0, 5.0]])
    rows.append(SweepRow("radon_fbp", 0.0, 1.0, 5e4, 0.5, 20.0, 0.5, 0.25))
    path = tmp_path / "t.csv"
    write_table(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#") and lines[1] == ",".join(CSV_COLUMNS)
    back = read_table(path)
    assert sorted(back, key=SweepRow.sort_key) == sorted(rows, key=SweepRow.sort_key)
    assert any(r.psnr == math.inf for r in back)


def test_ridge_single_sigma():
    rows = synthetic([[5.0], [7.0], [1.0]], sigmas=(0.6,), dthetas=(0.5, 1.0, 2.0))
    assert sigma_opt_ridge(rows) == [(0.5, 0.6), (1.0, 0.6), (2.0, 0.6)]


def test_ridge_known_maxima_and_ties():
    rows = synthetic([[1.0, 3.0, 2.0], [4.0, 4.0, 1.0]])
    assert sigma_opt_ridge(rows) == [(1.0, 0.2), (2.0, 0.0)]
    assert sigma_opt_ridge(rows, "ssim") == [(1.0, 0.2), (2.0, 0.0)]


def test_ridge_errors():
    rows = synthetic([[1.0, 3.0, 2.0], [4.0, 4.0, 1.0]])
    with pytest.raises(ValueError):
        sigma_opt_ridge(rows[:-1])
    with pytest.raises(ValueError):
        sigma_opt_ridge(rows, method="radon_fbp")
    with pytest.raises(ValueError):
        sigma_opt_ridge(rows, metric="mse")
    mixed = rows + synthetic([[0, 0, 0], [0, 0, 0]], noise=(5e4, 0.5))
    with pytest.raises(ValueError):
        sigma_opt_ridge(mixed)
    assert sigma_opt_ridge(mixed, noise_key=(None, None)) == sigma_opt_ridge(rows)


def test_desk_run_ridge_rises_with_dtheta():
    rows = run_sweep(SweepConfig(size=128, delta_theta_grid=(0.5, 1.0, 2.0), methods=("ssrt_fbp",), n_repeats=1))
    for metric in ("psnr", "ssim"):
        sig = [s for _, s in sigma_opt_ridge(rows, metric)]
        assert sig == sorted(sig)


def test_heatmap_constant_is_uniform():
    img = heatmap_array(synthetic([[3.0, 3.0, 3.0], [3.0, 3.0, 3.0]]), cell=8)
    assert img.shape == (16, 24, 3)
    corners = img[[0, 0, 8, 8], :][:, [0, 8, 16]]
    assert np.all(corners == corners[0, 0])


def test_heatmap_orientation():
    # best value at (largest sigma, smallest dtheta): right column, bottom row
    img = heatmap_array(synthetic([[0.0, 9.0], [1.0, 2.0]], sigmas=(0.0, 1.0), dthetas=(1.0, 5.0)), cell=4)
    assert img.shape == (8, 8, 3)
    assert tuple(img[7, 7]) == (255, 255, 255)
    assert tuple(img[7, 0]) == (0, 0, 0)
    assert tuple(img[0, 0]) == (28, 28, 28)


def test_heatmap_incomplete_grid():
    rows = synthetic([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])[:-1]
    with pytest.raises(ValueError):
        heatmap_array(rows)


def test_render_heatmap_file(tmp_path):
    rows = run_sweep(SweepConfig(size=24, sigma_grid=(0.0, 0.6), delta_theta_grid=(6.0, 12.0), n_repeats=1), workers=1)
    path = render_heatmap(rows, "psnr", tmp_path / "h.png")
    data = path.read_bytes()
    assert data.startswith(b"\x89PNG") and len(data) > 100


def test_png_encoder(tmp_path):
    rgb = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3)
    write_png(tmp_path / "x.png", rgb)
    data = (tmp_path / "x.png").read_bytes()
    idat = data.index(b"IDAT")
    length = int.from_bytes(data[idat - 4 : idat], "big")
    raw = zlib.decompress(data[idat + 4 : idat + 4 + length])
    assert raw == b"\x00" + rgb[0].tobytes() + b"\x00" + rgb[1].tobytes()


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("SSRT_TOMO_THREADS", "1")
    assert worker_count() == 1
