"""Desk-scale sigma x dtheta sweep with heatmaps and the sigma_opt ridge.

    SSRT_TOMO_THREADS=4 python3 scripts/desk_sweep.py --size 128 --out runs/desk
"""

import argparse
from pathlib import Path

from ssrt_tomo import NoiseModel
from ssrt_tomo.experiment import SweepConfig, render_heatmap, run_sweep, sigma_opt_ridge, write_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--noisy", action="store_true", help="add the I0=5e4, sigma_n=0.5 setting")
    ap.add_argument("--out", default="runs/desk")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    noise = (None, NoiseModel(5e4, 0.5)) if args.noisy else (None,)
    cfg = SweepConfig(size=args.size, noise_settings=noise, n_repeats=args.repeats)
    rows = run_sweep(cfg)
    write_table(rows, out / "sweep.csv", cfg.n_repeats)
    for model in noise:
        key = (None, None) if model is None else (model.incident_flux, model.electronic_std)
        tag = "clean" if model is None else f"i0_{model.incident_flux:g}_sn_{model.electronic_std:g}"
        for metric in ("psnr", "ssim"):
            render_heatmap(rows, metric, out / f"{tag}_{metric}.png", noise_key=key)
            ridge = sigma_opt_ridge(rows, metric, noise_key=key)
            print(tag, metric, " ".join(f"{d:g}:{s:g}" for d, s in ridge))


if __name__ == "__main__":
    main()
