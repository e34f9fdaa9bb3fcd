"""Noisy operating point: sigma=2, dtheta=1 deg, I0=5e4, sigma_n=0.5 on a 256 Shepp-Logan.

Prints mean PSNR, SSIM and profile MAE per method over the repeats, and
optionally a sweep of the deconvolution weight.

    python3 scripts/noisy_operating_point.py --repeats 20 --gammas 1e-3,1e-2,1e-1,1
"""

import argparse

import numpy as np

from ssrt_tomo import NoiseModel, ReconConfig, make_geometry, psnr, radon_forward, reconstruct, shepp_logan, ssim
from ssrt_tomo.geometry import Provenance
from ssrt_tomo.metrics import profile_mae
from ssrt_tomo.noise import add_ct_noise
from ssrt_tomo.projection import GaussianKernel, smooth_sinogram


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--sigma", type=float, default=2.0)
    ap.add_argument("--dtheta", type=float, default=1.0)
    ap.add_argument("--i0", type=float, default=5e4)
    ap.add_argument("--sigma-n", type=float, default=0.5)
    ap.add_argument("--mu-max", type=float, default=6.0)
    ap.add_argument("--k", type=float, default=0.02)
    ap.add_argument("--gammas", default="1e-3")
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    n = args.size
    img = shepp_logan(n)
    rt = radon_forward(img, make_geometry(n, args.dtheta))
    ss = rt.with_values(smooth_sinogram(rt.values, GaussianKernel(args.sigma)), Provenance("ssrt", args.sigma))
    # the 512 profile (row 280, x 50..300) rescaled to this size
    row, cols = round(280 * n / 512), (round(50 * n / 512), round(300 * n / 512))
    gammas = [float(g) for g in args.gammas.split(",")]
    configs = {"radon_fbp": (rt, ReconConfig("radon_fbp", n)), "ssrt_fbp": (ss, ReconConfig("ssrt_fbp", n, args.sigma, args.k))}
    for g in gammas:
        configs[f"deconv_rad_fbp(gamma={g:g})"] = (ss, ReconConfig("deconv_rad_fbp", n, args.sigma, args.k, g))

    scores = {name: [] for name in configs}
    for seed in range(args.repeats):
        model = NoiseModel(args.i0, args.sigma_n, args.mu_max, seed)
        noisy = {"rt": add_ct_noise(rt, model), "ss": add_ct_noise(ss, model)}
        for name, (clean, cfg) in configs.items():
            sino = noisy["rt"] if clean is rt else noisy["ss"]
            rec = reconstruct(sino, cfg)
            scores[name].append((psnr(img, rec), ssim(img, rec), profile_mae(img, rec, row, cols)))

    print(f"{'method':<28}{'PSNR':>8}{'SSIM':>8}{'MAE':>8}")
    for name, vals in scores.items():
        p, s, m = np.mean(vals, axis=0)
        print(f"{name:<28}{p:8.2f}{s:8.3f}{m:8.2f}")


if __name__ == "__main__":
    main()
