"""Median reconstruction runtimes per method (512 Shepp-Logan, dtheta=1 deg by default)."""

import argparse
import statistics
import time

from ssrt_tomo import ReconConfig, make_geometry, radon_forward, reconstruct, shepp_logan, ssrt_forward


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--dtheta", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=2.0)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    img = shepp_logan(args.size)
    geom = make_geometry(args.size, args.dtheta)
    rt, ss = radon_forward(img, geom), ssrt_forward(img, geom, args.sigma)
    jobs = {
        "radon_fbp": (rt, ReconConfig("radon_fbp", args.size)),
        "ssrt_fbp": (ss, ReconConfig("ssrt_fbp", args.size, args.sigma)),
        "deconv_rad_fbp": (ss, ReconConfig("deconv_rad_fbp", args.size, args.sigma)),
    }
    for sino, cfg in jobs.values():
        reconstruct(sino, cfg)
    times = {m: [] for m in jobs}
    for _ in range(args.repeats):
        for m, (sino, cfg) in jobs.items():
            t0 = time.perf_counter()
            reconstruct(sino, cfg)
            times[m].append(time.perf_counter() - t0)
    base = statistics.median(times["radon_fbp"])
    for m, v in times.items():
        med = statistics.median(v)
        print(f"{m:<16} median {med:.4f} s  ratio to radon_fbp {med / base:.2f}")


if __name__ == "__main__":
    main()
