"""``ssrt-tomo`` command line driver.

Subcommands: phantom, project, corrupt, reconstruct, metrics, sweep, ridge.
Every subcommand also accepts ``--config FILE`` with ``key=value`` lines; the
keys mirror the long flag names (``sigma-n`` or ``sigma_n``), and explicit
flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from ssrt_tomo.experiment import (
    DEFAULT_DTHETAS,
    DEFAULT_SIGMAS,
    SweepConfig,
    load_phantom,
    read_table,
    render_heatmap,
    run_sweep,
    sigma_opt_ridge,
    write_table,
)
from ssrt_tomo.geometry import load_sinogram_csv, make_geometry, read_keyvalue, save_sinogram_csv, write_keyvalue
from ssrt_tomo.metrics import QualityReport
from ssrt_tomo.noise import NoiseModel, add_ct_noise
from ssrt_tomo.phantom import load_pgm, save_pgm
from ssrt_tomo.projection import ssrt_forward
from ssrt_tomo.reconstruction import METHODS, ReconConfig, reconstruct

DEFAULTS = {
    "phantom": "shepp_logan",
    "size": 256,
    "sigma": 0.0,
    "dtheta": 1.0,
    "method": "ssrt_fbp",
    "i0": None,
    "sigma_n": 0.0,
    "k": 0.02,
    "gamma": 1e-3,
    "mu_max": 6.0,
    "seed": 0,
    "repeats": 20,
    "input": None,
    "reference": None,
    "out": None,
    "metric": "psnr",
    # sweep only
    "sigmas": None,
    "dthetas": None,
    "noise": "none",
    "methods": ",".join(METHODS),
    "timing": False,
    "heatmap": None,
}
TYPES = {
    "size": int, "sigma": float, "dtheta": float, "i0": float, "sigma_n": float, "k": float,
    "gamma": float, "mu_max": float, "seed": int, "repeats": int,
}


class UsageError(Exception):
    pass


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _noise_list(text: str) -> tuple:
    """``none`` or ``I0:sigma_n`` items separated by ``;`` (``none`` may be mixed in)."""
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        if item == "none":
            out.append(None)
            continue
        try:
            i0, sn = item.split(":")
            out.append((float(i0), float(sn)))
        except ValueError as exc:
            raise UsageError(f"bad noise setting {item!r}; expected I0:sigma_n") from exc
    if not out:
        raise UsageError("empty noise list")
    return tuple(out)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with defaults for any flag")
    common.add_argument("--phantom", help="shepp_logan, disk or a .pgm path")
    common.add_argument("--size", type=int)
    common.add_argument("--sigma", type=float, help="Gaussian scale in detector bins")
    common.add_argument("--dtheta", type=float, help="angular step in degrees")
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--i0", type=float, help="incident photons per ray")
    common.add_argument("--sigma-n", dest="sigma_n", type=float, help="electronic noise std (counts)")
    common.add_argument("--k", type=float, help="Wiener constant")
    common.add_argument("--gamma", type=float, help="deconvolution regularization weight")
    common.add_argument("--seed", type=int)
    common.add_argument("--repeats", type=int)
    common.add_argument("--input", help="input sinogram CSV, image PGM or sweep CSV")
    common.add_argument("--reference", help="reference PGM for metrics")
    common.add_argument("--out", help="output path")

    parser = argparse.ArgumentParser(prog="ssrt-tomo", description="SSRT tomography experiments")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    sub.add_parser("phantom", parents=[common], help="write a phantom PGM")
    sub.add_parser("project", parents=[common], help="write an RT (sigma 0) or SSRT sinogram CSV")
    sub.add_parser("corrupt", parents=[common], help="add Poisson-Gaussian noise to a sinogram CSV")
    sub.add_parser("reconstruct", parents=[common], help="reconstruct to PGM plus a report")
    sub.add_parser("metrics", parents=[common], help="compare a PGM against a reference")
    sweep = sub.add_parser("sweep", parents=[common], help="run a sigma x dtheta x noise sweep")
    sweep.add_argument("--sigmas", help="comma separated sigma grid")
    sweep.add_argument("--dthetas", help="comma separated dtheta grid (degrees)")
    sweep.add_argument("--noise", help="'none' or I0:sigma_n items separated by ';'")
    sweep.add_argument("--methods", help="comma separated subset of the methods")
    sweep.add_argument("--heatmap", help="also write a PNG heatmap here")
    sweep.add_argument("--timing", action="store_const", const=True, help="record wall-clock runtimes")
    ridge = sub.add_parser("ridge", parents=[common], help="best sigma per dtheta from a sweep CSV")
    ridge.add_argument("--metric", choices=("psnr", "ssim"))
    ridge.add_argument("--heatmap", help="also write a PNG heatmap here")
    return parser


def _settings(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if ns.config:
        try:
            from_file = read_keyvalue(ns.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        for key, value in from_file.items():
            key = key.replace("-", "_")
            if key not in opts:
                raise UsageError(f"unknown config key {key!r}")
            opts[key] = value
    for key, value in vars(ns).items():
        if key in opts and value is not None:
            opts[key] = value
    try:
        for key, cast in TYPES.items():
            if opts[key] is not None and opts[key] != "none":
                opts[key] = cast(opts[key])
            elif opts[key] == "none":
                opts[key] = None
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    opts["timing"] = _bool(opts["timing"])
    return opts


def _need(opts: dict, *keys) -> None:
    for key in keys:
        if opts.get(key) in (None, ""):
            raise UsageError(f"--{key.replace('_', '-')} is required")


def _noise_model(opts: dict) -> Optional[NoiseModel]:
    if opts["i0"] is None:
        return None
    return NoiseModel(opts["i0"], opts["sigma_n"] or 0.0, opts["mu_max"], opts["seed"])


def _source_sinogram(opts: dict):
    """Sinogram from --input, or simulated from --phantom/--size/--sigma/--dtheta (+ noise)."""
    if opts["input"]:
        return load_sinogram_csv(opts["input"]), None
    img = load_phantom(opts["phantom"], opts["size"])
    sino = ssrt_forward(img, make_geometry(img.width, opts["dtheta"]), opts["sigma"])
    model = _noise_model(opts)
    if model is not None:
        sino = add_ct_noise(sino, model)
    return sino, img


def cmd_phantom(opts: dict) -> int:
    _need(opts, "out")
    save_pgm(load_phantom(opts["phantom"], opts["size"]), opts["out"])
    return 0


def cmd_project(opts: dict) -> int:
    _need(opts, "out")
    img = load_phantom(opts["phantom"], opts["size"])
    sino = ssrt_forward(img, make_geometry(img.width, opts["dtheta"]), opts["sigma"])
    save_sinogram_csv(sino, opts["out"])
    return 0


def cmd_corrupt(opts: dict) -> int:
    _need(opts, "input", "i0", "out")
    sino = load_sinogram_csv(opts["input"])
    save_sinogram_csv(add_ct_noise(sino, _noise_model(opts)), opts["out"])
    return 0


def cmd_reconstruct(opts: dict) -> int:
    _need(opts, "out")
    sino, truth = _source_sinogram(opts)
    size = truth.width if truth is not None else opts["size"]
    sigma = sino.sigma
    cfg = ReconConfig(opts["method"], size, sigma, opts["k"], opts["gamma"])
    t0 = time.perf_counter()
    img = reconstruct(sino, cfg)
    elapsed = time.perf_counter() - t0
    save_pgm(img, opts["out"])
    report = {
        "method": cfg.method,
        "sigma": repr(sigma),
        "k": repr(cfg.wiener_k),
        "gamma": repr(cfg.deconv_gamma),
        "dtheta_deg": repr(round(sino.geometry.delta_theta_deg, 12)),
        "runtime_seconds": f"{elapsed:.6f}",
    }
    if truth is not None:
        for key, value in QualityReport.compare(truth, img).as_dict().items():
            if key != "runtime_seconds":
                report[key] = value
    write_keyvalue(str(opts["out"]) + ".report", report)
    return 0


def cmd_metrics(opts: dict) -> int:
    _need(opts, "input", "reference")
    report = QualityReport.compare(load_pgm(opts["reference"]), load_pgm(opts["input"]))
    items = {k: v for k, v in report.as_dict().items() if k != "runtime_seconds"}
    if opts["out"]:
        write_keyvalue(opts["out"], items)
    for key, value in items.items():
        print(f"{key}={value}")
    return 0


def _sweep_config(opts: dict) -> SweepConfig:
    sigmas = _floats(opts["sigmas"]) if opts["sigmas"] else DEFAULT_SIGMAS
    dthetas = _floats(opts["dthetas"]) if opts["dthetas"] else DEFAULT_DTHETAS
    noise = tuple(
        None if n is None else NoiseModel(n[0], n[1], opts["mu_max"]) for n in _noise_list(opts["noise"])
    )
    methods = tuple(m.strip() for m in opts["methods"].split(",") if m.strip())
    return SweepConfig(
        phantom=opts["phantom"],
        size=opts["size"],
        sigma_grid=sigmas,
        delta_theta_grid=dthetas,
        noise_settings=noise,
        n_repeats=opts["repeats"],
        methods=methods,
        wiener_k=opts["k"],
        deconv_gamma=opts["gamma"],
        base_seed=opts["seed"],
        record_runtime=opts["timing"],
    )


def cmd_sweep(opts: dict) -> int:
    _need(opts, "out")
    cfg = _sweep_config(opts)
    rows = run_sweep(cfg)
    write_table(rows, opts["out"], cfg.n_repeats)
    if opts["heatmap"]:
        first = cfg.noise_settings[0]
        key = (None, None) if first is None else (first.incident_flux, first.electronic_std)
        render_heatmap(rows, opts["metric"], opts["heatmap"], noise_key=key)
    return 0


def cmd_ridge(opts: dict) -> int:
    _need(opts, "input")
    rows = read_table(opts["input"])
    noise_key = None
    if opts["i0"] is not None:
        noise_key = (opts["i0"], opts["sigma_n"])
    elif len({r.noise_key for r in rows}) > 1:
        noise_key = (None, None)
    method = opts["method"]
    ridge = sigma_opt_ridge(rows, opts["metric"], method, noise_key)
    lines = ["dtheta_deg,sigma_opt"] + [f"{d!r},{s!r}" for d, s in ridge]
    if opts["out"]:
        Path(opts["out"]).write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if opts["heatmap"]:
        render_heatmap(rows, opts["metric"], opts["heatmap"], methods=[method], noise_key=noise_key)
    return 0


COMMANDS = {
    "phantom": cmd_phantom,
    "project": cmd_project,
    "corrupt": cmd_corrupt,
    "reconstruct": cmd_reconstruct,
    "metrics": cmd_metrics,
    "sweep": cmd_sweep,
    "ridge": cmd_ridge,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; 0 on success, 2 on usage errors, 1 on I/O failures."""
    parser = _parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[ns.command](_settings(ns))
    except (UsageError, ValueError) as exc:
        print(f"ssrt-tomo {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ssrt-tomo {ns.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
