"""Command-line interface.

Subcommands: denoise, demosaic, corrupt, metrics, sample, oracle-check.
Every run prints its fully resolved configuration to standard error before
computing; rerunning with that configuration reproduces the output bit for
bit. Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .degradations import corrupt, parse_noise_spec, rggb_mask
from .errors import (
    CodecError,
    ConfigurationError,
    DomainError,
    GridRangeError,
    NumericalError,
    UnsupportedResolutionError,
    VbdenoiseError,
    WeightsFormatError,
)
from .imageio import from_unit, load_image, save_image, to_unit
from .metrics import psnr, ssim
from .oracle import report_to_json, standard_battery, vb_vs_oracle_report
from .priors import GaussianMixtureEpsilon, GaussianMixturePrior, MixtureComponent, single_gaussian_prior
from .restore import RestorationConfig, demosaic, denoise
from .sampling import PredictorError, sample_unconditional
from .schedule import build_schedule
from .weights_io import load_tiny_predictor

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def make_predictor(selector: str, sched):
    """Build a noise predictor from a CLI selector:
    gauss:c=<v> | gmm:<spec-file> | tiny:<weights-file>."""
    kind, _, arg = selector.partition(":")
    if kind == "gauss":
        key, _, value = arg.partition("=")
        if key != "c" or not value:
            raise ConfigurationError(f"bad prior selector '{selector}' (expected gauss:c=<v>)")
        return GaussianMixtureEpsilon(single_gaussian_prior(0.0, float(value)), sched)
    if kind == "gmm":
        with open(arg) as f:
            spec = json.load(f)
        comps = tuple(
            MixtureComponent(float(c["weight"]), float(c["mean"]), float(c["variance"]))
            for c in spec["components"]
        )
        return GaussianMixtureEpsilon(GaussianMixturePrior(comps), sched)
    if kind == "tiny":
        return load_tiny_predictor(arg)
    raise ConfigurationError(f"unknown prior kind '{kind}' in selector '{selector}'")


def _echo_config(command: str, resolved: dict) -> None:
    print(json.dumps({"command": command, **resolved}, sort_keys=True), file=sys.stderr)


def _progress(t_total: int):
    def on_step(record):
        done = t_total - record.t + 1
        if done % 25 == 0 or done == t_total:
            print(f"step {done}/{t_total}", file=sys.stderr)

    return on_step


def _restoration_config(args) -> RestorationConfig:
    kernel_scale = args.kernel_scale
    if kernel_scale is None:
        if not args.no_rectify:
            raise ConfigurationError("--kernel-scale is required unless --no-rectify is given")
        kernel_scale = 1.0
    return RestorationConfig(
        beta=args.beta,
        kernel_scale=kernel_scale,
        alpha=args.alpha,
        gamma=args.gamma,
        kernel_size=args.kernel_size,
        T=args.steps,
        seed=args.seed,
        enable_ale=not args.no_ale,
        enable_rectify=not args.no_rectify,
    )


def _run_restoration_batch(args, config: RestorationConfig, masked: bool) -> int:
    if len(args.input) != len(args.output):
        raise ConfigurationError(
            f"{len(args.input)} inputs but {len(args.output)} outputs"
        )
    if args.emit_variance and len(args.input) > 1:
        raise ConfigurationError("--emit-variance supports a single input image")

    sched = build_schedule(config.T, config.eta_start, config.eta_end)

    def process(index: int) -> None:
        y0 = load_image(args.input[index])
        cfg = config if len(args.input) == 1 else _reseed(config, config.seed + index)
        predictor = make_predictor(args.prior, sched)
        on_step = _progress(cfg.T) if args.jobs == 1 and len(args.input) == 1 else None
        if masked:
            mask = rggb_mask(y0.shape[0], y0.shape[1])
            result = demosaic(mask * y0, mask, predictor, cfg, on_step=on_step)
        else:
            result = denoise(y0, predictor, cfg, on_step=on_step)
        save_image(result.image, args.output[index])
        if args.emit_variance:
            vmap = result.noise_variance.mean(axis=2, keepdims=True)
            vmax = vmap.max()
            save_image(from_unit(vmap / vmax if vmax > 0 else vmap), args.emit_variance)

    if args.jobs > 1 and len(args.input) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(process, range(len(args.input))))
    else:
        for i in range(len(args.input)):
            process(i)
    return EXIT_OK


def _reseed(config: RestorationConfig, seed: int) -> RestorationConfig:
    from dataclasses import replace

    return replace(config, seed=seed)


def cmd_denoise(args) -> int:
    config = _restoration_config(args)
    _echo_config("denoise", {**_config_dict(args, config)})
    return _run_restoration_batch(args, config, masked=False)


def cmd_demosaic(args) -> int:
    if args.pattern != "rggb":
        raise ConfigurationError(f"unsupported CFA pattern '{args.pattern}'")
    config = _restoration_config(args)
    _echo_config("demosaic", {"pattern": args.pattern, **_config_dict(args, config)})
    return _run_restoration_batch(args, config, masked=True)


def _config_dict(args, config: RestorationConfig) -> dict:
    return {
        "input": list(args.input),
        "output": list(args.output),
        "prior": args.prior,
        "alpha": config.alpha,
        "beta": config.beta,
        "gamma": config.gamma,
        "kernel_size": config.kernel_size,
        "kernel_scale": config.kernel_scale,
        "steps": config.T,
        "eta_start": config.eta_start,
        "eta_end": config.eta_end,
        "seed": config.seed,
        "enable_ale": config.enable_ale,
        "enable_rectify": config.enable_rectify,
        "emit_variance": args.emit_variance,
        "jobs": args.jobs,
    }


def cmd_corrupt(args) -> int:
    spec = parse_noise_spec(args.noise)
    _echo_config(
        "corrupt",
        {"input": args.input, "output": args.output, "noise": args.noise, "seed": args.seed},
    )
    x = load_image(args.input)
    rng = np.random.default_rng(args.seed)
    if spec.kind in ("poisson", "bernoulli"):
        y = from_unit(corrupt(to_unit(x), spec, rng))
    else:
        y = corrupt(x, spec, rng)
    save_image(y, args.output)
    return EXIT_OK


def cmd_metrics(args) -> int:
    if len(args.ref) != len(args.test):
        raise ConfigurationError(f"{len(args.ref)} refs but {len(args.test)} tests")
    _echo_config("metrics", {"ref": list(args.ref), "test": list(args.test)})
    print(f"{'reference':<30} {'test':<30} {'PSNR(dB)':>9} {'SSIM':>7}")
    for ref_path, test_path in zip(args.ref, args.test):
        ref = load_image(ref_path)
        test = load_image(test_path)
        p = psnr(ref, test, peak=2.0)
        s = ssim(ref, test, dynamic_range=2.0)
        print(f"{ref_path:<30} {test_path:<30} {p:>9.3f} {s:>7.4f}")
        print(json.dumps({"ref": ref_path, "test": test_path, "psnr_db": p, "ssim": s}))
    return EXIT_OK


def cmd_sample(args) -> int:
    _echo_config(
        "sample",
        {
            "prior": args.prior,
            "width": args.width,
            "height": args.height,
            "channels": args.channels,
            "steps": args.steps,
            "seed": args.seed,
            "output": args.output,
        },
    )
    sched = build_schedule(args.steps)
    predictor = make_predictor(args.prior, sched)
    channels = getattr(predictor, "channels", None) or args.channels
    image = sample_unconditional(predictor, sched, args.height, args.width, channels, args.seed)
    save_image(np.clip(image, -1.0, 1.0), args.output)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    _echo_config(
        "oracle-check",
        {"count": args.count, "seed": args.seed, "grid_points": args.grid_points, "output": args.output},
    )
    problems = standard_battery(args.count, args.seed)
    report = vb_vs_oracle_report(problems, grid_points=args.grid_points)
    with open(args.output, "w") as f:
        f.write(report_to_json(report))
    bad = sum(1 for e in report["problems"] if not e["monotone"])
    print(f"{len(report['problems'])} problems checked, {bad} monotonicity violations")
    return EXIT_OK if bad == 0 else EXIT_NUMERIC


def _add_restoration_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--output", nargs="+", required=True)
    p.add_argument("--prior", required=True, help="gauss:c=<v> | gmm:<file> | tiny:<file>")
    p.add_argument("--beta", type=float, required=True, help="Gamma rate prior (dataset dependent)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--kernel-size", type=int, default=9)
    p.add_argument("--kernel-scale", type=float, default=None, help="dataset dependent; required unless --no-rectify")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--no-ale", action="store_true")
    p.add_argument("--no-rectify", action="store_true")
    p.add_argument("--emit-variance", default=None, help="write the final noise-variance map as a PNG")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vbdenoise")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("denoise", help="variational denoising with a diffusion prior")
    _add_restoration_flags(p)
    p.set_defaults(handler=cmd_denoise)

    p = sub.add_parser("demosaic", help="masked restoration of a mosaicked image")
    p.add_argument("--pattern", required=True, choices=["rggb"])
    _add_restoration_flags(p)
    p.set_defaults(handler=cmd_demosaic)

    p = sub.add_parser("corrupt", help="apply synthetic degradation")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--noise", required=True, help="poisson:30 | bernoulli:0.2 | gaussian:0.1 | correlated:0.1,9,1.0")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(handler=cmd_corrupt)

    p = sub.add_parser("metrics", help="PSNR/SSIM between image pairs")
    p.add_argument("--ref", nargs="+", required=True)
    p.add_argument("--test", nargs="+", required=True)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("sample", help="unconditional ancestral sampling")
    p.add_argument("--prior", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("oracle-check", help="CAVI vs grid-oracle verification report")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--grid-points", type=int, default=2048)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigurationError, DomainError, UnsupportedResolutionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CodecError, WeightsFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GridRangeError, NumericalError, PredictorError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VbdenoiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
