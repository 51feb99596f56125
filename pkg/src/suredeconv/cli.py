"""Command-line interface: degrade, restore, evaluate, table, verify-stein."""

import argparse
import sys
from dataclasses import replace

import numpy as np

from .degradation import BlurSpec, degrade, gamma_for_bsnr, make_blur_response
from .errors import SureDeconvError
from .pipeline import (
    ExperimentConfig,
    load_image,
    parse_config,
    run_restore,
    run_table,
    save_image,
    snr_db,
    write_csv,
)
from .stein import run_suite


def _add_common_flags(p):
    p.add_argument("--config", help="key=value config file "
                   "(default from $SUREDECONV_CONFIG)")
    p.add_argument("--blur", help="dirac | uniform:5x5 | gaussian:2 | cosine:3/32")
    p.add_argument("--bsnr", type=float, help="target blurred SNR in dB")
    p.add_argument("--gamma", type=float, help="noise variance (instead of --bsnr)")
    p.add_argument("--seed", type=int)
    p.add_argument("--frame", choices=["orthonormal", "undecimated", "shifted-union"])
    p.add_argument("--wavelet")
    p.add_argument("--levels", type=int)
    p.add_argument("--estimator", choices=["blu", "tanh", "identity", "zero"])
    p.add_argument("--chi", help="'auto' or a fixed threshold value")
    p.add_argument("--lambda", dest="lam", help="'heuristic' or a fixed value")
    p.add_argument("--noise-var", dest="noise_var", choices=["known", "mad"])
    p.add_argument("--variance", choices=["auto", "on", "off"])
    p.add_argument("--crop", type=int, help="center-crop size for quick runs")
    p.add_argument("--out", help="output image path")
    p.add_argument("--csv", help="output CSV path")
    p.add_argument("--jobs", type=int, help="parallel workers for table runs")


def _config_from_args(args):
    overrides = {k: v for k, v in vars(args).items()
                 if k in ExperimentConfig.__dataclass_fields__ and v is not None}
    if getattr(args, "bsnr", None) is not None:
        overrides["bsnr_db"] = args.bsnr
    if getattr(args, "input", None):
        overrides["input"] = args.input
    return parse_config(args.config, overrides)


def cmd_degrade(args):
    cfg = _config_from_args(args)
    s = load_image(cfg.input)
    blur = BlurSpec.parse(cfg.blur)
    H = make_blur_response(blur, s.shape)
    mode = cfg.degradation_mode()
    gamma = gamma_for_bsnr(s, H, cfg.bsnr_db) if mode == "bsnr" else cfg.gamma
    r = degrade(s, H, gamma, cfg.seed)
    save_image(r, cfg.out or "degraded.png")
    print(f"gamma={gamma:.6g} snr_in={snr_db(s, r):.2f} dB -> {cfg.out or 'degraded.png'}")
    return 0


def cmd_restore(args):
    cfg = _config_from_args(args)
    _, row, report = run_restore(cfg)
    print(f"image={row.image} blur={row.blur} method={row.method} "
          f"snr_in={row.snr_in_db:.2f} dB snr={row.snr_db:.2f} dB "
          f"e_hat={row.e_hat:.6g} chi={row.chi:.4g} card_q={report.card_q}")
    if cfg.csv:
        write_csv([row], cfg.csv)
    return 0


def cmd_evaluate(args):
    s = load_image(args.reference)
    s_hat = load_image(args.estimate)
    print(f"snr={snr_db(s, s_hat):.4f} dB")
    return 0


def cmd_table(args):
    cfg = _config_from_args(args)
    bsnrs = [float(b) for b in args.bsnr_list.split(",")] if args.bsnr_list \
        else [cfg.bsnr_db]
    methods = args.methods.split(",") if args.methods else [cfg.estimator]
    cells = [replace(cfg, bsnr_db=b, gamma=None, estimator=m)
             for b in bsnrs for m in methods]
    rows = run_table(cells, n_seeds=args.reps, jobs=cfg.jobs or 1,
                     csv_path=cfg.csv or None)
    for row in rows:
        print(f"{row.image} {row.blur} bsnr={row.bsnr_db:g} {row.method} "
              f"median_snr={row.snr_db:.2f} dB ({row.status})")
    return 0 if all(r.status == "ok" for r in rows) else 1


def cmd_verify_stein(args):
    reports = run_suite(n_samples=args.samples, seed=args.seed)
    for rep in reports:
        print(rep.line())
    n_fail = sum(not rep.passed for rep in reports)
    print(f"{len(reports) - n_fail}/{len(reports)} identity checks passed")
    return 0 if n_fail == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="suredeconv",
        description="Frame-based deconvolution driven by an unbiased "
                    "quadratic risk estimate")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="blur an image and add calibrated noise")
    p.add_argument("input")
    _add_common_flags(p)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("restore", help="degrade (optionally) and restore an image")
    p.add_argument("input")
    _add_common_flags(p)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("evaluate", help="SNR between a reference and an estimate")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("table", help="median-over-seeds sweep to CSV")
    p.add_argument("input")
    p.add_argument("--bsnr-list", help="comma-separated BSNR values in dB")
    p.add_argument("--methods", help="comma-separated estimator names")
    p.add_argument("--reps", type=int, default=10, help="noise draws per cell")
    _add_common_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify-stein", help="Monte-Carlo identity suite")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=1234)
    p.set_defaults(func=cmd_verify_stein)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SureDeconvError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
