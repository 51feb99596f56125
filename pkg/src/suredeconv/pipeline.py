"""End-to-end restoration pipeline: configuration, scoring, reports.

Internal processing is double precision on the [0, 255] scale; clamping and
rounding happen only when writing 8-bit files.  SNR is computed on the
unclamped estimate.
"""

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image

from .degradation import (
    BlurSpec,
    DegradationModel,
    apply_inverse_h,
    degrade,
    gamma_for_bsnr,
    make_blur_response,
    pilot_inverse,
)
from .estimators import LetSpec, apply_theta
from .frames import (
    ORTHONORMAL,
    analyze,
    build_frame,
    gamma_bar,
    subband_noise_std,
    synthesize,
)
from .risk import lambda_heuristic, select_chi, sure_estimate
from .solver import optimize_let
from .spectral import dft_forward, dft_inverse, mean_square

CONFIG_ENV_VAR = "SUREDECONV_CONFIG"

CSV_COLUMNS = ("image", "blur", "bsnr_db", "method", "n_seeds", "snr_in_db",
               "snr_db", "e_hat", "variance_hat", "chi", "runtime_s", "status")


@dataclass(frozen=True)
class ExperimentConfig:
    """One restoration run (or one cell of a table sweep)."""

    input: str = ""
    blur: str = "dirac"
    bsnr_db: float | None = None
    gamma: float | None = None
    seed: int = 0
    frame: str = "undecimated"
    wavelet: str = "sym8"
    levels: int = 4
    estimator: str = "blu"       # blu | tanh | identity | zero
    omega: float = 3.0
    xi: float = 3.5
    omega_p: float = 2.25
    lam: str = "heuristic"       # 'heuristic' or a number as text
    chi: str = "auto"            # 'auto' or a number as text
    noise_var: str = "known"     # known | mad
    variance: str = "auto"       # auto | on | off
    out: str = ""
    csv: str = ""
    jobs: int = 1
    crop: int = 0                # optional center crop for desk-scale runs

    def degradation_mode(self):
        if (self.bsnr_db is None) == (self.gamma is None):
            raise ValueError("exactly one of bsnr_db / gamma must be set")
        return "bsnr" if self.bsnr_db is not None else "gamma"


_CONFIG_FLOAT_KEYS = {"bsnr_db", "gamma", "omega", "xi", "omega_p"}
_CONFIG_INT_KEYS = {"seed", "levels", "jobs", "crop"}
_CONFIG_ALIASES = {"lambda": "lam", "bsnr": "bsnr_db"}


def parse_config(path=None, overrides=None):
    """Flat key=value config file plus override pairs; '#' starts a comment."""
    values = {}
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path:
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    for key, val in (overrides or {}).items():
        if val is not None:
            values[str(key)] = val
    kwargs = {}
    for key, val in values.items():
        key = _CONFIG_ALIASES.get(key, key)
        if key in _CONFIG_FLOAT_KEYS:
            kwargs[key] = None if str(val).lower() in ("", "none") else float(val)
        elif key in _CONFIG_INT_KEYS:
            kwargs[key] = int(val)
        else:
            kwargs[key] = val
    return ExperimentConfig(**kwargs)


@dataclass
class ScoreRow:
    image: str
    blur: str
    bsnr_db: float
    method: str
    snr_in_db: float
    snr_db: float
    e_hat: float
    variance_hat: float
    chi: float
    runtime_s: float
    n_seeds: int = 1
    status: str = "ok"

    def as_csv_row(self):
        def fmt(x):
            if isinstance(x, float):
                return "" if math.isnan(x) else f"{x:.6g}"
            return str(x)
        return [fmt(getattr(self, col)) for col in CSV_COLUMNS]


def load_image(path):
    """8-bit grayscale PGM/PNG to a float field on the [0, 255] scale."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=float)


def save_image(field, path):
    """Clamp to [0, 255], round, and write 8-bit PGM or PNG by extension."""
    data = np.clip(np.round(field), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def snr_db(s, s_hat):
    """10 log10 of signal mean square over error mean square (dB)."""
    s = np.asarray(s, dtype=float)
    err = mean_square(s - np.asarray(s_hat))
    if err == 0.0:
        return math.inf
    power = mean_square(s)
    if power == 0.0:
        raise ValueError("reference signal is identically zero")
    return 10.0 * math.log10(power / err)


def mad_noise_estimate(r, wavelet="sym8"):
    """Noise variance from the median absolute deviation of the finest
    diagonal wavelet coefficients (H subband in 1-d, HH in 2-d)."""
    r = np.asarray(r, dtype=float)
    model = DegradationModel.build(np.ones(r.shape, dtype=complex), 1.0, 0.0)
    frame = build_frame(ORTHONORMAL, r.shape, model, 0.0,
                        wavelet=wavelet, levels=1)
    want = "d" if r.ndim == 1 else "dd"
    detail = next(band for band in frame.subbands if band.label == want)
    corr = dft_inverse(dft_forward(r) * np.conj(detail.spectrum))
    coeffs = corr[detail.mask]
    return float((np.median(np.abs(coeffs)) / 0.6745) ** 2)


def wiener_baseline(r, H, gamma, signal_power_estimate=None):
    """Scalar-spectrum Wiener filter with a flat signal-power proxy.

    A simple reference method, not a tuned toolbox implementation.
    """
    r = np.asarray(r, dtype=float)
    D = r.size
    if signal_power_estimate is None:
        var = float(np.mean(r**2) - np.mean(r) ** 2 - gamma)
        signal_power_estimate = max(var, np.finfo(float).eps) * D
    R = dft_forward(r)
    denom = np.abs(H) ** 2 + D * gamma / signal_power_estimate
    return dft_inverse(np.conj(H) * R / denom)


def _build_spec(cfg, n_subbands):
    if cfg.estimator == "identity":
        return LetSpec.identity(n_subbands), False
    if cfg.estimator == "zero":
        return LetSpec.zero(n_subbands), False
    if cfg.estimator == "blu":
        return LetSpec.uniform(n_subbands, ("identity", "blu"),
                               omega=cfg.omega), True
    if cfg.estimator == "tanh":
        return LetSpec.uniform(n_subbands, ("identity", "tanh"),
                               xi=cfg.xi, omega_p=cfg.omega_p), True
    raise ValueError(f"unknown estimator {cfg.estimator!r}")


def _center_crop(img, size):
    if size <= 0 or all(d <= size for d in img.shape):
        return img
    starts = [(d - min(d, size)) // 2 for d in img.shape]
    slices = tuple(slice(st, st + min(d, size)) for st, d in zip(starts, img.shape))
    return img[slices]


def run_restore(cfg, s=None):
    """Full pipeline on one image and seed.

    Returns (s_hat, ScoreRow, RiskReport).  Deterministic for a fixed
    config and seed.
    """
    start = time.perf_counter()
    if s is None:
        s = load_image(cfg.input)
    s = _center_crop(np.asarray(s, dtype=float), cfg.crop)
    blur = BlurSpec.parse(cfg.blur)
    H = make_blur_response(blur, s.shape)

    mode = cfg.degradation_mode()
    gamma_true = (gamma_for_bsnr(s, H, cfg.bsnr_db) if mode == "bsnr"
                  else float(cfg.gamma))
    r = degrade(s, H, gamma_true, cfg.seed)

    gamma = mad_noise_estimate(r, cfg.wavelet) if cfg.noise_var == "mad" \
        else gamma_true
    lam = lambda_heuristic(r, gamma) if cfg.lam == "heuristic" else float(cfg.lam)

    if cfg.chi == "auto":
        chi, model = select_chi(r, H, gamma, cfg.frame, lam,
                                wavelet=cfg.wavelet, levels=cfg.levels)
    else:
        chi = float(cfg.chi)
        model = DegradationModel.build(H, gamma, chi)

    frame = build_frame(cfg.frame, s.shape, model, lam,
                        wavelet=cfg.wavelet, levels=cfg.levels)
    spec, needs_solve = _build_spec(cfg, frame.n_subbands)
    want_variance = cfg.variance == "on" or (
        cfg.variance == "auto" and s.size <= 256 * 256)

    if needs_solve:
        result = optimize_let(r, frame, model, spec,
                              compute_variance=want_variance)
        s_hat, report = result.s_hat, result.report
    else:
        coeffs = analyze(r, frame, model)
        sigmas = subband_noise_std(frame, model)
        est, der = apply_theta(coeffs, spec, sigmas)
        s_hat = synthesize(est, frame, model)
        report = sure_estimate(s_hat, pilot_inverse(r, model), der,
                               gamma_bar(frame, model), model)
        if want_variance:
            from .risk import sure_variance_estimate
            report.variance_hat = sure_variance_estimate(
                apply_inverse_h(s_hat, model),
                pilot_inverse(r, model, doubly=True),
                der, frame, model)

    elapsed = time.perf_counter() - start
    row = ScoreRow(
        image=os.path.basename(cfg.input) or "array",
        blur=blur.label(),
        bsnr_db=cfg.bsnr_db if mode == "bsnr" else float("nan"),
        method=cfg.estimator,
        snr_in_db=snr_db(s, r),
        snr_db=snr_db(s, s_hat),
        e_hat=report.e_hat,
        variance_hat=report.variance_hat
        if report.variance_hat is not None else float("nan"),
        chi=chi,
        runtime_s=elapsed,
    )
    if cfg.out:
        save_image(s_hat, cfg.out)
    return s_hat, row, report


def _run_cell(args):
    cfg, seeds, image = args
    if image is None and cfg.input:
        image = load_image(cfg.input)
    rows = []
    for seed in seeds:
        _, row, _ = run_restore(replace(cfg, seed=seed, out=""), s=image)
        rows.append(row)
    return _aggregate(rows)


def _aggregate(rows):
    med = lambda xs: float(np.median(xs))
    first = rows[0]
    return ScoreRow(
        image=first.image, blur=first.blur, bsnr_db=first.bsnr_db,
        method=first.method,
        snr_in_db=med([r.snr_in_db for r in rows]),
        snr_db=med([r.snr_db for r in rows]),
        e_hat=med([r.e_hat for r in rows]),
        variance_hat=med([r.variance_hat for r in rows]),
        chi=med([r.chi for r in rows]),
        runtime_s=float(np.sum([r.runtime_s for r in rows])),
        n_seeds=len(rows),
    )


def run_table(configs, n_seeds=1, jobs=1, csv_path=None):
    """Run each config over n_seeds seeds; report per-cell median scores.

    A failing cell is recorded with status=error and the sweep continues.
    """
    tasks = []
    for cfg in configs:
        seeds = [cfg.seed + k for k in range(n_seeds)]
        tasks.append((replace(cfg, csv=""), seeds, None))
    rows = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, t) for t in tasks]
            for task, fut in zip(tasks, futures):
                try:
                    rows.append(fut.result())
                except Exception as err:  # noqa: BLE001 - cell isolation
                    rows.append(_error_row(task[0], err))
    else:
        for task in tasks:
            try:
                rows.append(_run_cell(task))
            except Exception as err:  # noqa: BLE001 - cell isolation
                rows.append(_error_row(task[0], err))
    if csv_path:
        write_csv(rows, csv_path)
    return rows


def _error_row(cfg, err):
    nan = float("nan")
    return ScoreRow(image=os.path.basename(cfg.input) or "array",
                    blur=cfg.blur, bsnr_db=cfg.bsnr_db or nan,
                    method=cfg.estimator, snr_in_db=nan, snr_db=nan,
                    e_hat=nan, variance_hat=nan, chi=nan, runtime_s=nan,
                    status=f"error:{type(err).__name__}")


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv_row())
