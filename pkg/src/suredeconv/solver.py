"""Normal equations for the expansion weights and the end-to-end fit."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .degradation import apply_inverse_h, pilot_inverse
from .errors import SingularSystem
from .estimators import apply_theta, beta_fields
from .frames import analyze, gamma_bar, gamma_bar_cross, subband_noise_std
from .risk import RiskReport, sure_estimate, sure_variance_estimate

RIDGE_LADDER = (0.0, 1e-8, 1e-6)


@dataclass
class NormalSystem:
    """Gram matrix and right-hand side of the weight equations."""

    gram: np.ndarray
    rhs: np.ndarray
    index: list  # flat position -> (subband, term)


@dataclass
class SolveResult:
    weights: np.ndarray
    ridge: float
    condition: float


@dataclass
class OptimizeResult:
    weights: tuple
    report: RiskReport
    s_hat: np.ndarray
    spec: object


def assemble(betas, index, pilot, fprime_gbar_sums, gamma):
    """Build the normal equations from the per-term synthesized fields.

    fprime_gbar_sums[k] must hold sum_l f'_(m,i)(r_l) * gbar_m for the k-th
    (m, i) term; the right-hand side subtracts gamma times that penalty
    from the data correlation <beta, pilot>.
    """
    n = len(betas)
    gram = np.empty((n, n))
    flat = [b.ravel() for b in betas]
    for a in range(n):
        for b in range(a, n):
            gram[a, b] = gram[b, a] = float(flat[a] @ flat[b])
    pilot_flat = np.asarray(pilot).ravel()
    rhs = np.array([float(f @ pilot_flat) for f in flat])
    rhs -= gamma * np.asarray(fprime_gbar_sums)
    return NormalSystem(gram=gram, rhs=rhs, index=list(index))


def solve(system, ridge=0.0):
    """Solve the normal equations by a symmetric factorization.

    A nonzero ridge adds ridge * tr(gram)/dim to the diagonal.  If the
    requested ridge fails (non-PD within tolerance), the ladder retries
    with 1e-8 then 1e-6 before raising SingularSystem.
    """
    gram, rhs = system.gram, system.rhs
    dim = gram.shape[0]
    scale = np.trace(gram) / dim if dim else 0.0
    ladder = [ridge] + [r for r in RIDGE_LADDER if r > ridge]
    last_err = None
    for r in ladder:
        try:
            reg = gram + (r * scale) * np.eye(dim)
            c, low = linalg.cho_factor(reg, check_finite=False)
            weights = linalg.cho_solve((c, low), rhs, check_finite=False)
            diag = np.diag(c)
            condition = float((diag.max() / diag.min()) ** 2) if diag.min() > 0 else np.inf
            return SolveResult(weights=weights, ridge=r, condition=condition)
        except linalg.LinAlgError as err:
            last_err = err
    raise SingularSystem(f"normal equations not solvable: {last_err}")


def optimize_let(r, frame, model, spec, *, ridge=0.0, compute_variance=False,
                 truncation_radius="auto"):
    """Fit the expansion weights minimizing the risk estimate, end to end."""
    coeffs = analyze(r, frame, model)
    sigmas = subband_noise_std(frame, model)
    gbars = gamma_bar(frame, model)
    pilot = pilot_inverse(r, model)
    betas, index, fprime_sums = beta_fields(coeffs, frame, model, spec, sigmas)
    fprime_gbar = [s * gbars[m] for s, (m, _) in zip(fprime_sums, index)]
    system = assemble(betas, index, pilot, fprime_gbar, model.gamma)
    solved = solve(system, ridge)

    weights = [[0.0] * len(f) for f in spec.families]
    for a, (m, i) in zip(solved.weights, index):
        weights[m][i] = float(a)
    fitted = spec.with_weights(weights)

    est, der = apply_theta(coeffs, fitted, sigmas)
    s_hat = np.zeros(frame.shape)
    for a, beta in zip(solved.weights, betas):
        s_hat += a * beta
    report = sure_estimate(s_hat, pilot, der, gbars, model)
    if compute_variance:
        cross = gamma_bar_cross(frame, model, truncation_radius)
        report.variance_hat = sure_variance_estimate(
            apply_inverse_h(s_hat, model),
            pilot_inverse(r, model, doubly=True),
            der, frame, model, cross)
    report.diagnostics = {
        "weights": fitted.weights,
        "ridge": solved.ridge,
        "condition": solved.condition,
        "gamma_bars": gbars.tolist(),
        "sigmas": sigmas.tolist(),
    }
    return OptimizeResult(weights=fitted.weights, report=report,
                          s_hat=s_hat, spec=fitted)


def solve_per_subband(coeffs, pilot_coeffs, spec, gamma_bars, gamma, sigmas):
    """Independent per-subband weight solves for orthonormal synthesis.

    Minimizes the decoupled subband criterion; valid when the projected
    synthesis family is orthonormal (invertible response or denoising).
    """
    weights = []
    for m, fns in enumerate(spec.families):
        rho = coeffs.values[m]
        cols, pens = [], []
        for fn in fns:
            v, d = fn(rho, sigmas[m])
            cols.append(v)
            pens.append(gamma * gamma_bars[m] * d.sum())
        F = np.stack(cols, axis=-1)
        gram = F.T @ F
        rhs = F.T @ pilot_coeffs.values[m] - np.asarray(pens)
        local = solve(NormalSystem(gram, rhs, [(m, i) for i in range(len(fns))]))
        weights.append(list(local.weights))
    return spec.with_weights(weights)
