"""Quadratic risk estimation: observable-risk estimate, its variance
estimate, the threshold search for the observable set, and the decoupled
per-subband criterion for orthonormal synthesis families.
"""

import logging
from dataclasses import dataclass, asdict

import numpy as np

from .degradation import DegradationModel, compute_observable_set
from .errors import EmptyObservableSet, NoAdmissibleChi, NotOrthonormalFlavor
from .frames import (
    ORTHONORMAL,
    build_frame,
    gamma_bar_cross,
    prefilter,
    subband_spectra,
)
from .spectral import dft_forward, mean_square

log = logging.getLogger(__name__)

CHI_BISECTION_STEPS = 20
CHI_SAFETY_FACTOR = 10.0


@dataclass
class RiskReport:
    """Observable risk estimate and its decomposition."""

    data_term: float
    delta_hat: float
    e_hat: float
    chi: float
    card_q: int
    variance_hat: float | None = None
    diagnostics: dict | None = None

    def as_row(self):
        row = asdict(self)
        row.pop("diagnostics")
        return row


def sure_estimate(s_hat, pilot, theta_prime, gamma_bars, model):
    """Unbiased estimate of the observable mean-square estimation error.

    The data term compares the estimate with the inverse-filtered pilot;
    the penalty adds the derivative-weighted correlation constants and
    subtracts the accumulated inverse-response energy.  The unobservable
    part of the risk is unknowable from data and is not included.
    """
    if not model.Q.any():
        raise EmptyObservableSet("observable set is empty")
    D = model.H.size
    gamma = model.gamma
    data_term = mean_square(np.asarray(s_hat) - np.asarray(pilot))
    penalty = sum(g * block.sum()
                  for g, block in zip(gamma_bars, theta_prime.values))
    inv2 = np.sum(1.0 / np.abs(model.H[model.Q]) ** 2)
    delta_hat = (gamma / D) * (2.0 * penalty - inv2)
    return RiskReport(
        data_term=float(data_term),
        delta_hat=float(delta_hat),
        e_hat=float(data_term + delta_hat),
        chi=model.chi,
        card_q=model.card_q,
    )


def _theta_prime_grids(theta_prime, frame):
    """Spectra of the derivative values placed at their atom positions."""
    spectra = []
    for band, values in zip(frame.subbands, theta_prime.values):
        grid = np.zeros(frame.shape)
        grid[band.mask] = values
        spectra.append(np.fft.fftn(grid))
    return spectra


def correlation_double_sum(theta_prime, frame, model, cross):
    """sum_{l,i} theta'_l theta'_i gamma_{l,i} gamma_{i,l} over all pairs.

    Evaluated per subband pair through the correlation-sequence structure:
    the inner double sum is a circular correlation of the derivative grids
    against the product of the two cross tables.
    """
    spectra = _theta_prime_grids(theta_prime, frame)
    D = model.H.size
    total = 0.0
    M = frame.n_subbands
    for m in range(M):
        for mp in range(m, M):
            T_f = cross.table(m, mp)   # gamma_{l,i} = T_f[k_i - k_l]
            T_b = cross.table(mp, m)   # gamma_{i,l} = T_b[k_l - k_i]
            # P(delta) = T_f[-delta] T_b[delta] with delta = k_l - k_i
            P = np.roll(np.flip(T_f), 1, axis=tuple(range(T_f.ndim))) * T_b
            corr = np.fft.ifftn(spectra[m] * np.conj(spectra[mp])).real
            term = float(np.sum(P * corr))
            total += term if m == mp else 2.0 * term
    return total


def sure_variance_estimate(s_hat_h, pilot_h, theta_prime, frame, model,
                           cross=None):
    """Unbiased plug-in estimate of the variance of the risk-estimate error.

    s_hat_h and pilot_h must carry the extra 1/H spectral weighting of the
    variance formula (see degradation.apply_inverse_h / pilot_inverse with
    doubly=True).
    """
    if not model.Q.any():
        raise EmptyObservableSet("observable set is empty")
    if cross is None:
        cross = gamma_bar_cross(frame, model)
    D = model.H.size
    gamma = model.gamma
    if gamma == 0.0:
        return 0.0
    first = (4.0 * gamma / D) * mean_square(np.asarray(s_hat_h) - np.asarray(pilot_h))
    double = correlation_double_sum(theta_prime, frame, model, cross)
    inv4 = float(np.sum(1.0 / np.abs(model.H[model.Q]) ** 4))
    return float(first + (4.0 * gamma**2 / D**2) * double
                 - (2.0 * gamma**2 / D**2) * inv4)


def _identity_probe(R, H, gamma, chi, lam, band_specs, counts):
    """Risk estimate and variance bound for the identity estimator.

    With the identity estimating function the estimate equals the
    prefiltered observation, so everything reduces to spectral sums; the
    derivative-weighted penalty collapses to sum_Q G/H because the dual
    products of any of our frames resolve the identity.  The variance bound
    replaces the data term by its absolute value and the pair double sum by
    its diagonal inflated with a Parseval bound on the off-diagonal mass.
    """
    D = H.size
    Q = compute_observable_set(H, chi)
    card_q = int(Q.sum())
    G = prefilter(H, Q, lam)
    Hq = H[Q]
    absH2 = np.abs(Hq) ** 2
    Rq = R[Q]
    # data term of the risk estimate: E(prefiltered - pilot)
    data = np.sum(np.abs(np.conj(G[Q]) * Rq - Rq / Hq) ** 2) / D**2
    inv2 = float(np.sum(1.0 / absH2))
    goh = 1.0 / (absH2 + lam)  # G/H, real by construction
    e_hat = data + (gamma / D) * (2.0 * float(np.sum(goh)) - inv2)

    # variance bound pieces (identity probe: s_hat = prefiltered obs)
    data_h = np.sum(np.abs(np.conj(G[Q]) * Rq / Hq - Rq / (Hq * Hq)) ** 2) / D**2
    goh2 = goh * goh  # |G|^2 / |H|^2
    diagonal = 0.0
    off_bound = 0.0
    band_pow = [np.abs(spec[Q]) ** 2 for _, dual, spec in band_specs]
    duals = [dual for _, dual, _ in band_specs]
    for m, pm in enumerate(band_pow):
        diagonal += counts[m] * (duals[m] * np.sum(goh * pm) / D) ** 2
        for mp, pmp in enumerate(band_pow):
            pair = (duals[mp] ** 2) * np.sum(goh2 * pm * pmp)
            off_bound += min(counts[m], counts[mp]) * pair / D
    mass = max(off_bound - diagonal, 0.0) / diagonal if diagonal > 0 else 0.0
    v_max = (4.0 * gamma / D) * abs(data_h) \
        + (4.0 * gamma**2 / D**2) * diagonal * (1.0 + mass)
    return float(e_hat), float(v_max), card_q


def select_chi(r, H, gamma, frame_flavor="undecimated", lam=0.0, *,
               wavelet="sym8", levels=4, steps=CHI_BISECTION_STEPS):
    """Smallest threshold whose risk estimate clears the reliability rule.

    Dichotomic search over [0, max|H|): accepts the smallest chi (at the
    bisection resolution) for which the identity-probe risk estimate
    exceeds CHI_SAFETY_FACTOR times the square root of the variance bound.
    """
    H = np.asarray(H)
    hmax = float(np.abs(H).max())
    if hmax <= 0:
        raise NoAdmissibleChi("blur response is identically zero")
    R = dft_forward(np.asarray(r, dtype=float))
    specs = subband_spectra(H.shape, wavelet, levels)
    ndim = H.ndim
    if frame_flavor == "undecimated":
        band_specs = [(lev, 1.0, 2.0 ** (-lev * ndim / 2.0) * spec)
                      for lev, _, spec in specs]
        counts = [H.size] * len(specs)
    elif frame_flavor == ORTHONORMAL:
        band_specs = [(lev, 1.0, spec) for lev, _, spec in specs]
        counts = [H.size // (2 ** (lev * ndim)) for lev, _, spec in specs]
    else:  # shifted-union with the default shift set
        n_sh = 2**ndim
        band_specs = [(lev, 1.0 / n_sh, spec) for lev, _, spec in specs]
        counts = [n_sh * (H.size // (2 ** (lev * ndim))) for lev, _, spec in specs]

    def admissible(chi):
        e_hat, v_max, _ = _identity_probe(R, H, gamma, chi, lam, band_specs, counts)
        return e_hat > CHI_SAFETY_FACTOR * np.sqrt(max(v_max, 0.0))

    if admissible(0.0):
        return 0.0, DegradationModel.build(H, gamma, 0.0)
    lo, hi = 0.0, hmax * (1.0 - 2.0 ** -(steps + 4))
    if not admissible(hi):
        raise NoAdmissibleChi("no threshold below max|H| satisfies the rule")
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    return hi, DegradationModel.build(H, gamma, hi)


def subband_criterion(coeffs, pilot_coeffs, spec, gamma_bars, gamma, m,
                      sigmas, flavor=ORTHONORMAL):
    """Partial risk criterion of one subband for orthonormal synthesis.

    Summing over subbands and subtracting gamma * sum_Q |H|^-2 recovers
    D times the full risk estimate when the synthesis family is orthonormal
    on the observable subspace.
    """
    if flavor != ORTHONORMAL:
        raise NotOrthonormalFlavor(
            "per-subband criterion requires the orthonormal flavor")
    from .estimators import apply_theta  # local import to avoid a cycle

    est, der = apply_theta(coeffs, spec, sigmas)
    resid = est.values[m] - pilot_coeffs.values[m]
    return float(np.sum(resid**2)
                 + 2.0 * gamma * gamma_bars[m] * der.values[m].sum())


def lambda_heuristic(r, gamma):
    """Prefilter constant proportional to the noise-to-signal variance ratio."""
    r = np.asarray(r, dtype=float)
    denom = float(np.mean(r**2) - np.mean(r) ** 2 - gamma)
    if denom <= 0.0:
        log.warning("signal-variance estimate is nonpositive; clamping lambda to 0")
        return 0.0
    return 3.0 * gamma / denom
