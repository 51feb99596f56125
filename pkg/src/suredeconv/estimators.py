"""Coefficient-domain estimating functions: weighted sums of fixed gates.

Each subband applies the same small family of elementary functions; the
estimate is linear in the weights, which is what makes risk minimization a
normal-equations solve.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import LengthMismatch, WeightsUnset
from .frames import FrameCoefficients, synthesize_subband
from .spectral import dft_inverse

DEFAULT_OMEGA = 3.0
DEFAULT_XI = 3.5
DEFAULT_OMEGA_P = 2.25


def f_blu(rho, omega, sigma_m):
    """Smooth keep-the-large gate: (1 - exp(-(rho/(omega sigma))^8)) rho.

    Returns (value, derivative); both finite for every rho, with the gate
    treated as fully open once exp underflows.
    """
    scalar = np.isscalar(rho)
    val, der = _kernels.blu_gate(np.atleast_1d(np.asarray(rho, dtype=float)),
                                 omega * sigma_m)
    return (float(val[0]), float(der[0])) if scalar else (val, der)


def f_tanh(rho, xi, omega_p, sigma_m):
    """Sigmoid band gate: (tanh((rho+xi s)/(w' s)) - tanh((rho-xi s)/(w' s))) rho."""
    scalar = np.isscalar(rho)
    val, der = _kernels.tanh_gate(np.atleast_1d(np.asarray(rho, dtype=float)),
                                  xi, omega_p, sigma_m)
    return (float(val[0]), float(der[0])) if scalar else (val, der)


@dataclass(frozen=True)
class ElementaryFn:
    """One term of the expansion: identity, 'blu' gate, or 'tanh' gate."""

    kind: str
    omega: float = DEFAULT_OMEGA
    xi: float = DEFAULT_XI
    omega_p: float = DEFAULT_OMEGA_P

    def __post_init__(self):
        if self.kind not in ("identity", "blu", "tanh"):
            raise ValueError(f"unknown elementary function {self.kind!r}")
        if self.omega <= 0 or self.xi <= 0 or self.omega_p <= 0:
            raise ValueError("gate parameters must be positive")

    def __call__(self, rho, sigma_m):
        if self.kind == "identity":
            rho = np.asarray(rho, dtype=float)
            return rho.copy(), np.ones_like(rho)
        if self.kind == "blu":
            return f_blu(rho, self.omega, sigma_m)
        return f_tanh(rho, self.xi, self.omega_p, sigma_m)


@dataclass(frozen=True)
class LetSpec:
    """Per-subband families of elementary functions plus their weights."""

    families: tuple
    weights: tuple | None = None

    @classmethod
    def uniform(cls, n_subbands, kinds=("identity", "blu"), **params):
        fns = tuple(ElementaryFn(k, **params) for k in kinds)
        return cls(families=(fns,) * n_subbands)

    @classmethod
    def identity(cls, n_subbands):
        fns = (ElementaryFn("identity"),)
        return cls(families=(fns,) * n_subbands,
                   weights=((1.0,),) * n_subbands)

    @classmethod
    def zero(cls, n_subbands):
        fns = (ElementaryFn("identity"),)
        return cls(families=(fns,) * n_subbands,
                   weights=((0.0,),) * n_subbands)

    @property
    def n_subbands(self):
        return len(self.families)

    def term_index(self):
        """Flat ordering of (subband, term) pairs used by the solver."""
        return [(m, i) for m, fns in enumerate(self.families)
                for i in range(len(fns))]

    def with_weights(self, weights):
        weights = tuple(tuple(float(a) for a in w) for w in weights)
        if len(weights) != self.n_subbands or any(
                len(w) != len(f) for w, f in zip(weights, self.families)):
            raise LengthMismatch("weight layout does not match the families")
        return replace(self, weights=weights)


def apply_theta(coeffs, spec, sigmas):
    """Apply the estimating functions; returns (estimates, derivatives)."""
    if spec.weights is None:
        raise WeightsUnset("LET weights have not been solved or set")
    if len(coeffs.values) != spec.n_subbands:
        raise LengthMismatch(
            f"{len(coeffs.values)} subbands vs spec for {spec.n_subbands}")
    est, der = [], []
    for m, (rho, fns, ws) in enumerate(zip(coeffs.values, spec.families,
                                           spec.weights)):
        acc_v = np.zeros_like(rho)
        acc_d = np.zeros_like(rho)
        for fn, a in zip(fns, ws):
            if a == 0.0:
                continue
            v, d = fn(rho, sigmas[m])
            acc_v += a * v
            acc_d += a * d
        est.append(acc_v)
        der.append(acc_d)
    return FrameCoefficients(est), FrameCoefficients(der)


def beta_fields(coeffs, frame, model, spec, sigmas):
    """Synthesized field of each elementary term, projected onto Q.

    Returns (fields, index, fprime_sums) where index lists (subband, term)
    pairs in the solver's flat order and fprime_sums holds the summed
    derivative of each term over its subband's coefficients.
    """
    fields, index, fprime_sums = [], [], []
    for m, band in enumerate(frame.subbands):
        rho = coeffs.values[m]
        for i, fn in enumerate(spec.families[m]):
            v, d = fn(rho, sigmas[m])
            spectrum = synthesize_subband(v, band, frame, model)
            spectrum[~model.Q] = 0.0
            fields.append(dft_inverse(spectrum))
            index.append((m, i))
            fprime_sums.append(float(np.sum(d)))
    return fields, index, fprime_sums
