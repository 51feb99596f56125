"""Elementwise shrinkage kernels: value and derivative in one pass.

The gated nonlinearities are evaluated on every frame coefficient, several
times per restoration (risk probing, weight fitting, final synthesis), so
they are the hot non-FFT loops of the package.  By default they are compiled
with numba; set SUREDECONV_NO_NUMBA=1 to force the pure-numpy fallback.
Both paths are exercised by the benchmark in benchmarks/bench_kernels.py.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("SUREDECONV_NO_NUMBA", "") not in ("1", "true", "yes")

# u = (rho/t)^8 overflows and poisons the derivative term exp(-u)*(1-8u)
# with inf*0 once |rho/t| is large; beyond this cutoff exp(-u) underflows to
# 0 exactly (6^8 > 1.6e6), so the gate is fully open.
_BLU_CUTOFF = 6.0


def _blu_gate_numpy(rho, t):
    rho = np.asarray(rho, dtype=np.float64)
    if t <= 0.0:
        return rho.copy(), np.ones_like(rho)
    z = rho / t
    open_gate = np.abs(z) > _BLU_CUTOFF
    z = np.where(open_gate, 0.0, z)
    z2 = z * z
    z4 = z2 * z2
    u = z4 * z4
    e = np.exp(-u)
    val = (1.0 - e) * rho
    der = 1.0 - e * (1.0 - 8.0 * u)
    val[open_gate] = rho[open_gate]
    der[open_gate] = 1.0
    return val, der


def _tanh_gate_numpy(rho, xi, omega_p, sigma):
    rho = np.asarray(rho, dtype=np.float64)
    if sigma <= 0.0:
        return rho.copy(), np.ones_like(rho)
    w = omega_p * sigma
    tp = np.tanh((rho + xi * sigma) / w)
    tm = np.tanh((rho - xi * sigma) / w)
    gate = tp - tm
    val = gate * rho
    der = gate + rho * (tm * tm - tp * tp) / w
    return val, der


def _soft_threshold_numpy(x, t):
    x = np.asarray(x, dtype=np.float64)
    val = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    der = (np.abs(x) > t).astype(np.float64)
    return val, der


if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:

    @njit(cache=True)
    def _blu_gate_jit(rho, t):
        n = rho.size
        val = np.empty(n)
        der = np.empty(n)
        if t <= 0.0:
            for i in range(n):
                val[i] = rho[i]
                der[i] = 1.0
            return val, der
        for i in range(n):
            z = rho[i] / t
            if abs(z) > _BLU_CUTOFF:
                val[i] = rho[i]
                der[i] = 1.0
            else:
                z2 = z * z
                z4 = z2 * z2
                u = z4 * z4
                e = np.exp(-u)
                val[i] = (1.0 - e) * rho[i]
                der[i] = 1.0 - e * (1.0 - 8.0 * u)
        return val, der

    @njit(cache=True)
    def _tanh_gate_jit(rho, xi, omega_p, sigma):
        n = rho.size
        val = np.empty(n)
        der = np.empty(n)
        if sigma <= 0.0:
            for i in range(n):
                val[i] = rho[i]
                der[i] = 1.0
            return val, der
        w = omega_p * sigma
        for i in range(n):
            tp = np.tanh((rho[i] + xi * sigma) / w)
            tm = np.tanh((rho[i] - xi * sigma) / w)
            gate = tp - tm
            val[i] = gate * rho[i]
            der[i] = gate + rho[i] * (tm * tm - tp * tp) / w
        return val, der

    @njit(cache=True)
    def _soft_threshold_jit(x, t):
        n = x.size
        val = np.empty(n)
        der = np.empty(n)
        for i in range(n):
            a = abs(x[i]) - t
            if a > 0.0:
                val[i] = a if x[i] > 0.0 else -a
                der[i] = 1.0
            else:
                val[i] = 0.0
                der[i] = 0.0
        return val, der

    def blu_gate(rho, t):
        rho = np.ascontiguousarray(rho, dtype=np.float64)
        val, der = _blu_gate_jit(rho.ravel(), float(t))
        return val.reshape(rho.shape), der.reshape(rho.shape)

    def tanh_gate(rho, xi, omega_p, sigma):
        rho = np.ascontiguousarray(rho, dtype=np.float64)
        val, der = _tanh_gate_jit(rho.ravel(), float(xi), float(omega_p), float(sigma))
        return val.reshape(rho.shape), der.reshape(rho.shape)

    def soft_threshold(x, t):
        x = np.ascontiguousarray(x, dtype=np.float64)
        val, der = _soft_threshold_jit(x.ravel(), float(t))
        return val.reshape(x.shape), der.reshape(x.shape)

else:
    blu_gate = _blu_gate_numpy
    tanh_gate = _tanh_gate_numpy
    soft_threshold = _soft_threshold_numpy
