"""Blur responses, periodic degradation, and the observable frequency set."""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyObservableSet,
    KernelLargerThanGrid,
    ShapeMismatch,
    ZeroBlurredSignal,
)
from .spectral import dft_forward, dft_inverse, mean_square

# DFT bins that are mathematically exact zeros of a blur (box-kernel nulls,
# cosine-response Nyquist) land at ~1e-16 in floating point; snap them so
# that chi = 0 reproduces the exact vanishing set and 1/H never sees junk.
ZERO_SNAP_RTOL = 1e-12


@dataclass(frozen=True)
class BlurSpec:
    """Parametric blur: uniform / gaussian / cosine / dirac / explicit kernel."""

    kind: str
    sizes: tuple = ()
    sigma: float = 0.0
    f_c: float = 0.0
    kernel: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            if not self.sizes or any(s < 1 or s % 2 == 0 for s in self.sizes):
                raise ValueError("uniform blur sizes must be odd and positive")
        elif self.kind == "gaussian":
            if self.sigma <= 0:
                raise ValueError("gaussian blur needs sigma > 0")
        elif self.kind == "cosine":
            if not 0.0 <= self.f_c < 0.5:
                raise ValueError("cosine blur needs f_c in [0, 1/2)")
        elif self.kind == "explicit":
            if self.kernel is None or not np.isrealobj(self.kernel):
                raise ValueError("explicit blur needs a real kernel")
        elif self.kind != "dirac":
            raise ValueError(f"unknown blur kind {self.kind!r}")

    @classmethod
    def uniform(cls, *sizes):
        return cls("uniform", sizes=tuple(int(s) for s in sizes))

    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def cosine(cls, f_c):
        return cls("cosine", f_c=float(f_c))

    @classmethod
    def dirac(cls):
        return cls("dirac")

    @classmethod
    def explicit(cls, kernel):
        return cls("explicit", kernel=np.asarray(kernel, dtype=float))

    @classmethod
    def parse(cls, text):
        """Parse 'uniform:5x5', 'gaussian:2', 'cosine:3/32', 'dirac'."""
        head, _, arg = text.strip().partition(":")
        head = head.lower()
        if head == "dirac":
            return cls.dirac()
        if head == "uniform":
            return cls.uniform(*(int(t) for t in arg.lower().split("x")))
        if head == "gaussian":
            return cls.gaussian(float(arg))
        if head == "cosine":
            if "/" in arg:
                num, den = arg.split("/")
                return cls.cosine(float(num) / float(den))
            return cls.cosine(float(arg))
        raise ValueError(f"cannot parse blur spec {text!r}")

    def label(self):
        if self.kind == "uniform":
            return "uniform" + "x".join(str(s) for s in self.sizes)
        if self.kind == "gaussian":
            return f"gaussian{self.sigma:g}"
        if self.kind == "cosine":
            return f"cosine{self.f_c:g}"
        return self.kind


@dataclass(frozen=True)
class DegradationModel:
    """Blur response, noise variance, threshold, and observable set."""

    H: np.ndarray
    gamma: float
    chi: float
    Q: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, H, gamma, chi=0.0):
        H = np.asarray(H)
        return cls(H=H, gamma=float(gamma), chi=float(chi),
                   Q=compute_observable_set(H, chi))

    @property
    def card_q(self):
        return int(self.Q.sum())


def _wrap_kernel(taps, shape):
    """Place a centered kernel on the periodic grid, origin at index 0."""
    taps = np.asarray(taps, dtype=float)
    if taps.ndim != len(shape):
        raise ShapeMismatch(f"kernel ndim {taps.ndim} vs grid ndim {len(shape)}")
    if any(k > d for k, d in zip(taps.shape, shape)):
        raise KernelLargerThanGrid(f"kernel {taps.shape} exceeds grid {shape}")
    grid = np.zeros(shape)
    idx = np.ix_(*[(np.arange(k) - (k // 2)) % d for k, d in zip(taps.shape, shape)])
    grid[idx] += taps
    return grid


def _cosine_axis_response(D, f_c):
    p = np.arange(D, dtype=float)
    edge = f_c * D
    half = D / 2.0
    h = np.zeros(D)
    # first half per the piecewise definition, then Hermitian completion
    flat = p <= edge
    ramp = (p >= edge) & (p <= half)
    h[flat] = 1.0
    h[ramp] = np.cos(np.pi * (p[ramp] - edge) / ((1.0 - 2.0 * f_c) * D))
    upper = p > half
    h[upper] = h[(D - p[upper]).astype(int)]
    return h


def make_blur_response(spec, shape):
    """Frequency response H of a blur on the given grid.

    Spatial kernels are centered at the origin with periodic wrap and unit
    sum, so H(0) = 1 and H is zero-phase for symmetric kernels.  The cosine
    blur is built directly in frequency as a separable product.
    """
    shape = tuple(int(d) for d in shape)
    if spec.kind == "dirac":
        return np.ones(shape, dtype=complex)
    if spec.kind == "uniform":
        sizes = spec.sizes
        if len(sizes) == 1 and len(shape) > 1:
            sizes = sizes * len(shape)
        if len(sizes) != len(shape):
            raise ShapeMismatch(f"{len(sizes)} sizes for {len(shape)}-d grid")
        taps = np.ones(sizes) / np.prod(sizes)
        H = dft_forward(_wrap_kernel(taps, shape))
    elif spec.kind == "gaussian":
        half = int(np.ceil(4.0 * spec.sigma))
        x = np.arange(-half, half + 1)
        t1 = np.exp(-0.5 * (x / spec.sigma) ** 2)
        taps = t1
        for _ in range(len(shape) - 1):
            taps = np.multiply.outer(taps, t1)
        taps /= taps.sum()
        H = dft_forward(_wrap_kernel(taps, shape))
    elif spec.kind == "cosine":
        H = np.ones(shape, dtype=float)
        for axis, D in enumerate(shape):
            h = _cosine_axis_response(D, spec.f_c)
            dims = [1] * len(shape)
            dims[axis] = D
            H = H * h.reshape(dims)
        H = H.astype(complex)
    elif spec.kind == "explicit":
        taps = spec.kernel / spec.kernel.sum() if spec.kernel.sum() != 0 else spec.kernel
        H = dft_forward(_wrap_kernel(taps, shape))
    else:  # pragma: no cover - guarded in BlurSpec
        raise ValueError(spec.kind)
    snap = np.abs(H) < ZERO_SNAP_RTOL * np.abs(H).max()
    H = H.copy()
    H[snap] = 0.0
    return H


def gamma_for_bsnr(s, H, bsnr_db):
    """Noise variance hitting a target blurred-SNR (in dB) for signal s."""
    blurred = dft_forward(s) * H
    energy = float(np.sum(np.abs(blurred) ** 2)) / blurred.size  # ||h*s||^2
    if energy <= 0.0:
        raise ZeroBlurredSignal("blurred signal has zero energy")
    return energy / (s.size * 10.0 ** (bsnr_db / 10.0))


def bsnr_db(s, H, gamma):
    blurred = dft_forward(s) * H
    energy = float(np.sum(np.abs(blurred) ** 2)) / blurred.size
    return 10.0 * np.log10(energy / (s.size * gamma))


def degrade(s, H, gamma, seed):
    """r = blur(s) + white Gaussian noise, bit-reproducible per seed.

    Noise is drawn in the spatial domain from a Philox counter-based
    generator, so identical (s, H, gamma, seed) give identical output.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != H.shape:
        raise ShapeMismatch(f"signal {s.shape} vs response {H.shape}")
    blurred = dft_inverse(dft_forward(s) * H)
    if gamma == 0.0:
        return blurred
    rng = np.random.Generator(np.random.Philox(seed))
    return blurred + rng.normal(0.0, np.sqrt(gamma), size=s.shape)


def compute_observable_set(H, chi):
    """Boolean mask of bins where |H| exceeds chi."""
    if chi < 0:
        raise ValueError("chi must be >= 0")
    Q = np.abs(np.asarray(H)) > chi
    if not Q.any():
        raise EmptyObservableSet(f"no bin has |H| > {chi:g}")
    return Q


def pilot_inverse(r, model, doubly=False):
    """Inverse-filtered observation restricted to the observable set.

    With doubly=True the spectrum is divided by H twice (the weighting used
    inside the risk-variance formula).
    """
    R = dft_forward(r)
    H = model.H
    out = np.zeros_like(R)
    div = H * H if doubly else H
    out[model.Q] = R[model.Q] / div[model.Q]
    return dft_inverse(out)


def apply_inverse_h(x, model):
    """Spectrum-domain division by H on the observable set (zero elsewhere)."""
    X = dft_forward(x)
    out = np.zeros_like(X)
    out[model.Q] = X[model.Q] / model.H[model.Q]
    return dft_inverse(out)
