"""Analysis/synthesis frames built from periodized wavelet atoms.

Each subband holds one generator spectrum; atoms are its periodic shifts on
a lattice (decimated basis), on every grid point (undecimated), or on a
union of shifted lattices.  All transforms and the per-subband correlation
constants are evaluated in the frequency domain, where shifts are phases
and the shift structure collapses the constants to one value per subband.
"""

from dataclasses import dataclass, field

import numpy as np

from .degradation import DegradationModel
from .errors import LengthMismatch, ShapeMismatch, UnsupportedDepth
from .filters import lowpass_taps, qmf_highpass
from .spectral import dft_forward, dft_inverse, real_part_checked

ORTHONORMAL = "orthonormal"
UNDECIMATED = "undecimated"
SHIFTED_UNION = "shifted-union"
FLAVORS = (ORTHONORMAL, UNDECIMATED, SHIFTED_UNION)

DEFAULT_WAVELET = "sym8"
DEFAULT_LEVELS = 4


def _filter_spectrum(taps, D):
    buf = np.zeros(D)
    buf[: taps.size] = taps
    return np.fft.fft(buf)


def _cascade_spectra_1d(taps, D, levels):
    """Equivalent-filter spectra of the filter-bank cascade.

    Returns a list of (level, kind, spectrum) with kind 'd' for the detail
    branch at levels 1..J and 'a' for the level-J approximation branch.
    """
    low = _filter_spectrum(taps, D)
    high = _filter_spectrum(qmf_highpass(taps), D)
    out = []
    approx = np.ones(D, dtype=complex)
    p = np.arange(D)
    for j in range(1, levels + 1):
        idx = (p * 2 ** (j - 1)) % D
        out.append((j, "d", approx * high[idx]))
        approx = approx * low[idx]
    out.append((levels, "a", approx))
    return out


@dataclass
class Subband:
    level: int
    label: str
    spectrum: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    dual_scale: float

    @property
    def count(self):
        return int(self.mask.sum())

    @property
    def shifts(self):
        """Atom positions (row-major order matching coefficient layout)."""
        return np.argwhere(self.mask)


@dataclass
class FrameCoefficients:
    """Per-subband coefficient vectors, in the subband's shift order."""

    values: list

    def __len__(self):
        return sum(v.size for v in self.values)


class FrameTransform:
    """Immutable frame: subbands, prefilter G, and flavor metadata."""

    def __init__(self, flavor, shape, subbands, G, lam, wavelet, levels):
        self.flavor = flavor
        self.shape = tuple(shape)
        self.subbands = subbands
        self.G = G
        self.lam = lam
        self.wavelet = wavelet
        self.levels = levels

    @property
    def n_subbands(self):
        return len(self.subbands)

    @property
    def n_coefficients(self):
        return sum(b.count for b in self.subbands)

    def deepest_support(self):
        """Effective support (taps per axis) of the deepest-level atom."""
        taps = lowpass_taps(self.wavelet).size
        return (2**self.levels - 1) * (taps - 1) + 1


def _lattice_mask(shape, step, offsets):
    mask = np.zeros(shape, dtype=bool)
    for off in offsets:
        mask[tuple(slice(o % step, None, step) for o in off)] = True
    return mask


def prefilter(H, Q, lam):
    """Wiener-like analysis prefilter: H/(|H|^2 + lam) on Q, zero elsewhere."""
    G = np.zeros_like(np.asarray(H, dtype=complex))
    G[Q] = H[Q] / (np.abs(H[Q]) ** 2 + lam)
    return G


def subband_spectra(shape, wavelet=DEFAULT_WAVELET, levels=DEFAULT_LEVELS):
    """Generator spectra for all subbands of a separable wavelet cascade."""
    shape = tuple(int(d) for d in shape)
    ndim = len(shape)
    if ndim not in (1, 2):
        raise UnsupportedDepth(f"{ndim}-d grids not supported (d must be 1 or 2)")
    if levels < 1:
        raise UnsupportedDepth("levels must be >= 1")
    for D in shape:
        if D % 2**levels != 0:
            raise UnsupportedDepth(f"axis size {D} not divisible by 2^{levels}")
    taps = lowpass_taps(wavelet)
    if ndim == 1:
        return [(lev, kind, spec)
                for lev, kind, spec in _cascade_spectra_1d(taps, shape[0], levels)]
    rows = {(lev, kind): spec
            for lev, kind, spec in _cascade_spectra_1d(taps, shape[0], levels)}
    cols = {(lev, kind): spec
            for lev, kind, spec in _cascade_spectra_1d(taps, shape[1], levels)}
    out = []
    for j in range(1, levels + 1):
        a0, d0 = rows[(j, "a")], rows[(j, "d")]
        a1, d1 = cols[(j, "a")], cols[(j, "d")]
        # keep all mixed products at this level; pure approx continues deeper
        out.append((j, "ad", np.outer(a0, d1)))
        out.append((j, "da", np.outer(d0, a1)))
        out.append((j, "dd", np.outer(d0, d1)))
    out.append((levels, "aa", np.outer(rows[(levels, "a")], cols[(levels, "a")])))
    return out


def build_frame(flavor, shape, model, lam, *, wavelet=DEFAULT_WAVELET,
                levels=DEFAULT_LEVELS, shifts=None):
    """Build the analysis/synthesis frame for a degradation model.

    Orthonormal: decimated wavelet basis, self-dual.  Undecimated: atoms at
    every position, scaled per level so the family is a Parseval frame
    (dual equals primal).  Shifted-union: a union of shifted orthonormal
    decompositions, tight with constant len(shifts).
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown frame flavor {flavor!r}")
    shape = tuple(int(d) for d in shape)
    ndim = len(shape)
    specs = subband_spectra(shape, wavelet, levels)
    if flavor == SHIFTED_UNION and shifts is None:
        shifts = [(0,), (1,)] if ndim == 1 else [(0, 0), (1, 0), (0, 1), (1, 1)]
    subbands = []
    for lev, label, spec in specs:
        if flavor == ORTHONORMAL:
            mask = _lattice_mask(shape, 2**lev, [(0,) * ndim])
            scale, dual = 1.0, 1.0
        elif flavor == UNDECIMATED:
            mask = np.ones(shape, dtype=bool)
            scale, dual = 2.0 ** (-lev * ndim / 2.0), 1.0
        else:
            mask = _lattice_mask(shape, 2**lev, shifts)
            scale, dual = 1.0, 1.0 / len(shifts)
        subbands.append(Subband(lev, label, scale * spec, mask, dual))
    G = prefilter(model.H, model.Q, lam)
    return FrameTransform(flavor, shape, subbands, G, lam, wavelet, levels)


def analyze(r, frame, model):
    """Frame coefficients of the prefiltered, Q-restricted observation."""
    r = np.asarray(r, dtype=float)
    if r.shape != frame.shape:
        raise ShapeMismatch(f"field {r.shape} vs frame {frame.shape}")
    R = dft_forward(r)
    checked = np.conj(frame.G) * R  # G vanishes off Q, restriction included
    values = []
    for band in frame.subbands:
        corr = dft_inverse(checked * np.conj(band.spectrum))
        values.append(corr[band.mask])
    return FrameCoefficients(values)


def analyze_dual(x, frame, model):
    """Coefficients of x against the synthesis (dual) family."""
    x = np.asarray(x, dtype=float)
    if x.shape != frame.shape:
        raise ShapeMismatch(f"field {x.shape} vs frame {frame.shape}")
    X = dft_forward(x)
    values = []
    for band in frame.subbands:
        corr = dft_inverse(X * np.conj(band.dual_scale * band.spectrum))
        values.append(corr[band.mask])
    return FrameCoefficients(values)


def synthesize_subband(values, band, frame, model, accumulator=None):
    """Accumulate one subband's dual synthesis into a spectrum buffer."""
    grid = np.zeros(frame.shape)
    grid[band.mask] = values
    term = (band.dual_scale * band.spectrum) * dft_forward(grid)
    if accumulator is None:
        return term
    accumulator += term
    return accumulator


def synthesize(coeffs, frame, model):
    """Dual-frame synthesis followed by projection onto the observable set."""
    if len(coeffs.values) != frame.n_subbands:
        raise LengthMismatch(
            f"{len(coeffs.values)} coefficient blocks for {frame.n_subbands} subbands")
    spectrum = np.zeros(frame.shape, dtype=complex)
    for band, values in zip(frame.subbands, coeffs.values):
        if values.size != band.count:
            raise LengthMismatch(
                f"{values.size} coefficients for subband of size {band.count}")
        synthesize_subband(values, band, frame, model, spectrum)
    spectrum[~model.Q] = 0.0
    return dft_inverse(spectrum)


def gamma_bar(frame, model):
    """Per-subband analysis/dual cross-correlation through 1/H."""
    out = np.empty(frame.n_subbands, dtype=complex)
    Q = model.Q
    GH = frame.G[Q] / model.H[Q]
    D = frame.G.size
    for m, band in enumerate(frame.subbands):
        s = band.spectrum[Q]
        out[m] = band.dual_scale * np.sum(GH * (s * np.conj(s))) / D
    return real_part_checked(out)


def kappa(frame, model):
    """Per-subband cross-correlation through 1/(H |H|^2)."""
    out = np.empty(frame.n_subbands, dtype=complex)
    Q = model.Q
    w = frame.G[Q] / (model.H[Q] * np.abs(model.H[Q]) ** 2)
    D = frame.G.size
    for m, band in enumerate(frame.subbands):
        s = band.spectrum[Q]
        out[m] = band.dual_scale * np.sum(w * (s * np.conj(s))) / D
    return real_part_checked(out)


def subband_noise_std(frame, model):
    """Standard deviation of the analysis-noise coefficients per subband."""
    Q = model.Q
    g2 = np.abs(frame.G[Q]) ** 2
    D = frame.G.size
    var = np.array([
        model.gamma * np.sum(g2 * np.abs(band.spectrum[Q]) ** 2) / D
        for band in frame.subbands
    ])
    return np.sqrt(np.maximum(var, 0.0))


def default_truncation_radius(frame):
    """2x the deepest atom support, or None (full) on desk-scale grids."""
    if frame.G.size <= 128 * 128:
        return None
    return 2 * frame.deepest_support()


class CrossTables:
    """Cross-correlation tables between subband pairs through 1/H.

    The (l, i) constant for l in subband m and i in subband mp depends only
    on the shift difference; table(m, mp) returns the field T with
    gamma(l, i) = T[(k_i - k_l) mod D].  A truncation radius zeroes entries
    whose circular offset exceeds the window on any axis.
    """

    def __init__(self, frame, model, truncation_radius=None):
        self.frame = frame
        self.model = model
        self.radius = truncation_radius
        self._window = None
        if truncation_radius is not None:
            self._window = self._make_window(frame.shape, truncation_radius)

    @staticmethod
    def _make_window(shape, radius):
        keep = np.ones(shape, dtype=bool)
        for axis, D in enumerate(shape):
            idx = np.arange(D)
            circ = np.minimum(idx, D - idx)
            dims = [1] * len(shape)
            dims[axis] = D
            keep &= (circ <= radius).reshape(dims)
        return keep

    def cross_spectrum(self, m, mp):
        Q = self.model.Q
        band, other = self.frame.subbands[m], self.frame.subbands[mp]
        X = np.zeros(self.frame.shape, dtype=complex)
        X[Q] = (self.frame.G[Q] * band.spectrum[Q]
                * np.conj(other.dual_scale * other.spectrum[Q]) / self.model.H[Q])
        return X

    def table(self, m, mp):
        T = real_part_checked(np.fft.ifftn(self.cross_spectrum(m, mp)))
        if self._window is not None:
            T = np.where(self._window, T, 0.0)
        return T

    def gamma(self, m, shift_l, mp, shift_i):
        """Direct lookup of the (l, i) constant from atom positions."""
        T = self.table(m, mp)
        delta = tuple((ki - kl) % D for ki, kl, D
                      in zip(shift_i, shift_l, self.frame.shape))
        return T[delta]


def gamma_bar_cross(frame, model, truncation_radius="auto"):
    if truncation_radius == "auto":
        truncation_radius = default_truncation_radius(frame)
    return CrossTables(frame, model, truncation_radius)
