"""Periodic grids and spectra: DFT conventions, projections, energies.

The forward transform is unnormalized and the inverse carries the 1/D
factor.  Every risk formula in the package assumes exactly this convention,
so do not swap in a differently normalized transform.
"""

import numpy as np

from .errors import ImaginaryResidueTooLarge, ShapeMismatch

DEFAULT_IMAG_RTOL = 1e-6


def dft_forward(x):
    """Unnormalized forward DFT of a real (or complex) field."""
    return np.fft.fftn(np.asarray(x))


def dft_inverse(spectrum, imag_rtol=DEFAULT_IMAG_RTOL):
    """Inverse DFT (with 1/D factor), returning a real field.

    Raises ImaginaryResidueTooLarge if the imaginary residue exceeds
    imag_rtol times the spectrum sup-norm, which signals a non-Hermitian
    spectrum produced by a bug upstream.
    """
    spectrum = np.asarray(spectrum)
    field = np.fft.ifftn(spectrum)
    sup = np.abs(spectrum).max() if spectrum.size else 0.0
    residue = np.abs(field.imag).max() if field.size else 0.0
    if residue > imag_rtol * max(sup, np.finfo(float).tiny):
        raise ImaginaryResidueTooLarge(
            f"imaginary residue {residue:.3e} exceeds {imag_rtol:.1e} * sup|X| = "
            f"{imag_rtol * sup:.3e}"
        )
    return field.real


def project_frequencies(spectrum, keep):
    """Zero every bin outside the boolean mask ``keep``. Idempotent."""
    spectrum = np.asarray(spectrum)
    keep = np.asarray(keep, dtype=bool)
    if spectrum.shape != keep.shape:
        raise ShapeMismatch(f"spectrum {spectrum.shape} vs mask {keep.shape}")
    return np.where(keep, spectrum, 0.0)


def mean_square(x):
    """(1/D) sum of squared values."""
    x = np.asarray(x)
    return float(np.mean(np.abs(x) ** 2)) if x.size else 0.0


def spectrum_mean_square(spectrum):
    """Mean square of the underlying field, evaluated spectrally.

    Parseval with our convention: (1/D) sum |x|^2 = (1/D^2) sum |X|^2.
    """
    spectrum = np.asarray(spectrum)
    return float(np.sum(np.abs(spectrum) ** 2)) / spectrum.size**2


def real_part_checked(values, rtol=1e-8):
    """Discard an imaginary part expected to be rounding noise.

    Tolerance is relative to (magnitude + 1) so that near-zero quantities
    are not rejected for harmless absolute residues.
    """
    values = np.asarray(values)
    residue = np.abs(values.imag)
    bound = rtol * (np.abs(values) + 1.0)
    if np.any(residue > bound):
        worst = float((residue - bound).max())
        raise ImaginaryResidueTooLarge(
            f"imaginary residue exceeds tolerance by {worst:.3e}"
        )
    return np.asarray(values.real, dtype=float)
