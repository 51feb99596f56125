"""Orthonormal wavelet filter tables and quadrature-mirror helpers.

Taps are the standard published decomposition lowpass filters, normalized so
that sum(h) = sqrt(2) and sum(h^2) = 1.  The highpass is derived by the
usual alternating-sign mirror rule.
"""

import numpy as np

from .errors import UnknownFilter

_SQRT2 = np.sqrt(2.0)

WAVELET_FILTERS = {
    "haar": np.array([1.0, 1.0]) / _SQRT2,
    "db2": np.array([
        -0.12940952255092145, 0.22414386804185735,
        0.836516303737469, 0.48296291314469025,
    ]),
    "db4": np.array([
        -0.010597401784997278, 0.032883011666982945,
        0.030841381835986965, -0.18703481171888114,
        -0.02798376941698385, 0.6308807679295904,
        0.7148465705525415, 0.23037781330885523,
    ]),
    "sym8": np.array([
        -0.0033824159510061256, -0.0005421323317911481,
        0.03169508781149298, 0.007607487324917605,
        -0.1432942383508097, -0.061273359067658524,
        0.4813596512583722, 0.7771857517005235,
        0.3644418948353314, -0.05194583810770904,
        -0.027219029917056003, 0.049137179673607506,
        0.003808752013890615, -0.01495225833704823,
        -0.0003029205147213668, 0.0018899503327594609,
    ]),
}


def lowpass_taps(name):
    try:
        return WAVELET_FILTERS[name].copy()
    except KeyError:
        known = ", ".join(sorted(WAVELET_FILTERS))
        raise UnknownFilter(f"unknown wavelet filter {name!r} (have: {known})") from None


def qmf_highpass(h):
    """g[n] = (-1)^n h[L-1-n], the mirror highpass of an orthonormal lowpass."""
    h = np.asarray(h, dtype=float)
    signs = np.where(np.arange(h.size) % 2 == 0, 1.0, -1.0)
    return signs * h[::-1]
