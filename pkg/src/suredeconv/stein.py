"""Monte-Carlo verification of the Gaussian integration-by-parts identities.

Each identity relates moments of nonlinear functions of noisy variables to
derivative moments weighted by exact covariances.  Both sides are estimated
with common random numbers and compared at three standard errors of the
per-sample difference.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidCovariance

IDENTITIES = ("P1", "E1", "E3", "E4", "E5")

PSD_EIG_RTOL = 1e-10


@dataclass(frozen=True)
class TestFunction:
    """Named scalar function with an (almost-everywhere) derivative."""

    name: str
    value: callable
    derivative: callable

    def __call__(self, x):
        return self.value(x), self.derivative(x)


def standard_test_functions(scale=1.0):
    """The function zoo the identities are checked against.

    The soft threshold has kinks where the derivative is taken as 0, a
    measure-zero choice consistent with almost-everywhere differentiability.
    """
    t = 0.5 * scale
    return [
        TestFunction("identity", lambda x: x, lambda x: np.ones_like(x)),
        TestFunction("cubic", lambda x: x**3, lambda x: 3.0 * x**2),
        TestFunction("soft-threshold",
                     lambda x: _kernels.soft_threshold(x, t)[0],
                     lambda x: _kernels.soft_threshold(x, t)[1]),
        TestFunction("blu-gate",
                     lambda x: _kernels.blu_gate(x, 3.0 * scale)[0],
                     lambda x: _kernels.blu_gate(x, 3.0 * scale)[1]),
        TestFunction("tanh-gate",
                     lambda x: _kernels.tanh_gate(x, 3.5, 2.25, scale)[0],
                     lambda x: _kernels.tanh_gate(x, 3.5, 2.25, scale)[1]),
    ]


def sqrt_psd(cov):
    """Symmetric square root; rejects covariances that are not PSD."""
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4) or not np.allclose(cov, cov.T):
        raise InvalidCovariance("covariance must be symmetric 4x4")
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() < -PSD_EIG_RTOL * max(vals.max(), 1.0):
        raise InvalidCovariance(f"covariance has negative eigenvalue {vals.min():.3e}")
    return vecs @ np.diag(np.sqrt(np.maximum(vals, 0.0))) @ vecs.T


def sample_quad(cov, n_samples, seed):
    """Draw (eta1, eta2, te1, te2) rows from N(0, cov) with a Philox stream."""
    root = sqrt_psd(cov)
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((n_samples, 4))
    return z @ root.T


@dataclass
class IdentityReport:
    identity: str
    function: str
    lhs: float
    rhs: float
    stderr: float
    passed: bool

    def line(self):
        mark = "pass" if self.passed else "FAIL"
        return (f"{self.identity:3s} {self.function:15s} lhs={self.lhs:+.6e} "
                f"rhs={self.rhs:+.6e} 3se={3 * self.stderr:.2e} {mark}")


def _difference_samples(identity, cov, upsilon, theta1, theta2, draws):
    """Per-sample lhs - rhs values for the requested identity."""
    e1, e2, t1, t2 = draws[:, 0], draws[:, 1], draws[:, 2], draws[:, 3]
    r1 = upsilon[0] + e1
    r2 = upsilon[1] + e2
    c = cov  # exact covariances of (eta1, eta2, te1, te2)
    v1, d1 = theta1(r1)
    if identity == "P1":
        # classical form: E[T(r) eta] = var(eta) E[T'(r)]
        return v1 * e1 - c[0, 0] * d1
    if identity == "E1":
        return v1 * t1 - d1 * c[0, 2]
    if identity == "E3":
        return v1 * t1 * t2 - (d1 * t2 * c[0, 2] + v1 * c[2, 3])
    if identity == "E4":
        return v1 * t1 * t2**2 - (d1 * t2**2 * c[0, 2]
                                  + 2.0 * d1 * c[2, 3] * c[0, 3])
    if identity == "E5":
        v2, d2 = theta2(r2)
        return (v1 * v2 * t1 * t2
                - (v1 * v2 * c[2, 3]
                   + d1 * v2 * t2 * c[0, 2]
                   + v1 * d2 * t1 * c[1, 3]
                   + d1 * d2 * (c[0, 3] * c[1, 2] - c[0, 2] * c[1, 3])))
    raise ValueError(f"unknown identity {identity!r}")


def check_identity(identity, cov, upsilon, theta1, theta2=None, *,
                   n_samples=10**6, seed=0):
    """Two-sided Monte-Carlo check of one identity.

    Pass iff |mean(lhs - rhs)| <= 3 * stderr(lhs - rhs); deterministic for a
    given seed.  At three standard errors a correct identity still fails in
    roughly 0.3% of runs, so suite drivers allow a reseeded retry.
    """
    cov = np.asarray(cov, dtype=float)
    if theta2 is None:
        theta2 = theta1
    draws = sample_quad(cov, n_samples, seed)
    diff = _difference_samples(identity, cov, tuple(upsilon), theta1, theta2, draws)
    mean = float(diff.mean())
    stderr = float(diff.std(ddof=1) / np.sqrt(n_samples))
    lhs, rhs = _side_values(identity, cov, tuple(upsilon), theta1, theta2, draws)
    passed = abs(mean) <= 3.0 * stderr or (stderr == 0.0 and mean == 0.0)
    return IdentityReport(identity=identity, function=theta1.name,
                          lhs=lhs, rhs=rhs, stderr=stderr, passed=passed)


def _side_values(identity, cov, upsilon, theta1, theta2, draws):
    e1, e2, t1, t2 = draws[:, 0], draws[:, 1], draws[:, 2], draws[:, 3]
    r1 = upsilon[0] + e1
    r2 = upsilon[1] + e2
    c = cov
    v1, d1 = theta1(r1)
    if identity == "P1":
        return float(np.mean(v1 * e1)), float(c[0, 0] * np.mean(d1))
    if identity == "E1":
        return float(np.mean(v1 * t1)), float(np.mean(d1) * c[0, 2])
    if identity == "E3":
        return (float(np.mean(v1 * t1 * t2)),
                float(np.mean(d1 * t2) * c[0, 2] + np.mean(v1) * c[2, 3]))
    if identity == "E4":
        return (float(np.mean(v1 * t1 * t2**2)),
                float(np.mean(d1 * t2**2) * c[0, 2]
                      + 2.0 * np.mean(d1) * c[2, 3] * c[0, 3]))
    v2, d2 = theta2(r2)
    return (float(np.mean(v1 * v2 * t1 * t2)),
            float(np.mean(v1 * v2) * c[2, 3]
                  + np.mean(d1 * v2 * t2) * c[0, 2]
                  + np.mean(v1 * d2 * t1) * c[1, 3]
                  + np.mean(d1 * d2) * (c[0, 3] * c[1, 2] - c[0, 2] * c[1, 3])))


def random_psd_covariances(count, seed, dim=4):
    """Reproducible well-conditioned random PSD covariance matrices."""
    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    for _ in range(count):
        a = rng.normal(size=(dim, dim)) / np.sqrt(dim)
        out.append(a @ a.T + 0.25 * np.eye(dim))
    return out


def run_suite(n_samples=10**6, seed=1234, *, identities=IDENTITIES,
              functions=None, covariances=None, upsilon=(0.2, -0.1),
              max_marginal_failures=2):
    """Full identity suite: every (identity, function, covariance) case.

    Up to max_marginal_failures failing cases are retried once with a
    derived fresh seed; a retry pass resolves the case (expected behaviour
    for a 3-standard-error criterion over many cases).
    """
    functions = functions or standard_test_functions()
    covariances = covariances if covariances is not None \
        else random_psd_covariances(5, seed=seed + 77)
    reports = []
    failures = []
    case = 0
    for cov in covariances:
        for fn in functions:
            for ident in identities:
                rep = check_identity(ident, cov, upsilon, fn,
                                     n_samples=n_samples, seed=seed + case)
                if not rep.passed:
                    failures.append((case, ident, cov, fn))
                reports.append(rep)
                case += 1
    if failures and len(failures) <= max_marginal_failures:
        for case_id, ident, cov, fn in failures:
            retry = check_identity(ident, cov, upsilon, fn,
                                   n_samples=n_samples,
                                   seed=seed + 10_000 + case_id)
            if retry.passed:
                reports[case_id] = retry
    return reports
