"""Accuracy of the Dirichlet mechanism.

Expected KL divergence from the sensitive vector ``C`` to a draw ``Dir(k C)``::

    E[KL] = sum_i C_i (log C_i + psi(k) - psi(k C_i))

and a data-free bound obtained at the worst case
``C = (1/N, ..., 1/N, 1 - (n - 1)/N)``. Per-coordinate absolute and squared
errors follow from the Beta marginals of the Dirichlet distribution. All values
are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import digamma, log_beta

__all__ = [
    "AccuracyReport",
    "ZetaHelper",
    "kl_divergence",
    "expected_kl_exact",
    "expected_kl_bound",
    "coord_error_moments",
    "coord_error_bounds",
    "accuracy_report",
    "markov_expected_kl",
    "markov_kl_bound",
    "expected_l1_bound",
]


@dataclass(frozen=True, eq=False)
class AccuracyReport:
    expected_kl_exact: float
    expected_kl_bound: float
    coord_abs_error: np.ndarray
    coord_abs_error_upper: float
    coord_abs_error_lower: float
    coord_sq_error: np.ndarray
    coord_sq_error_upper: float

    def __eq__(self, other):
        if not isinstance(other, AccuracyReport):
            return NotImplemented
        return (
            self.expected_kl_exact == other.expected_kl_exact
            and self.expected_kl_bound == other.expected_kl_bound
            and np.array_equal(self.coord_abs_error, other.coord_abs_error)
            and self.coord_abs_error_upper == other.coord_abs_error_upper
            and self.coord_abs_error_lower == other.coord_abs_error_lower
            and np.array_equal(self.coord_sq_error, other.coord_sq_error)
            and self.coord_sq_error_upper == other.coord_sq_error_upper
        )


@dataclass(frozen=True)
class ZetaHelper:
    """zeta(x) = log((x + 1) / N) - psi((x + 1) k / N)."""

    N: int
    k: float

    def __post_init__(self):
        if self.N < 1 or self.k <= 0:
            raise DomainError("ZetaHelper needs N >= 1 and k > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0):
            raise DomainError("zeta is defined for x >= 0")
        out = np.log((x + 1.0) / self.N) - digamma((x + 1.0) * self.k / self.N)
        return float(out) if out.ndim == 0 else out


def _interior(q, name="q"):
    q = np.asarray(getattr(q, "probs", q), dtype=np.float64)
    if np.any(q <= 0) or np.any(q >= 1):
        raise DomainError(f"{name} must have all entries strictly between 0 and 1")
    return q


def _feasible(N, n, k):
    if n < 2 or N < n:
        raise DomainError(f"the worst case needs N >= n, got N={N}, n={n}")
    if not k > 0:
        raise DomainError(f"k must be positive, got {k!r}")


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats, with 0 log(0 / x) = 0."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def expected_kl_exact(q, k: float) -> float:
    """Expected KL(q || Dir(k q) draw) in closed form; needs the sensitive ``q``."""
    q = _interior(q)
    if not k > 0:
        raise DomainError(f"k must be positive, got {k!r}")
    return float(np.sum(q * (np.log(q) + digamma(k) - digamma(k * q))))


def expected_kl_bound(N: int, n: int, k: float) -> float:
    """Data-free bound on the expected KL for any size-N count vector with all entries >= 1/N."""
    _feasible(N, n, k)
    zeta = ZetaHelper(N, k)
    return (n - 1) / N * zeta(0) + (N - n + 1) / N * zeta(N - n) + digamma(k)


def coord_error_moments(q_i, k: float):
    """(E|C_i - C~_i|, E|C_i - C~_i|^2) for the Beta(k C_i, k(1 - C_i)) marginal."""
    c = _interior(q_i, "q_i")
    if not k > 0:
        raise DomainError(f"k must be positive, got {k!r}")
    a, b = k * c, k * (1.0 - c)
    log_abs = math.log(2.0) + a * np.log(c) + b * np.log1p(-c) - math.log(k) - log_beta(a, b)
    abs_mean = np.exp(log_abs)
    sq_mean = (c - c * c) / (k + 1.0)
    if abs_mean.ndim == 0:
        return float(abs_mean), float(sq_mean)
    return abs_mean, sq_mean


def coord_error_bounds(N: int, n: int, k: float) -> tuple[float, float, float]:
    """(abs_upper, abs_lower, sq_upper) over coordinates on the 1/N grid.

    The upper bound is the absolute error at C_i = 1/2; the lower bound is the
    error at the worst-case vector's coordinates.
    """
    _feasible(N, n, k)
    abs_upper = math.exp((1.0 - k) * math.log(2.0) - math.log(k) - log_beta(k / 2.0, k / 2.0))
    m = (n - 1) / N
    log_lower = (
        math.log(2.0)
        + k * (1.0 - m) * math.log(1.0 / N)
        + k * (1.0 - 1.0 / N) * math.log(m)
        - math.log(k)
        - log_beta(k / N, k * m)
    )
    return abs_upper, math.exp(log_lower), 1.0 / (4.0 * (k + 1.0))


def accuracy_report(q, k: float) -> AccuracyReport:
    """All accuracy functionals for a count vector (needs ``N`` and ``probs``)."""
    probs = _interior(q)
    N, n = int(q.N), probs.size
    abs_mean, sq_mean = coord_error_moments(probs, k)
    upper, lower, sq_upper = coord_error_bounds(N, n, k)
    return AccuracyReport(
        expected_kl_exact=expected_kl_exact(probs, k),
        expected_kl_bound=expected_kl_bound(N, n, k),
        coord_abs_error=abs_mean,
        coord_abs_error_upper=upper,
        coord_abs_error_lower=lower,
        coord_sq_error=sq_mean,
        coord_sq_error_upper=sq_upper,
    )


def _weights(pi, n):
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (n,) or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
        raise DomainError("pi must be a probability vector with one entry per state")
    return pi


def _per_row(ks, n):
    ks = np.broadcast_to(np.asarray(ks, dtype=np.float64), (n,))
    if np.any(ks <= 0):
        raise DomainError("every k_i must be positive")
    return ks


def markov_expected_kl(tc, pi, ks) -> float:
    """sum_i pi_i E[KL(P_i || P~_i)] for a transition matrix with positive entries."""
    P = np.asarray(getattr(tc, "matrix", tc), dtype=np.float64)
    n = P.shape[0]
    pi = _weights(pi, n)
    ks = _per_row(ks, n)
    if np.any(P <= 0):
        raise DomainError("every transition probability must be positive")
    return float(sum(pi[i] * expected_kl_exact(P[i], ks[i]) for i in range(n)))


def markov_kl_bound(Ns, n: int, ks, pi) -> float:
    """L = sum_i pi_i expected_kl_bound(N_i, n, k_i)."""
    pi = _weights(pi, n)
    ks = _per_row(ks, n)
    Ns = np.broadcast_to(np.asarray(Ns), (n,))
    return float(sum(pi[i] * expected_kl_bound(int(Ns[i]), n, ks[i]) for i in range(n)))


def expected_l1_bound(L: float) -> float:
    """sqrt(2 L): bound on the expected 1-norm error of the privatized matrix."""
    if L < 0:
        raise DomainError(f"L must be non-negative, got {L!r}")
    return math.sqrt(2.0 * L)
