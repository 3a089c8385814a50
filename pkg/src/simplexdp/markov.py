"""Markov-chain analysis for privatized transition matrices.

Perturbation bounds, with ``L`` the stationary-weighted bound on the expected
KL divergence of the rows::

    E TV(pi, pi~)        <= 1/2 ||Z||_1 sqrt(2 L)
    E |tau(P) - tau(P~)| <= sqrt(2 L)

where ``Z = (I - P - 1 pi^T)^{-1}`` and ``||.||_1`` is the induced 1-norm
(largest absolute column sum). The classical fundamental matrix uses
``+ 1 pi^T``; it is available through ``sign="classical"``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .accuracy import expected_l1_bound, markov_kl_bound
from .data import is_irreducible
from .errors import ConditioningError, DomainError, StructureError, UnsupportedError

__all__ = [
    "TransitionModel",
    "PerturbationBounds",
    "ModelDiagnostics",
    "check_stochastic",
    "stationary_distribution",
    "fundamental_matrix",
    "induced_norm1",
    "tau_inf",
    "tau_inf_bruteforce",
    "perturbation_bounds",
    "tv_distance",
]

ROW_SUM_TOL = 1e-12
RESIDUAL_TOL = 1e-10
MAX_CONDITION = 1e12
BRUTEFORCE_MAX_N = 10
Z_SIGNS = ("paper", "classical")


def check_stochastic(P, tol: float = ROW_SUM_TOL) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise DomainError(f"expected a square matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise DomainError("transition probabilities must be finite and non-negative")
    worst = np.max(np.abs(P.sum(axis=1) - 1.0))
    if worst > tol:
        raise DomainError(f"rows must sum to 1 (worst deviation {worst:.3g})")
    return P


def induced_norm1(A) -> float:
    """Induced matrix 1-norm: the largest absolute column sum."""
    return float(np.max(np.sum(np.abs(np.asarray(A)), axis=0)))


def tv_distance(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def stationary_distribution(P) -> np.ndarray:
    """Solve pi^T (I - P) = 0 with sum(pi) = 1 by a dense direct solve.

    The last balance equation is replaced by the normalisation.
    """
    P = check_stochastic(P)
    if not is_irreducible(P):
        raise StructureError("chain is reducible; the stationary distribution is not unique")
    n = P.shape[0]
    A = (np.eye(n) - P).T
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise ConditioningError("stationary system is singular") from None
    residual = np.max(np.abs(pi @ P - pi))
    if residual > RESIDUAL_TOL:
        raise ConditioningError(f"stationary residual {residual:.3g} exceeds {RESIDUAL_TOL:g}")
    return pi


def fundamental_matrix(P, pi, sign: str = "paper") -> tuple[np.ndarray, float]:
    """(Z, ||Z||_1) with Z = (I - P - 1 pi^T)^{-1}, or ``+ 1 pi^T`` for ``sign="classical"``."""
    if sign not in Z_SIGNS:
        raise ValueError(f"sign must be one of {Z_SIGNS}, got {sign!r}")
    P = check_stochastic(P)
    n = P.shape[0]
    pi = np.asarray(pi, dtype=np.float64)
    s = -1.0 if sign == "paper" else 1.0
    A = np.eye(n) - P + s * np.outer(np.ones(n), pi)
    cond = np.linalg.cond(A, 1)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(f"I - P {'-' if s < 0 else '+'} 1 pi^T is ill-conditioned (condition number {cond:.3g})")
    Z = np.linalg.inv(A)
    return Z, induced_norm1(Z)


def _half_spread(c: np.ndarray, h: int) -> np.ndarray:
    s = np.sort(c, axis=0)
    return s[-h:].sum(axis=0) - s[:h].sum(axis=0)


def tau_inf(P) -> float:
    """Infinity-norm ergodicity coefficient max ||P^T z||_inf over sum(z) = 0, ||z||_inf <= 1.

    For a column c the inner maximum of c^T z is attained with z = +1 on the
    floor(n/2) largest entries, -1 on the floor(n/2) smallest and 0 on the
    middle entry when n is odd.
    """
    P = check_stochastic(P)
    return float(np.max(_half_spread(P, P.shape[0] // 2)))


def tau_inf_bruteforce(P) -> float:
    """Vertex enumeration of {z : ||z||_inf <= 1, sum z = 0} for n <= 10.

    Every vertex has at most one coordinate strictly inside (-1, 1); it is
    fixed by the balance condition once the others are set to +-1.
    """
    P = check_stochastic(P)
    n = P.shape[0]
    if n > BRUTEFORCE_MAX_N:
        raise UnsupportedError(f"brute force supports n <= {BRUTEFORCE_MAX_N}, got {n}")
    best = 0.0
    for free in range(n):
        others = [j for j in range(n) if j != free]
        for signs in itertools.product((-1.0, 1.0), repeat=n - 1):
            z = np.empty(n)
            z[others] = signs
            z[free] = -sum(signs)
            if abs(z[free]) > 1.0:
                continue
            best = max(best, float(np.max(np.abs(P.T @ z))))
    return best


@dataclass(frozen=True)
class ModelDiagnostics:
    irreducible: bool
    positive: bool
    max_row_error: float
    stationary_residual: float
    z_condition: float


@dataclass(frozen=True, eq=False)
class TransitionModel:
    P: np.ndarray
    pi: np.ndarray
    tau_inf: float
    Z_norm1: float
    diagnostics: ModelDiagnostics
    labels: tuple[str, ...] = ()
    z_sign: str = "paper"

    @classmethod
    def from_matrix(cls, P, labels=(), z_sign: str = "paper") -> "TransitionModel":
        P = check_stochastic(P)
        n = P.shape[0]
        pi = stationary_distribution(P)
        Z, znorm = fundamental_matrix(P, pi, z_sign)
        s = -1.0 if z_sign == "paper" else 1.0
        diag = ModelDiagnostics(
            irreducible=True,
            positive=bool(np.all(P > 0)),
            max_row_error=float(np.max(np.abs(P.sum(axis=1) - 1.0))),
            stationary_residual=float(np.max(np.abs(pi @ P - pi))),
            z_condition=float(np.linalg.cond(np.eye(n) - P + s * np.outer(np.ones(n), pi), 1)),
        )
        P = P.copy()
        P.setflags(write=False)
        pi.setflags(write=False)
        return cls(P, pi, tau_inf(P), znorm, diag, tuple(labels), z_sign)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TransitionModel):
            return NotImplemented
        return (
            np.array_equal(self.P, other.P)
            and np.array_equal(self.pi, other.pi)
            and self.tau_inf == other.tau_inf
            and self.Z_norm1 == other.Z_norm1
            and self.diagnostics == other.diagnostics
            and self.labels == other.labels
            and self.z_sign == other.z_sign
        )


@dataclass(frozen=True)
class PerturbationBounds:
    L: float
    tv_bound: float
    tau_bound: float


def perturbation_bounds(P, pi, Ns, ks, z_sign: str = "paper") -> PerturbationBounds:
    """Bounds on the expected stationary TV drift and ergodicity-coefficient drift."""
    P = check_stochastic(P)
    if np.any(P <= 0):
        raise StructureError("perturbation bounds need a strictly positive transition matrix")
    n = P.shape[0]
    L = markov_kl_bound(Ns, n, ks, pi)
    _, znorm = fundamental_matrix(P, pi, z_sign)
    root = expected_l1_bound(L)
    return PerturbationBounds(L=L, tv_bound=0.5 * znorm * root, tau_bound=root)

