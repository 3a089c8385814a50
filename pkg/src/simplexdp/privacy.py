"""Privacy accounting for the Dirichlet mechanism.

The output space of the mechanism is split into ``Omega_1`` (every coordinate at
least ``gamma``) and its complement. On ``Omega_1`` the log-likelihood ratio
between adjacent databases is bounded by the closed-form epsilon below; the
mass outside ``Omega_1`` at the least favourable input is delta.

Epsilon for concentration ``k``, border ``eta``, record count ``N`` and ``n``
categories::

    log B(k eta, k(1 - 2 eta)) - log B(k(eta + 1/N), k(1 - 2 eta - 1/N))
        + (k / N) log((1 - (n - 1) gamma) / gamma)

Delta is estimated by Monte Carlo at the extreme points of the bordered simplex,
where the (log-concave) probability of ``Omega_1`` attains its minimum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .data import CountVector, TransitionCounts, validate_chain_structure
from .dirichlet import DirichletParams, RngSeed, _draw, as_seed, chunked, sample
from .errors import (
    AdmissionError,
    AssumptionError,
    CalibrationError,
    DomainError,
    StructureError,
    UnsupportedError,
)
from .specfun import log_beta

__all__ = [
    "MechanismConfig",
    "PrivacyBudget",
    "DeltaEstimate",
    "Omega1Spec",
    "min_k",
    "epsilon_bound",
    "min_epsilon",
    "calibrate_k",
    "admissible_eta",
    "config_for",
    "chain_configs",
    "extreme_points",
    "omega1_probability_mc",
    "omega1_probability_quadrature",
    "delta_bound",
    "compose_parallel",
    "privatize_vector",
    "row_budgets",
    "privatize_chain",
]

DEFAULT_SAMPLES = 10**6
EPSILON_TOL = 1e-9

CLOSED_FORM = "closed-form"
MONTE_CARLO = "monte-carlo"
QUADRATURE = "quadrature"
COMPOSED = "composed"


@dataclass(frozen=True)
class MechanismConfig:
    """Per-query privacy knobs: concentration ``k``, border ``eta``, threshold
    ``gamma``, record count ``N`` and number of categories ``n``."""

    k: float
    eta: float
    gamma: float
    N: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "gamma", float(self.gamma))
        if int(self.N) != self.N or self.N < 1:
            raise AssumptionError(f"N must be a positive integer, got {self.N!r}")
        if int(self.n) != self.n or self.n < 3:
            raise AssumptionError(f"n must be an integer >= 3, got {self.n!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 < self.eta < 0.25:
            raise AssumptionError(f"eta must lie in (0, 1/4), got {self.eta!r}")
        if not 0.0 < self.gamma <= 1.0 / (self.n - 1):
            raise AssumptionError(f"gamma must lie in (0, 1/(n-1)] = (0, {1 / (self.n - 1):.6g}], got {self.gamma!r}")
        if not math.isfinite(self.k) or self.k < min_k(self.eta) * (1 - 1e-12):
            raise AssumptionError(f"k must be at least 3/(2 eta) = {min_k(self.eta):.6g}, got {self.k!r}")

    @property
    def k_min(self) -> float:
        return min_k(self.eta)

    def with_k(self, k: float) -> "MechanismConfig":
        return replace(self, k=k)


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) guarantee and how delta was obtained."""

    epsilon: float
    delta: float
    method: str = MONTE_CARLO
    mc_stderr: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise DomainError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if not 0.0 <= self.delta < 0.5:
            raise DomainError(f"delta must lie in [0, 1/2), got {self.delta!r}")

    @property
    def conservative_delta(self) -> float:
        """delta + 3 standard errors when delta is a Monte-Carlo estimate."""
        return self.delta + 3.0 * (self.mc_stderr or 0.0)


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    stderr: float
    samples: int
    minimizer: tuple[float, ...]
    extreme: str
    method: str = MONTE_CARLO


@dataclass(frozen=True)
class Omega1Spec:
    """The set of simplex points whose coordinates are all at least ``gamma``."""

    gamma: float
    n: int

    def __post_init__(self):
        if self.n < 2 or not 0.0 < self.gamma <= 1.0 / (self.n - 1):
            raise AssumptionError("Omega_1 needs 0 < gamma <= 1/(n-1)")

    def contains(self, x) -> np.ndarray | bool:
        inside = np.all(np.asarray(x) >= self.gamma, axis=-1)
        return bool(inside) if np.ndim(inside) == 0 else inside


# epsilon ---------------------------------------------------------------------


def min_k(eta: float) -> float:
    """Smallest admissible concentration 3 / (2 eta)."""
    if not 0.0 < eta < 0.25:
        raise AssumptionError(f"eta must lie in (0, 1/4), got {eta!r}")
    return 1.5 / eta


def _epsilon(k, eta, gamma, N, n):
    if 1.0 - 2.0 * eta - 1.0 / N <= 0.0:
        raise DomainError(f"1 - 2 eta - 1/N must be positive (eta={eta}, N={N})")
    if not 0.0 < gamma < 1.0 / (n - 1):
        raise DomainError(f"epsilon is finite only for 0 < gamma < 1/(n-1), got gamma={gamma}")
    k = np.asarray(k, dtype=np.float64)
    ratio = log_beta(k * eta, k * (1.0 - 2.0 * eta)) - log_beta(
        k * (eta + 1.0 / N), k * (1.0 - 2.0 * eta - 1.0 / N)
    )
    tail = (k / N) * (math.log1p(-(n - 1) * gamma) - math.log(gamma))
    out = ratio + tail
    return float(out) if np.ndim(out) == 0 else out


def epsilon_bound(cfg: MechanismConfig) -> float:
    """Certified epsilon of the Dirichlet mechanism under ``cfg``."""
    return _epsilon(cfg.k, cfg.eta, cfg.gamma, cfg.N, cfg.n)


def min_epsilon(eta: float, gamma: float, N: int, n: int) -> float:
    """Smallest certifiable epsilon, reached at k = 3 / (2 eta)."""
    return _epsilon(min_k(eta), eta, gamma, N, n)


def _bisect(f, lo: float, hi: float, target: float, tol: float) -> float:
    f_lo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid - target) <= tol:
            return mid
        if (f_mid < target) == (f_lo < target):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= 4 * np.spacing(hi):
            break
    return 0.5 * (lo + hi)


def calibrate_k(
    target_epsilon: float,
    eta: float,
    gamma: float,
    N: int,
    n: int,
    tol: float = EPSILON_TOL,
) -> float:
    """Concentration k >= 3/(2 eta) whose epsilon is within ``tol`` of the target.

    The bracket [k_min, k_hi] is grown by doubling, checked for monotonicity on
    a coarse grid, then refined by bisection. If the check fails, the bracket is
    scanned on a fine grid and bisection runs on the first sign change.
    """
    f = lambda k: _epsilon(k, eta, gamma, N, n)  # noqa: E731
    k_lo = min_k(eta)
    eps_star = f(k_lo)
    if target_epsilon < eps_star - tol:
        raise CalibrationError(
            f"target epsilon {target_epsilon:.6g} is below the smallest achievable {eps_star:.6g}",
            nearest_epsilon=eps_star,
        )
    if target_epsilon <= eps_star + tol:
        return k_lo
    k_hi = 2.0 * k_lo
    while f(k_hi) < target_epsilon:
        k_hi *= 2.0
        if k_hi > 1e15:
            raise CalibrationError("epsilon does not reach the target for any finite k")

    coarse = np.linspace(k_lo, k_hi, 65)
    if np.all(np.diff(f(coarse)) > 0):
        return _bisect(f, k_lo, k_hi, target_epsilon, tol)

    warnings.warn("epsilon is not monotone on the calibration bracket; scanning", RuntimeWarning, stacklevel=2)
    fine = np.linspace(k_lo, k_hi, 20001)
    values = f(fine) - target_epsilon
    crossings = np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:]))
    if crossings.size:
        i = crossings[0]
        return _bisect(f, fine[i], fine[i + 1], target_epsilon, tol)
    best = int(np.argmin(np.abs(values)))
    raise CalibrationError(
        f"no k reaches epsilon {target_epsilon:.6g}; nearest is {values[best] + target_epsilon:.6g} at k={fine[best]:.6g}",
        nearest_epsilon=float(values[best] + target_epsilon),
    )


# configuration helpers -----------------------------------------------------------


def admissible_eta(q: CountVector) -> float:
    """Border for ``q``: its tagged eta, pulled strictly below 1/4 on the 1/(4N) grid."""
    if not q.bordered:
        raise AdmissionError(f"count vector has zero entries or eta <= 0 ({q!r})")
    cap = (q.N - 1) / (4 * q.N)
    return min(q.eta, cap)


def config_for(
    q: CountVector,
    gamma: float,
    *,
    k: float | None = None,
    epsilon: float | None = None,
    k_scale: float | None = None,
    eta: float | None = None,
) -> MechanismConfig:
    """Mechanism config for ``q`` from exactly one of ``k``, ``epsilon`` or ``k_scale``."""
    if sum(v is not None for v in (k, epsilon, k_scale)) != 1:
        raise AssumptionError("give exactly one of k, epsilon or k_scale")
    if eta is None:
        eta = admissible_eta(q)
    elif eta > q.probs.min() + 1e-15:
        raise AdmissionError(f"eta={eta} exceeds the smallest entry {q.probs.min()}")
    if epsilon is not None:
        k = calibrate_k(epsilon, eta, gamma, q.N, q.n)
    elif k_scale is not None:
        k = k_scale * min_k(eta)
    return MechanismConfig(k=k, eta=eta, gamma=gamma, N=q.N, n=q.n)


def chain_configs(
    tc: TransitionCounts,
    gamma: float,
    *,
    k: float | Sequence[float] | None = None,
    epsilon: float | None = None,
    k_scale: float | None = None,
    eta: Sequence[float] | None = None,
) -> list[MechanismConfig]:
    """One config per row; ``k`` may be shared or per-row."""
    etas = [None] * tc.n if eta is None else list(eta)
    ks = [k] * tc.n if k is None or np.ndim(k) == 0 else list(k)
    return [
        config_for(row, gamma, k=ki, epsilon=epsilon, k_scale=k_scale, eta=ei)
        for row, ki, ei in zip(tc.rows, ks, etas)
    ]


def _check_admitted(q, cfg: MechanismConfig, where: str = "count vector") -> np.ndarray:
    probs = np.asarray(getattr(q, "probs", q), dtype=np.float64)
    if probs.shape != (cfg.n,):
        raise AdmissionError(f"{where} has {probs.size} entries, config expects n={cfg.n}")
    if isinstance(q, CountVector) and q.N != cfg.N:
        raise AdmissionError(f"{where} has N={q.N}, config expects N={cfg.N}")
    if probs.min() < cfg.eta - 1e-12:
        raise AdmissionError(f"{where} has an entry {probs.min():.6g} below eta={cfg.eta:.6g}")
    return probs


# delta -----------------------------------------------------------------------


def extreme_points(cfg: MechanismConfig, kind: str = "vertex") -> list[np.ndarray]:
    """Points where the probability of Omega_1 is minimised.

    ``"vertex"``: the n vertices of the bordered simplex, all coordinates at
    ``eta`` except one at ``1 - (n - 1) eta``.
    ``"grid"``: the same pattern on the 1/N grid, small coordinates at the
    smallest multiple of 1/N that is at least ``eta``.
    The point with the large coordinate last comes last.
    """
    if kind == "vertex":
        low = cfg.eta
    elif kind == "grid":
        low = math.ceil(cfg.eta * cfg.N - 1e-9) / cfg.N
    else:
        raise ValueError(f"unknown extreme-point kind {kind!r}")
    high = 1.0 - (cfg.n - 1) * low
    if high < low:
        raise AdmissionError(f"no room for an extreme point: eta={cfg.eta}, N={cfg.N}, n={cfg.n}")
    pts = []
    for j in range(cfg.n):
        p = np.full(cfg.n, low)
        p[j] = high
        pts.append(p)
    return pts


def omega1_probability_mc(q, cfg: MechanismConfig, M: int, rng) -> tuple[float, float]:
    """Monte-Carlo estimate of P(Dir(k q) in Omega_1) and its standard error."""
    probs = _check_admitted(q, cfg)
    if M < 1000:
        raise ValueError("use at least 1000 samples")
    params = DirichletParams(probs, cfg.k)
    gamma = cfg.gamma

    def hits(gen, size):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            x = _draw(params, gen, size)
        return int(np.count_nonzero(np.all(x >= gamma, axis=1)))

    total = sum(chunked(hits, int(M), as_seed(rng)))
    p_hat = total / M
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / M)


def _adaptive_simpson(f, a: float, b: float, tol: float, depth: int = 40) -> float:
    fa, fb, fc = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb)
    return _simpson_step(f, a, b, fa, fb, fc, whole, tol, depth)


def _simpson_step(f, a, b, fa, fb, fc, whole, tol, depth):
    c = 0.5 * (a + b)
    d, e = 0.5 * (a + c), 0.5 * (c + b)
    fd, fe = f(d), f(e)
    left = (c - a) / 6.0 * (fa + 4.0 * fd + fc)
    right = (b - c) / 6.0 * (fc + 4.0 * fe + fb)
    diff = left + right - whole
    if depth <= 0 or abs(diff) <= 15.0 * tol:
        return left + right + diff / 15.0
    return _simpson_step(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1) + _simpson_step(
        f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1
    )


def _omega1_nested(alphas: tuple[float, ...], lo: float, tol: float) -> float:
    # P(all coordinates of Dir(alphas) >= lo), peeling one coordinate at a time:
    # x_1 ~ Beta(a_1, A - a_1) and the rest, rescaled by 1 - x_1, is Dir(alphas[1:]).
    if len(alphas) == 2:
        if lo >= 0.5:
            return 0.0
        a, b = alphas
        return float(betainc(a, b, 1.0 - lo) - betainc(a, b, lo))
    m = len(alphas)
    upper = 1.0 - (m - 1) * lo
    if upper <= lo:
        return 0.0
    a = alphas[0]
    b = sum(alphas[1:])
    log_norm = log_beta(a, b)
    rest = alphas[1:]

    def integrand(x):
        if x <= 0.0 or x >= 1.0:
            return 0.0
        dens = math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - log_norm)
        return dens * _omega1_nested(rest, lo / (1.0 - x), tol)

    return _adaptive_simpson(integrand, lo, upper, tol)


def omega1_probability_quadrature(q, cfg: MechanismConfig, tol: float = 1e-10) -> float:
    """P(Dir(k q) in Omega_1) by nested adaptive Simpson quadrature (n = 3 or 4)."""
    probs = np.asarray(getattr(q, "probs", q), dtype=np.float64)
    if probs.size not in (3, 4):
        raise UnsupportedError(f"quadrature supports n in {{3, 4}}, got n={probs.size}")
    if probs.size != cfg.n:
        raise AdmissionError(f"count vector has {probs.size} entries, config expects n={cfg.n}")
    alphas = tuple(float(v) for v in cfg.k * probs)
    return min(1.0, max(0.0, _omega1_nested(alphas, cfg.gamma, tol)))


def delta_bound(
    cfg: MechanismConfig,
    M: int = DEFAULT_SAMPLES,
    rng=0,
    *,
    extreme: str = "vertex",
    exploit_symmetry: bool = True,
) -> DeltaEstimate:
    """Monte-Carlo delta: one minus the smallest probability of Omega_1 over the
    extreme points of the bordered simplex.

    With a common ``gamma`` the extreme points are permutations of each other,
    so only one is estimated; a second permutation is estimated on an
    independent stream as a consistency check.
    """
    seed = as_seed(rng)
    pts = extreme_points(cfg, extreme)
    if exploit_symmetry:
        rep, other = pts[-1], pts[0]
        p_rep, se_rep = omega1_probability_mc(rep, cfg, M, seed.spawn(0))
        p_chk, se_chk = omega1_probability_mc(other, cfg, M, seed.spawn(1))
        spread = 5.0 * math.hypot(se_rep, se_chk) + 10.0 / M
        if abs(p_rep - p_chk) > spread:
            raise RuntimeError(
                f"permuted extreme points disagree: {p_rep:.6g} vs {p_chk:.6g} (allowed {spread:.3g})"
            )
        best, se, point = p_rep, se_rep, rep
    else:
        results = [omega1_probability_mc(p, cfg, M, seed.spawn(j)) for j, p in enumerate(pts)]
        j = int(np.argmin([r[0] for r in results]))
        (best, se), point = results[j], pts[j]
    return DeltaEstimate(
        delta=1.0 - best,
        stderr=se,
        samples=int(M),
        minimizer=tuple(float(v) for v in point),
        extreme=extreme,
    )


# composition and release -------------------------------------------------------


def compose_parallel(budgets: Sequence[PrivacyBudget]) -> PrivacyBudget:
    """Release over disjoint partitions: (max epsilon_i, max delta_i)."""
    budgets = list(budgets)
    if not budgets:
        raise ValueError("nothing to compose")
    stderrs = [b.mc_stderr for b in budgets if b.mc_stderr is not None]
    return PrivacyBudget(
        epsilon=max(b.epsilon for b in budgets),
        delta=max(b.delta for b in budgets),
        method=COMPOSED,
        mc_stderr=max(stderrs) if stderrs else None,
    )


def _budget(cfg: MechanismConfig, M: int, seed: RngSeed, extreme: str) -> PrivacyBudget:
    est = delta_bound(cfg, M, seed, extreme=extreme)
    return PrivacyBudget(epsilon_bound(cfg), est.delta, MONTE_CARLO, est.stderr)


def privatize_vector(
    q: CountVector,
    cfg: MechanismConfig,
    M: int = DEFAULT_SAMPLES,
    rng=0,
    *,
    extreme: str = "vertex",
) -> tuple[np.ndarray, PrivacyBudget]:
    """Release one Dirichlet draw centred on ``q`` with its (epsilon, delta)."""
    probs = _check_admitted(q, cfg)
    seed = as_seed(rng)
    private = sample(DirichletParams(probs, cfg.k), seed.spawn(0).generator())
    return private, _budget(cfg, M, seed.spawn(1), extreme)


def row_budgets(
    cfgs: Sequence[MechanismConfig],
    M: int = DEFAULT_SAMPLES,
    rng=0,
    *,
    extreme: str = "vertex",
) -> list[PrivacyBudget]:
    """Per-row budgets exactly as :func:`privatize_chain` computes them."""
    seed = as_seed(rng)
    return [_budget(cfg, M, seed.spawn(1, i), extreme) for i, cfg in enumerate(cfgs)]


def privatize_chain(
    tc: TransitionCounts,
    cfgs: Sequence[MechanismConfig],
    M: int = DEFAULT_SAMPLES,
    rng=0,
    *,
    extreme: str = "vertex",
    z_sign: str = "paper",
):
    """Privatize every row of a transition matrix independently.

    Returns the private :class:`~simplexdp.markov.TransitionModel` and the
    parallel composition of the per-row budgets.
    """
    from .markov import TransitionModel

    cfgs = list(cfgs)
    if len(cfgs) != tc.n:
        raise AdmissionError(f"{len(cfgs)} configs for {tc.n} rows")
    diag = validate_chain_structure(tc)
    if not diag.ok:
        raise StructureError("; ".join(diag.messages))
    seed = as_seed(rng)
    rows = []
    for i, (row, cfg) in enumerate(zip(tc.rows, cfgs)):
        probs = _check_admitted(row, cfg, where=f"row {i} ({tc.states.labels[i]!r})")
        rows.append(sample(DirichletParams(probs, cfg.k), seed.spawn(0, i).generator()))
    model = TransitionModel.from_matrix(np.vstack(rows), tc.states.labels, z_sign=z_sign)
    budget = compose_parallel(row_budgets(cfgs, M, seed, extreme=extreme))
    return model, budget
