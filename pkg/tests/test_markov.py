from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexdp.data import is_irreducible
from simplexdp.dirichlet import DirichletParams, RngSeed, sample_batch
from simplexdp.errors import ConditioningError, DomainError, StructureError, UnsupportedError
from simplexdp.markov import (
    TransitionModel,
    fundamental_matrix,
    induced_norm1,
    perturbation_bounds,
    stationary_distribution,
    tau_inf,
    tau_inf_bruteforce,
    tv_distance,
)
from simplexdp.privacy import min_k


def random_stochastic(rng, n, positive=True):
    P = rng.dirichlet(np.ones(n), size=n)
    if not positive:
        P[rng.random((n, n)) < 0.3] = 0.0
        P[np.arange(n), rng.integers(0, n, size=n)] += 0.1
        P /= P.sum(axis=1, keepdims=True)
    return P


def exact_inverse(A):
    """Gauss-Jordan elimination over the rationals."""
    n = len(A)
    M = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        pivot = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[pivot] = M[pivot], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


# stationary distribution -------------------------------------------------------


def test_doubly_stochastic_is_uniform():
    P = np.array(
        [
            [0.1, 0.2, 0.3, 0.4],
            [0.4, 0.1, 0.2, 0.3],
            [0.3, 0.4, 0.1, 0.2],
            [0.2, 0.3, 0.4, 0.1],
        ]
    )
    np.testing.assert_allclose(stationary_distribution(P), 0.25, atol=1e-15)


def test_symmetric_three_state_is_uniform():
    P = np.array([[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]])
    np.testing.assert_allclose(stationary_distribution(P), 1 / 3, atol=1e-15)


def test_matches_power_iteration():
    rng = np.random.default_rng(0)
    for _ in range(10):
        P = random_stochastic(rng, 5)
        x = np.full(5, 0.2)
        for _ in range(10_000):
            x = x @ P
        np.testing.assert_allclose(stationary_distribution(P), x, atol=1e-8)


def test_stationary_invariants():
    rng = np.random.default_rng(1)
    for _ in range(50):
        P = random_stochastic(rng, int(rng.integers(2, 12)), positive=False)
        if not is_irreducible(P):
            with pytest.raises(StructureError):
                stationary_distribution(P)
            continue
        pi = stationary_distribution(P)
        assert abs(pi.sum() - 1) <= 1e-12
        assert np.max(np.abs(pi @ P - pi)) <= 1e-10


def test_stationary_errors():
    with pytest.raises(DomainError):
        stationary_distribution(np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(DomainError):
        stationary_distribution(np.ones((2, 3)) / 3)
    reducible = np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]])
    with pytest.raises(StructureError):
        stationary_distribution(reducible)


# fundamental matrix -------------------------------------------------------------


def test_fundamental_matrix_identities():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        P = random_stochastic(rng, n)
        pi = stationary_distribution(P)
        Z, norm = fundamental_matrix(P, pi)
        A = np.eye(n) - P - np.outer(np.ones(n), pi)
        np.testing.assert_allclose(Z @ A, np.eye(n), atol=1e-8)
        # (I - P - 1 pi^T) 1 = -1, so Z 1 = -1
        np.testing.assert_allclose(Z.sum(axis=1), -1.0, atol=1e-12)
        assert norm == induced_norm1(Z)

        Zc, _ = fundamental_matrix(P, pi, "classical")
        np.testing.assert_allclose(Zc.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(Z, Zc - 2 * np.outer(np.ones(n), pi), atol=1e-10)


def test_fundamental_matrix_exact_rational():
    P = [[Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)],
         [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)],
         [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]]
    pi = [Fraction(1, 3)] * 3
    A = [[Fraction(int(i == j)) - P[i][j] - pi[j] for j in range(3)] for i in range(3)]
    Zq = exact_inverse(A)
    # A = 3/4 I - 7/12 J, so Z = 4/3 I - 7/9 J: diagonal 5/9, off-diagonal -7/9
    assert Zq[0][0] == Fraction(5, 9) and Zq[0][1] == Fraction(-7, 9)
    want = max(sum(abs(Zq[i][j]) for i in range(3)) for j in range(3))
    assert want == Fraction(19, 9)
    Z, norm = fundamental_matrix(np.array(P, dtype=float), np.array(pi, dtype=float))
    assert norm == pytest.approx(float(want), rel=1e-14)
    np.testing.assert_allclose(Z, np.array(Zq, dtype=float), atol=1e-14)


def test_fundamental_matrix_conditioning():
    eps = 1e-15
    P = np.array([[1 - eps, eps, 0.0], [eps, 1 - 2 * eps, eps], [0.0, eps, 1 - eps]])
    with pytest.raises(ConditioningError):
        fundamental_matrix(P, np.full(3, 1 / 3))
    with pytest.raises(ValueError):
        fundamental_matrix(np.full((3, 3), 1 / 3), np.full(3, 1 / 3), "other")


# ergodicity coefficient -------------------------------------------------------------


def test_tau_examples():
    assert tau_inf(np.tile([0.2, 0.3, 0.5], (3, 1))) == 0.0
    assert tau_inf_bruteforce(np.tile([0.2, 0.3, 0.5], (3, 1))) == 0.0
    perm = np.eye(4)[[1, 2, 3, 0]]
    assert tau_inf(perm) == 1.0
    assert tau_inf_bruteforce(perm) == 1.0


def test_tau_hand_enumeration():
    # uniform chain with row 0 moved by (+0.1, -0.1, 0): columns 0 and 1 spread by 0.1
    P = np.full((3, 3), 1 / 3)
    P[0] += [0.1, -0.1, 0.0]
    assert tau_inf_bruteforce(P) == pytest.approx(0.1, abs=1e-15)
    assert tau_inf(P) == pytest.approx(0.1, abs=1e-15)


def test_tau_can_exceed_one():
    # column (1, 1, 0, 0) reaches 2 with z = (1, 1, -1, -1)
    P = np.array([[1.0, 0, 0, 0], [1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 1.0, 0, 0]])
    assert tau_inf(P) == tau_inf_bruteforce(P) == 2.0


@pytest.mark.parametrize("n", [3, 4, 6])
def test_tau_closed_form_equals_bruteforce(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        P = random_stochastic(rng, n, positive=bool(rng.random() < 0.5))
        assert abs(tau_inf(P) - tau_inf_bruteforce(P)) <= 1e-12


def test_bruteforce_limit():
    with pytest.raises(UnsupportedError):
        tau_inf_bruteforce(np.full((11, 11), 1 / 11))


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2**32))
def test_tau_permutation_invariance_and_envelope(n, seed):
    rng = np.random.default_rng(seed)
    P = random_stochastic(rng, n, positive=bool(rng.random() < 0.5))
    perm = rng.permutation(n)
    assert tau_inf(P[perm][:, perm]) == pytest.approx(tau_inf(P), abs=1e-15)
    spread = np.max(P.max(axis=0) - P.min(axis=0))
    assert spread - 1e-15 <= tau_inf(P) <= (n // 2) * spread + 1e-15


# bounds ---------------------------------------------------------------------------


def test_transition_model():
    rng = np.random.default_rng(3)
    P = random_stochastic(rng, 4)
    m = TransitionModel.from_matrix(P, ("a", "b", "c", "d"))
    assert m.n == 4 and m.diagnostics.positive
    assert m.tau_inf == tau_inf(P)
    assert m.Z_norm1 == fundamental_matrix(P, m.pi)[1]
    assert m == TransitionModel.from_matrix(P, ("a", "b", "c", "d"))
    c = TransitionModel.from_matrix(P, z_sign="classical")
    assert c.Z_norm1 != m.Z_norm1


def test_tv_distance():
    assert tv_distance([0.5, 0.5, 0.0], [0.0, 0.5, 0.5]) == 0.5


def _chain(rng, n=4, N=200):
    counts = np.array([rng.multinomial(N - n, rng.dirichlet(np.ones(n))) + 1 for _ in range(n)])
    P = counts / N
    ks = np.array([2 * min_k(row.min()) for row in P])
    return P, np.full(n, N), ks


def test_bound_identities_and_monotonicity():
    rng = np.random.default_rng(4)
    for _ in range(20):
        P, Ns, ks = _chain(rng)
        pi = stationary_distribution(P)
        b = perturbation_bounds(P, pi, Ns, ks)
        _, znorm = fundamental_matrix(P, pi)
        assert b.tv_bound == pytest.approx(0.5 * znorm * np.sqrt(2 * b.L), rel=1e-15)
        assert b.tau_bound == pytest.approx(np.sqrt(2 * b.L), rel=1e-15)
        b2 = perturbation_bounds(P, pi, Ns, 2 * ks)
        assert b2.tv_bound < b.tv_bound and b2.tau_bound < b.tau_bound


def test_bounds_need_positive_matrix():
    P = np.array([[0.5, 0.5, 0.0], [0.3, 0.3, 0.4], [0.2, 0.4, 0.4]])
    with pytest.raises(StructureError):
        perturbation_bounds(P, stationary_distribution(P), [50] * 3, [20.0] * 3)


def test_samplewise_stationary_perturbation_inequality():
    rng = np.random.default_rng(5)
    for trial in range(10):
        P, Ns, ks = _chain(rng)
        pi = stationary_distribution(P)
        _, znorm = fundamental_matrix(P, pi)
        draws = [sample_batch(DirichletParams(P[i], ks[i]), 200, RngSeed(trial, path=(i,))) for i in range(4)]
        for r in range(200):
            Pt = np.vstack([d[r] for d in draws])
            lhs = np.abs(pi - stationary_distribution(Pt)).sum()
            assert lhs <= znorm * induced_norm1(P - Pt) + 1e-12


def test_bounds_dominate_small_monte_carlo():
    rng = np.random.default_rng(6)
    P, Ns, ks = _chain(rng)
    pi = stationary_distribution(P)
    b = perturbation_bounds(P, pi, Ns, ks)
    t0 = tau_inf(P)
    draws = [sample_batch(DirichletParams(P[i], ks[i]), 300, RngSeed(7, path=(i,))) for i in range(4)]
    tvs, taus = [], []
    for r in range(300):
        Pt = np.vstack([d[r] for d in draws])
        tvs.append(tv_distance(pi, stationary_distribution(Pt)))
        taus.append(abs(t0 - tau_inf(Pt)))
    assert np.mean(tvs) <= b.tv_bound
    assert np.mean(taus) <= b.tau_bound
