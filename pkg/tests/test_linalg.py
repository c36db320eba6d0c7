import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nprlab.errors import NegativeQuadraticForm, NotPositiveDefinite
from nprlab.linalg import (InverseTracker, chol_inverse, chol_logdet, extreme_eigenvalues, mahalanobis,
                           sm_rank1_inverse_update)


def cofactor_det(M):
    # Leibniz expansion; independent of any factorization
    n = len(M)
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        total += (-1) ** inversions * math.prod(M[i][perm[i]] for i in range(n))
    return total


def random_spd(rng, n, jitter=0.5):
    B = rng.normal(size=(n, n))
    return B @ B.T + jitter * np.eye(n)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_logdet_matches_cofactor_expansion(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        M = random_spd(rng, n)
        L, logdet = chol_logdet(M)
        assert np.allclose(L @ L.T, M)
        assert np.allclose(L, np.tril(L))
        assert logdet == pytest.approx(math.log(cofactor_det(M.tolist())), rel=1e-10, abs=1e-10)


def test_logdet_of_scaled_identity():
    _, ld = chol_logdet(3.0 * np.eye(4))
    assert ld == pytest.approx(4 * math.log(3.0))


@pytest.mark.parametrize("M", [np.array([[1.0, 2.0], [2.0, 1.0]]), np.zeros((2, 2)), -np.eye(3)])
def test_indefinite_rejected(M):
    with pytest.raises(NotPositiveDefinite):
        chol_logdet(M)


def test_non_square_rejected():
    with pytest.raises(ValueError):
        chol_logdet(np.ones((2, 3)))


def test_chol_inverse():
    rng = np.random.default_rng(1)
    M = random_spd(rng, 6)
    inv = chol_inverse(M)
    assert np.allclose(inv @ M, np.eye(6), atol=1e-10)
    assert np.array_equal(inv, inv.T)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1), scale=st.floats(0.01, 10.0))
def test_sherman_morrison_matches_direct_inverse(n, seed, scale):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    v = rng.normal(size=n)
    before = np.linalg.inv(A)
    keep = before.copy()
    got = sm_rank1_inverse_update(before, v, scale)
    want = np.linalg.inv(A + scale * np.outer(v, v))
    assert np.allclose(got, want, rtol=1e-8, atol=1e-10)
    assert np.array_equal(before, keep)


def test_tracker_stays_accurate_over_many_updates():
    rng = np.random.default_rng(7)
    dim = 12
    tr = InverseTracker(dim, lam=0.5, refactor_every=500)
    for i in range(1200):
        tr.update(rng.normal(size=dim) * 0.3)
        if i in (10, 499, 500, 1199):
            assert np.allclose(tr.Ainv @ tr.A, np.eye(dim), atol=1e-7)
    assert tr.updates == 1200


def test_tracker_refactor_resets_drift():
    rng = np.random.default_rng(3)
    tr = InverseTracker(4, lam=1.0, refactor_every=3)
    for _ in range(3):
        tr.update(rng.normal(size=4))
    assert np.allclose(tr.Ainv, chol_inverse(tr.A), atol=1e-14)


def test_tracker_rejects_nonpositive_lambda():
    with pytest.raises(NotPositiveDefinite):
        InverseTracker(3, lam=0.0)


def test_mahalanobis_full_and_diagonal():
    A = np.diag([1.0, 4.0, 9.0])
    Ainv = np.linalg.inv(A)
    v = np.array([1.0, 2.0, 3.0])
    assert mahalanobis(v, Ainv) == pytest.approx(math.sqrt(3.0))
    assert mahalanobis(v, np.diag(Ainv)) == pytest.approx(math.sqrt(3.0))
    assert mahalanobis(np.zeros(3), Ainv) == 0.0


def test_mahalanobis_detects_corrupted_inverse():
    with pytest.raises(NegativeQuadraticForm):
        mahalanobis(np.ones(2), -np.eye(2))
    with pytest.raises(ValueError):
        mahalanobis(np.ones(3), np.eye(2))


def test_mahalanobis_clamps_roundoff():
    assert mahalanobis(np.ones(2), -1e-12 * np.eye(2)) == 0.0


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_extreme_eigenvalues_match_eigvalsh(n, seed):
    rng = np.random.default_rng(seed)
    M = random_spd(rng, n, jitter=0.1)
    lo, hi = extreme_eigenvalues(M)
    ev = np.linalg.eigvalsh(M)
    assert lo == pytest.approx(ev[0], rel=1e-6, abs=1e-8)
    assert hi == pytest.approx(ev[-1], rel=1e-6, abs=1e-8)


def test_extreme_eigenvalues_known_spectrum():
    Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(5, 5)))
    M = Q @ np.diag([0.5, 1.0, 2.0, 3.0, 7.0]) @ Q.T
    lo, hi = extreme_eigenvalues(0.5 * (M + M.T))
    assert lo == pytest.approx(0.5, abs=1e-7)
    assert hi == pytest.approx(7.0, abs=1e-7)


def test_extreme_eigenvalues_indefinite_and_constant():
    lo, hi = extreme_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert (lo, hi) == (pytest.approx(-1.0), pytest.approx(1.0))
    assert extreme_eigenvalues(2.0 * np.eye(3)) == (2.0, 2.0)
    assert extreme_eigenvalues([[4.0]]) == (4.0, 4.0)


def test_two_by_two_analytic():
    lo, hi = extreme_eigenvalues(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert lo == pytest.approx(1.0, rel=1e-8)
    assert hi == pytest.approx(3.0, rel=1e-8)


def test_random_symmetric_8x8_against_characteristic_polynomial():
    rng = np.random.default_rng(8)
    B = rng.normal(size=(8, 8))
    M = 0.5 * (B + B.T)
    roots = np.sort(np.roots(np.poly(M)).real)
    lo, hi = extreme_eigenvalues(M)
    assert lo == pytest.approx(roots[0], rel=1e-6)
    assert hi == pytest.approx(roots[-1], rel=1e-6)


def test_clustered_extremes():
    Q, _ = np.linalg.qr(np.random.default_rng(2).normal(size=(6, 6)))
    spectrum = np.array([1.0, 1.0 + 1e-9, 2.0, 3.0, 5.0 - 1e-9, 5.0])
    M = Q @ np.diag(spectrum) @ Q.T
    lo, hi = extreme_eigenvalues(0.5 * (M + M.T))
    assert lo == pytest.approx(1.0, rel=1e-8)
    assert hi == pytest.approx(5.0, rel=1e-8)
