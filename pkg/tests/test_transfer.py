from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import GOLDEN
from soficgibbs import (
    NoConvergence,
    NonPositiveEntry,
    NotPrimitive,
    build_sft,
    build_transfer,
    gamma_tau,
    perron,
    power_estimate,
    projective_distance,
)
from soficgibbs.transfer import primitivity_index


def random_primitive_int(rng, d, density=0.6, high=4):
    while True:
        A = rng.integers(1, high, size=(d, d)) * (rng.random((d, d)) < density)
        if primitivity_index(A) is not None:
            return A


# -- construction ----------------------------------------------------------


def test_full_shift_matrix(full2, zero2):
    M = build_transfer(build_sft(full2, 0), 0, zero2)
    np.testing.assert_array_equal(M.dense(), np.ones((2, 2)))


def test_golden_matrix(golden, zero2):
    M = build_transfer(build_sft(golden, 1), 0, zero2)
    assert M.words == ((0,), (1,))
    np.testing.assert_array_equal(M.dense(), [[1, 1], [1, 0]])


def test_bernoulli_matrix(full2, bern):
    M = build_transfer(build_sft(full2, 0), 0, bern)
    np.testing.assert_allclose(M.dense(), [[1 / 3, 1 / 3], [2 / 3, 2 / 3]], rtol=1e-15)


def test_entries_follow_overlap_rule(even, holder4):
    S = build_sft(even, 3)
    M = build_transfer(S, 4, holder4)
    A = M.dense()
    for i, a in enumerate(M.words):
        for j, b in enumerate(M.words):
            c = a + b[-1:]
            if a[1:] == b[:-1] and S.is_admissible(c):
                assert A[i, j] == pytest.approx(math.exp(holder4.finite_range(5, c)))
            else:
                assert A[i, j] == 0


def test_depth_too_small(even, zero2):
    with pytest.raises(ValueError):
        build_transfer(build_sft(even, 4), 2, zero2)


def test_coordinate_dump(golden, zero2):
    M = build_transfer(build_sft(golden, 1), 0, zero2)
    assert M.to_coo_text(golden.alphabet) == "0 0 1\n0 1 1\n1 0 1\n"


# -- Birkhoff coefficient and projective distance --------------------------


def test_gamma_tau_examples():
    assert gamma_tau(np.ones((3, 3))) == (1.0, 0.0)
    assert gamma_tau(np.array([[1.0, 0.0], [1.0, 1.0]])) == (0.0, 1.0)
    G, tau = gamma_tau(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert G == pytest.approx(0.5)
    assert tau == pytest.approx(1 / 3)


def _gamma_brute(A):
    d = A.shape[0]
    return min(math.sqrt(A[i, j] * A[k, l] / (A[i, l] * A[k, j]))
               for i in range(d) for k in range(d) for j in range(d) for l in range(d))


def test_gamma_matches_quadruple_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = rng.uniform(0.1, 5, size=(4, 4))
        assert gamma_tau(A)[0] == pytest.approx(_gamma_brute(A), rel=1e-12)


def test_projective_distance_examples():
    x = np.array([0.2, 0.3, 0.5])
    assert projective_distance(x, x) == 0
    assert projective_distance([0.5, 0.5], [0.25, 0.75]) == pytest.approx(math.log(3))
    assert projective_distance(x, 7.5 * x) == pytest.approx(0, abs=1e-15)


def test_projective_distance_needs_positive():
    with pytest.raises(NonPositiveEntry):
        projective_distance([1, 0], [1, 1])


def test_contraction_on_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(300):
        d = int(rng.integers(2, 7))
        M = rng.uniform(0.01, 3, size=(d, d))
        tau = gamma_tau(M)[1]
        x, y = rng.uniform(0.01, 1, d), rng.uniform(0.01, 1, d)
        assert projective_distance(M @ x, M @ y) <= tau * projective_distance(x, y) + 1e-12


# -- Perron data -----------------------------------------------------------


@pytest.mark.parametrize("k", [2, 3, 5])
def test_all_ones(k):
    pd = perron(np.ones((k, k)))
    assert pd.rho == pytest.approx(k, abs=1e-14)
    np.testing.assert_allclose(pd.v, 1 / k)
    assert pd.tau == 0.0


def test_golden_perron():
    pd = perron(np.array([[1.0, 1.0], [1.0, 0.0]]))
    assert abs(pd.rho - GOLDEN) < 1e-10
    assert pd.v[0] / pd.v[1] == pytest.approx(GOLDEN, abs=1e-10)
    assert pd.rho_bracket[0] <= GOLDEN <= pd.rho_bracket[1]


def test_random_matches_eigensolver():
    rng = np.random.default_rng(20)
    M = rng.uniform(0.0, 1.0, size=(20, 20))
    pd = perron(M)
    assert abs(pd.rho - np.max(np.abs(np.linalg.eigvals(M)))) < 1e-10


def test_residuals_and_normalization():
    rng = np.random.default_rng(4)
    for _ in range(10):
        M = random_primitive_int(rng, 6).astype(float)
        pd = perron(M)
        assert np.max(np.abs(M @ pd.v - pd.rho * pd.v)) <= pd.err * pd.rho
        assert np.max(np.abs(pd.w @ M - pd.rho * pd.w)) <= pd.err * pd.rho * np.max(pd.w)
        assert pd.w @ pd.v == pytest.approx(1.0, abs=pd.err)
        assert abs(pd.v.sum() - 1) < 1e-12


def test_scale_covariance():
    rng = np.random.default_rng(5)
    M = random_primitive_int(rng, 5).astype(float)
    a, b = perron(M), perron(3.5 * M)
    assert b.rho == pytest.approx(3.5 * a.rho, rel=1e-12)
    np.testing.assert_allclose(a.v, b.v, rtol=1e-10)
    np.testing.assert_allclose(a.w, b.w, rtol=1e-10)


def test_permutation_covariance():
    rng = np.random.default_rng(6)
    M = random_primitive_int(rng, 6).astype(float)
    perm = rng.permutation(6)
    a, b = perron(M), perron(M[np.ix_(perm, perm)])
    np.testing.assert_allclose(b.v, a.v[perm], rtol=1e-10)
    np.testing.assert_allclose(b.w, a.w[perm], rtol=1e-10)


def test_single_entry():
    pd = perron(np.array([[2.5]]))
    assert pd.rho == 2.5 and pd.tau == 0.0


def test_not_primitive():
    with pytest.raises(NotPrimitive):
        perron(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_no_convergence_when_tau_near_one():
    M = np.array([[1.0, 1e-6], [1e-6, 2.0]])
    with pytest.raises(NoConvergence):
        perron(M, tol=1e-12, max_iter=50)


def test_a_priori_tau_above_dense_limit(golden, zero2):
    M = build_transfer(build_sft(golden, 3), 5, zero2)
    pd = perron(M, 1, tau_bound=0.9, dense_limit=4)
    assert pd.tau_source == "a-priori"
    assert pd.log_rho == pytest.approx(math.log(GOLDEN), abs=1e-11)


def test_primitivity_index():
    assert primitivity_index(np.array([[1, 1], [1, 0]])) == 2
    assert primitivity_index(np.ones((3, 3))) == 1
    assert primitivity_index(np.array([[0, 1], [1, 0]])) is None


# -- power estimates -------------------------------------------------------


def test_power_estimate_all_ones():
    M = np.ones((3, 3))
    pd = perron(M)
    x = np.full(3, 1 / 3)
    est, rad = power_estimate(M, pd, x, 4)
    np.testing.assert_allclose(est, np.linalg.matrix_power(M, 4) @ x, rtol=1e-14)
    assert rad < 1e-12


def test_power_estimate_at_zero_steps_keeps_the_start_vector():
    M = np.ones((2, 2))
    pd = perron(M)
    x = np.array([0.9, 0.1])
    est, rad = power_estimate(M, pd, x, 0)
    assert np.all(est * np.exp(-rad) <= x + 1e-15) and np.all(x <= est * np.exp(rad) + 1e-15)


def test_power_estimate_fibonacci():
    M = np.array([[1, 1], [1, 0]])
    pd = perron(M.astype(float))
    est, rad = power_estimate(M, pd, np.array([1.0, 0.0]), 10)
    exact = np.linalg.matrix_power(np.array(M, dtype=object), 10) @ np.array([1, 0], dtype=object)
    assert list(exact) == [89, 55]
    exact = exact.astype(float)
    assert np.all(est * math.exp(-rad) <= exact) and np.all(exact <= est * math.exp(rad))


def test_power_estimate_random_brackets():
    rng = np.random.default_rng(8)
    for _ in range(50):
        M = random_primitive_int(rng, 8)
        pd = perron(M.astype(float))
        x = rng.integers(1, 5, size=8)
        for k in (4, 8, 16):
            est, rad = power_estimate(M, pd, x.astype(float), k)
            exact = (np.linalg.matrix_power(np.array(M, dtype=object), k) @ np.array(x, dtype=object))
            exact = exact.astype(float)
            assert np.all(est * math.exp(-rad) <= exact * (1 + 1e-14))
            assert np.all(exact <= est * math.exp(rad) * (1 + 1e-14))


def test_power_estimate_rejects_negative():
    M = np.ones((2, 2))
    with pytest.raises(NonPositiveEntry):
        power_estimate(M, perron(M), [-1.0, 1.0], 3)


@pytest.mark.parametrize("fixture", ["golden", "full2"])
def test_primitivity_index_within_specification_bound(fixture, request, zero2):
    from soficgibbs import specification_length

    P = request.getfixturevalue(fixture)
    ell = specification_length(P)
    for m in range(0, 5):
        for n in range(m, m + 3):
            M = build_transfer(build_sft(P, m), n, zero2)
            assert primitivity_index(M.matrix) <= ell + n + 1


def test_even_shift_approximations_need_longer_blocks(even, zero2):
    # X_m admits odd 0-runs up to length about m, so ell + n + 1 steps are
    # not always enough to connect two index words; perron raises L instead
    M = build_transfer(build_sft(even, 4), 4, zero2)
    assert primitivity_index(M.matrix) == 7 > 1 + 4 + 1
    pd = perron(M, 1)
    assert pd.L == 7
