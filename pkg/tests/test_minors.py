import math

import numpy as np
import pytest

from quasicone.minors import (HypothesisError, SymmetricMatrixPair,
                              minor_chain_check, minor_sum, minor_sums,
                              pencil_poly, pencil_roots, random_ordered_pair)


def test_minor_sums_identity_binomial():
    pair = SymmetricMatrixPair(np.eye(3), np.eye(3))
    assert minor_sums(pair).s == (1.0, 3.0, 3.0, 1.0)


def test_minor_sum_hand_case_2x2():
    pair = SymmetricMatrixPair(np.diag([2.0, 2.0]), np.eye(2))
    # det(A - tB) = (2-t)^2 = 4 - 4t + t^2
    assert minor_sum(pair, 0) == pytest.approx(4.0)
    assert minor_sum(pair, 1) == pytest.approx(4.0)
    assert minor_sum(pair, 2) == pytest.approx(1.0)


def test_minor_sum_endpoints_are_determinants():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4, 5):
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, n))
        pair = SymmetricMatrixPair(A + A.T, B + B.T)
        assert minor_sum(pair, 0) == pytest.approx(np.linalg.det(pair.A),
                                                   rel=1e-10, abs=1e-10)
        assert minor_sum(pair, n) == pytest.approx(np.linalg.det(pair.B),
                                                   rel=1e-10, abs=1e-10)


def test_minor_sum_range_checked():
    pair = SymmetricMatrixPair(np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        minor_sum(pair, 3)


def test_pencil_poly_identity():
    pair = SymmetricMatrixPair(np.eye(3), np.eye(3))
    np.testing.assert_allclose(pencil_poly(pair).coefficients,
                               (1.0, -3.0, 3.0, -1.0), atol=1e-12)


def test_pencil_poly_zero_b():
    A = np.diag([2.0, 3.0, 4.0])
    pair = SymmetricMatrixPair(A, np.zeros((3, 3)))
    np.testing.assert_allclose(pencil_poly(pair).coefficients, (24.0,),
                               atol=1e-10)


def test_pencil_poly_matches_signed_minor_sums():
    # the two independent computations are the oracle pair for each other
    rng = np.random.default_rng(42)
    for n in (2, 3, 4, 5, 6):
        for _ in range(20):
            pair = random_ordered_pair(n, rng)
            sums = minor_sums(pair).s
            coefs = list(pencil_poly(pair).coefficients)
            coefs += [0.0] * (n + 1 - len(coefs))
            scale = max(1.0, max(abs(s) for s in sums))
            for m in range(n + 1):
                assert abs(coefs[m] - (-1.0) ** m * sums[m]) <= 1e-9 * scale


def test_pencil_roots_equal_pair():
    pair = SymmetricMatrixPair(np.eye(3), np.eye(3))
    np.testing.assert_allclose(pencil_roots(pair), [1.0, 1.0, 1.0], atol=1e-12)


def test_pencil_roots_double_pair():
    rng = np.random.default_rng(6)
    G = rng.standard_normal((4, 4))
    B = G.T @ G + 0.5 * np.eye(4)
    pair = SymmetricMatrixPair(2.0 * B, B)
    np.testing.assert_allclose(pencil_roots(pair), np.full(4, 2.0), atol=1e-10)


def test_pencil_roots_localized_above_one():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        pair = random_ordered_pair(n, rng)
        if np.linalg.eigvalsh(pair.B)[0] <= 1e-6:
            continue
        assert pencil_roots(pair)[0] >= 1.0 - 1e-9


def test_pencil_roots_singular_b_instructs_shift():
    pair = SymmetricMatrixPair(np.eye(2), np.zeros((2, 2)))
    with pytest.raises(HypothesisError, match="shift"):
        pencil_roots(pair)


def test_chain_identity_equality_case():
    rep = minor_chain_check(SymmetricMatrixPair(np.eye(3), np.eye(3)))
    assert rep.min_slack == pytest.approx(0.0, abs=1e-12)
    assert rep.passed


def test_chain_hand_case():
    rep = minor_chain_check(SymmetricMatrixPair(np.diag([2.0, 2.0]), np.eye(2)))
    # S_1/2 = 2, S_2/1 = 1, slack 1
    assert rep.min_slack == pytest.approx(1.0, abs=1e-12)


def test_chain_campaign_small():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        rep = minor_chain_check(random_ordered_pair(n, rng))
        assert rep.passed
        if rep.vieta_checked:
            assert rep.vieta_residual <= 1e-8


def test_chain_rejects_bad_hypotheses():
    with pytest.raises(HypothesisError, match="A - B"):
        minor_chain_check(SymmetricMatrixPair(np.eye(3), 2 * np.eye(3)))
    with pytest.raises(HypothesisError, match="B is not"):
        minor_chain_check(SymmetricMatrixPair(np.eye(3), -np.eye(3)))


def test_eps_shift_consistency():
    rng = np.random.default_rng(9)
    G = rng.standard_normal((4, 4))
    B = G.T @ G
    H = rng.standard_normal((4, 4))
    pair = SymmetricMatrixPair(B + H.T @ H, B)
    base = np.array(minor_sums(pair).s)
    prev = None
    for eps in (1e-2, 1e-4, 1e-6):
        shifted = np.array(minor_sums(pair.shifted(eps)).s)
        err = np.max(np.abs(shifted - base)) / max(1.0, np.max(np.abs(base)))
        if prev is not None:
            assert err < prev
        prev = err
    assert prev < 1e-4


def test_symmetry_validated():
    M = np.eye(3)
    N = M.copy()
    N[0, 1] = 0.5
    with pytest.raises(ValueError, match="symmetric"):
        SymmetricMatrixPair(M, N)


def test_size_limits():
    with pytest.raises(ValueError):
        SymmetricMatrixPair(np.eye(1), np.eye(1))
    with pytest.raises(ValueError):
        SymmetricMatrixPair(np.eye(9), np.eye(9))
