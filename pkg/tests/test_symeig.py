import numpy as np

from quasicone.symeig import eigmin3, eigvals3


def test_matches_lapack_random():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5000, 3, 3))
    A = (A + A.transpose(0, 2, 1)) / 2
    np.testing.assert_allclose(eigvals3(A), np.linalg.eigvalsh(A),
                               atol=1e-12, rtol=1e-10)


def test_degenerate_fallback():
    D = np.array([
        np.eye(3),
        np.diag([1.0, 1.0, 2.0]),
        np.diag([0.0, 1e-15, 1.0]),
        np.zeros((3, 3)),
        np.diag([5.0, 5.0, 5.0]),
    ])
    lam = eigvals3(D)
    np.testing.assert_allclose(lam[0], [1, 1, 1], atol=1e-15)
    np.testing.assert_allclose(lam[2], [0, 1e-15, 1], atol=1e-14)
    np.testing.assert_allclose(lam[3], [0, 0, 0], atol=0)


def test_eigmin_eigenvector_residual():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((2000, 3, 3))
    A = (A + A.transpose(0, 2, 1)) / 2
    lam, v = eigmin3(A)
    res = np.linalg.norm(np.einsum("nij,nj->ni", A, v) - lam[:, None] * v,
                         axis=1)
    assert np.max(res) < 1e-12 * (1 + np.max(np.abs(A)))
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)


def test_eigmin_single_matrix():
    lam, v = eigmin3(np.diag([3.0, -1.0, 2.0]))
    assert abs(lam - (-1.0)) < 1e-14
    np.testing.assert_allclose(np.abs(v), [0, 1, 0], atol=1e-13)


def test_scaling_homogeneity():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((500, 3, 3))
    A = (A + A.transpose(0, 2, 1)) / 2
    np.testing.assert_allclose(eigvals3(2.0 * A), 2.0 * eigvals3(A),
                               rtol=1e-12, atol=1e-13)
