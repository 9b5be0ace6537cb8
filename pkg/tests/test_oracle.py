import numpy as np
import pytest

from sublinsolve import DimensionTooLarge, NotPSD, ZeroNormSample, oracle
from conftest import random_complex, random_psd


def test_pinv_solve_examples():
    np.testing.assert_allclose(
        oracle.pinv_solve(np.eye(2), [1, 2]), [1, 2], atol=1e-14
    )
    np.testing.assert_allclose(
        oracle.pinv_solve([[1, 0], [0, 0]], [5, 7]), [5, 0], atol=1e-14
    )
    np.testing.assert_allclose(
        oracle.pinv_solve(np.diag([2.0, 4.0]), [2, 4]), [1, 1], atol=1e-14
    )


def test_pinv_solve_zero_matrix():
    np.testing.assert_array_equal(oracle.pinv_solve(np.zeros((3, 2)), [1, 2, 3]),
                                  np.zeros(2))


def test_moore_penrose_identities(rng):
    for _ in range(20):
        m, n = int(rng.integers(2, 12)), int(rng.integers(2, 12))
        k = int(rng.integers(1, min(m, n) + 1))
        a = random_complex(rng, m, k) @ random_complex(rng, k, n)
        ap = oracle.pinv(a)
        scale = np.linalg.norm(a)
        assert np.linalg.norm(a @ ap @ a - a) <= 1e-8 * scale
        assert np.linalg.norm(ap @ a @ ap - ap) <= 1e-8 * np.linalg.norm(ap)


def test_exact_distribution_examples():
    np.testing.assert_allclose(oracle.exact_distribution([3, 4]), [9 / 25, 16 / 25])
    with pytest.raises(ZeroNormSample):
        oracle.exact_distribution([0, 0])


def test_exact_tv_examples():
    p = np.array([0.25, 0.75])
    assert oracle.exact_tv(p, p) == 0.0
    assert oracle.exact_tv([1, 0], [0, 1]) == 1.0


def test_exact_tv_metric_properties(rng):
    for _ in range(50):
        n = int(rng.integers(2, 20))
        p = oracle.exact_distribution(random_complex(rng, n))
        q = oracle.exact_distribution(random_complex(rng, n))
        r = oracle.exact_distribution(random_complex(rng, n))
        assert oracle.exact_tv(p, q) == pytest.approx(oracle.exact_tv(q, p), abs=1e-15)
        assert oracle.exact_tv(p, p) <= 1e-15
        assert oracle.exact_tv(p, q) <= (
            oracle.exact_tv(p, r) + oracle.exact_tv(r, q) + 1e-12
        )


def test_check_sqrt_lemma_examples(rng):
    x = random_psd(rng, 6, 3)
    assert oracle.check_sqrt_lemma(x, x)
    assert oracle.check_sqrt_lemma(np.eye(2), 2 * np.eye(2))
    for _ in range(50):
        n = int(rng.integers(2, 20))
        kx, ky = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        assert oracle.check_sqrt_lemma(random_psd(rng, n, kx), random_psd(rng, n, ky))


def test_check_inv_lemma_examples(rng):
    x = random_psd(rng, 5, 2)
    assert oracle.check_inv_lemma(x, x)
    assert oracle.check_inv_lemma(np.eye(2), 2 * np.eye(2))
    for _ in range(50):
        n = int(rng.integers(2, 20))
        kx, ky = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        assert oracle.check_inv_lemma(random_psd(rng, n, kx), random_psd(rng, n, ky))


def test_not_psd_rejected(rng):
    indefinite = np.diag([1.0, -1.0])
    with pytest.raises(NotPSD):
        oracle.check_sqrt_lemma(indefinite, np.eye(2))
    non_hermitian = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotPSD):
        oracle.assert_psd(non_hermitian)


def test_dense_cap():
    with pytest.raises(DimensionTooLarge):
        oracle.pinv_solve(np.zeros((2, oracle.DENSE_CAP + 1)),
                          np.zeros(2))
