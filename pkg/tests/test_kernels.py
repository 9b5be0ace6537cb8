"""Backend parity: the compiled kernels and the numpy fallback must be
draw-for-draw identical given identical uniforms."""

import numpy as np
import pytest

from sublinsolve import kernels
from sublinsolve.kernels import pytree

ctree = pytest.importorskip("sublinsolve.kernels._ctree")


def _make_tree(rng, n):
    cap = 1 << max(0, (n - 1).bit_length())
    tree = np.zeros(2 * cap, dtype=np.float64)
    tree[cap : cap + n] = rng.random(n) + 0.01
    pytree.rebuild(tree, cap)
    return tree, cap


def test_active_backend_is_compiled():
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("n", [1, 2, 3, 17, 256, 1000])
def test_sample_many_parity(rng, n):
    tree, cap = _make_tree(rng, n)
    us = rng.random(5000)
    out_py = np.empty(us.size, dtype=np.int64)
    out_cy = np.empty(us.size, dtype=np.int64)
    pytree.sample_many(tree, cap, us, out_py)
    ctree.sample_many(tree, cap, us, out_cy)
    np.testing.assert_array_equal(out_py, out_cy)


def test_sample_one_parity(rng):
    tree, cap = _make_tree(rng, 37)
    for u in rng.random(200):
        assert pytree.sample_one(tree, cap, u) == ctree.sample_one(tree, cap, u)


def test_sample_rows_many_parity(rng):
    m, n = 6, 40
    cap = 64
    trees = np.zeros((m, 2 * cap), dtype=np.float64)
    trees[:, cap : cap + n] = rng.random((m, n)) + 0.01
    pytree.rebuild(trees, cap)
    rows = rng.integers(0, m, size=3000)
    us = rng.random(3000)
    out_py = np.empty(3000, dtype=np.int64)
    out_cy = np.empty(3000, dtype=np.int64)
    pytree.sample_rows_many(trees, cap, np.ascontiguousarray(rows), us, out_py)
    ctree.sample_rows_many(trees, cap, np.ascontiguousarray(rows), us, out_cy)
    np.testing.assert_array_equal(out_py, out_cy)


def test_update_and_rebuild_parity(rng):
    tree_a, cap = _make_tree(rng, 33)
    tree_b = tree_a.copy()
    for _ in range(200):
        i = int(rng.integers(33))
        w = float(rng.random())
        va = pytree.update(tree_a, cap, i, w)
        vb = ctree.update(tree_b, cap, i, w)
        assert va == vb
    np.testing.assert_array_equal(tree_a, tree_b)

    fresh = tree_a.copy()
    ctree.rebuild(fresh, cap)
    reference = tree_a.copy()
    pytree.rebuild(reference, cap)
    np.testing.assert_array_equal(fresh, reference)
