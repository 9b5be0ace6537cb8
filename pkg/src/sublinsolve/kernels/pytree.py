"""Pure-numpy sum-tree kernels (fallback backend).

A tree over `cap` leaves (cap a power of two) is a flat float64 array of
length 2*cap: node 1 is the root, node t has children 2t and 2t+1, and
leaf i lives at cap+i.  Slot 0 is unused.  Leaves hold non-negative
weights; every internal node holds the sum of its children.

Descent rule: go right iff the residual target is at least the left
child's sum *and* the right child is positive; with both children zero
(possible only through rounding) descend left.  Batch variants replay the
identical arithmetic elementwise, so both backends produce identical
samples from identical uniforms.
"""

from __future__ import annotations

import numpy as np


def rebuild(tree: np.ndarray, cap: int) -> None:
    """Recompute all internal sums from the leaves, bottom-up.

    Accepts a (2*cap,) array or an (m, 2*cap) batch of trees.
    """
    lo = cap
    while lo > 1:
        half = lo >> 1
        tree[..., half:lo] = tree[..., lo : 2 * lo : 2] + tree[..., lo + 1 : 2 * lo : 2]
        lo = half


def update(tree: np.ndarray, cap: int, i: int, weight: float) -> int:
    """Set leaf i's weight and refresh ancestor sums. Returns nodes touched."""
    t = cap + i
    tree[t] = weight
    visits = 1
    t >>= 1
    while t >= 1:
        tree[t] = tree[2 * t] + tree[2 * t + 1]
        visits += 1
        t >>= 1
    return visits


def sample_one(tree: np.ndarray, cap: int, u: float) -> tuple[int, int]:
    """Descend once with uniform u in [0, 1). Returns (leaf index, nodes visited)."""
    target = u * tree[1]
    t = 1
    visits = 1
    while t < cap:
        left = tree[2 * t]
        right = tree[2 * t + 1]
        visits += 2
        if target >= left and right > 0.0:
            target -= left
            t = 2 * t + 1
        else:
            t = 2 * t
    return t - cap, visits


def sample_many(tree: np.ndarray, cap: int, us: np.ndarray, out: np.ndarray) -> None:
    """Vectorized descent: one uniform per requested sample."""
    if cap == 1:
        out[...] = 0
        return
    idx = np.ones(us.shape[0], dtype=np.int64)
    target = us * tree[1]
    level = 1
    while level < cap:
        left = tree[2 * idx]
        go_right = (target >= left) & (tree[2 * idx + 1] > 0.0)
        target = target - np.where(go_right, left, 0.0)
        idx = (idx << 1) + go_right
        level <<= 1
    np.subtract(idx, cap, out=out)


def sample_rows_many(
    trees: np.ndarray, cap: int, rows: np.ndarray, us: np.ndarray, out: np.ndarray
) -> None:
    """Vectorized descent across a batch of trees, one tree choice per draw.

    `trees` is (m, 2*cap); `rows[t]` selects the tree for draw t.
    """
    if cap == 1:
        out[...] = 0
        return
    idx = np.ones(us.shape[0], dtype=np.int64)
    target = us * trees[rows, 1]
    level = 1
    while level < cap:
        left = trees[rows, 2 * idx]
        go_right = (target >= left) & (trees[rows, 2 * idx + 1] > 0.0)
        target = target - np.where(go_right, left, 0.0)
        idx = (idx << 1) + go_right
        level <<= 1
    np.subtract(idx, cap, out=out)
