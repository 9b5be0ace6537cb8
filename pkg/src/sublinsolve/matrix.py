"""Two-level length-squared sampling structure for complex matrices.

Row selection is proportional to squared row norms (a sum-tree over the
row norms, whose root is the squared Frobenius norm); within-row selection
reuses the per-row sum-trees.  Composing the two stages picks entry (i, j)
with probability |A(i,j)|^2 / ||A||_F^2.

An optional transpose structure mirrors the same access for columns.
Every public query increments the attached ledger.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DuplicateEntry, ZeroNormSample
from .ledger import QueryLedger
from .vector import SampledVector, _next_pow2


class SampledMatrix:
    """Sampling, entry, and norm access to an m-by-n complex matrix.

    Build with `from_dense` or `from_entries`.  Concurrent reads and
    sampling are safe after construction; writes require exclusive access.
    """

    __slots__ = (
        "m",
        "n",
        "_values",
        "_cap_n",
        "_trees",
        "row_norm_tree",
        "ledger",
        "_cap_m",
        "_t_trees",
        "col_norm_tree",
    )

    def __init__(self, dense: np.ndarray, with_transpose: bool = False,
                 ledger: QueryLedger | None = None) -> None:
        dense = np.asarray(dense, dtype=np.complex128)
        if dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        self.m, self.n = int(dense.shape[0]), int(dense.shape[1])
        self.ledger = ledger if ledger is not None else QueryLedger()
        self._values = np.array(dense, dtype=np.complex128, copy=True, order="C")
        self._cap_n = _next_pow2(self.n)
        self._trees = np.zeros((self.m, 2 * self._cap_n), dtype=np.float64)
        self._trees[:, self._cap_n : self._cap_n + self.n] = (
            self._values.real**2 + self._values.imag**2
        )
        kernels.rebuild_batch(self._trees, self._cap_n)
        self.row_norm_tree = SampledVector(np.sqrt(self._trees[:, 1]))
        self._cap_m = _next_pow2(self.m)
        self._t_trees = None
        self.col_norm_tree = None
        if with_transpose:
            self._build_transpose()

    def _build_transpose(self) -> None:
        self._t_trees = np.zeros((self.n, 2 * self._cap_m), dtype=np.float64)
        self._t_trees[:, self._cap_m : self._cap_m + self.m] = (
            self._values.real**2 + self._values.imag**2
        ).T
        kernels.rebuild_batch(self._t_trees, self._cap_m)
        self.col_norm_tree = SampledVector(np.sqrt(self._t_trees[:, 1]))

    @classmethod
    def from_dense(cls, dense, with_transpose: bool = False,
                   ledger: QueryLedger | None = None) -> "SampledMatrix":
        return cls(np.asarray(dense), with_transpose=with_transpose, ledger=ledger)

    @classmethod
    def from_entries(cls, entries, dims: tuple[int, int], with_transpose: bool = False,
                     ledger: QueryLedger | None = None) -> "SampledMatrix":
        """Build from (i, j, value) triples; duplicate (i, j) is an error."""
        m, n = int(dims[0]), int(dims[1])
        if m <= 0 or n <= 0:
            raise ValueError("matrix dimensions must be positive")
        dense = np.zeros((m, n), dtype=np.complex128)
        seen: set[tuple[int, int]] = set()
        for i, j, v in entries:
            i, j = int(i), int(j)
            if not (0 <= i < m and 0 <= j < n):
                raise IndexError(f"entry ({i}, {j}) out of range for {m}x{n}")
            if (i, j) in seen:
                raise DuplicateEntry(f"entry ({i}, {j}) listed twice")
            seen.add((i, j))
            dense[i, j] = complex(v)
        return cls(dense, with_transpose=with_transpose, ledger=ledger)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def has_transpose(self) -> bool:
        return self._t_trees is not None

    def _check(self, i: int, hi: int, what: str) -> int:
        i = int(i)
        if not 0 <= i < hi:
            raise IndexError(f"{what} {i} out of range (0..{hi - 1})")
        return i

    # entry and norm access

    def entry(self, i: int, j: int) -> complex:
        i = self._check(i, self.m, "row")
        j = self._check(j, self.n, "column")
        self.ledger.add_entries(1)
        return complex(self._values[i, j])

    def entries_at(self, ii, jj) -> np.ndarray:
        """Entries at paired index arrays (ii[t], jj[t])."""
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        self.ledger.add_entries(int(ii.size))
        return self._values[ii, jj]

    def entry_block(self, rows, cols) -> np.ndarray:
        """Dense block at the index cross product (len(rows), len(cols))."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        self.ledger.add_entries(int(rows.size) * int(cols.size))
        return self._values[np.ix_(rows, cols)]

    def row_norm(self, i: int) -> float:
        i = self._check(i, self.m, "row")
        self.ledger.add_norms(1)
        return float(np.sqrt(self._trees[i, 1]))

    def row_norms_at(self, ii) -> np.ndarray:
        ii = np.asarray(ii, dtype=np.int64)
        self.ledger.add_norms(int(ii.size))
        return np.sqrt(self._trees[ii, 1])

    def frobenius_sq(self) -> float:
        self.ledger.add_norms(1)
        return float(self.row_norm_tree._tree[1])

    # sampling

    def sample_row(self, rng: np.random.Generator) -> int:
        """Row index i with probability ||A(i,.)||^2 / ||A||_F^2."""
        if self.row_norm_tree._tree[1] <= 0.0:
            raise ZeroNormSample("cannot sample rows of a zero matrix")
        idx, _ = kernels.sample_one(self.row_norm_tree._tree, self._cap_m, float(rng.random()))
        self.ledger.add_samples(1)
        return int(idx)

    def sample_rows(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.row_norm_tree._tree[1] <= 0.0:
            raise ZeroNormSample("cannot sample rows of a zero matrix")
        us = rng.random(size)
        out = np.empty(size, dtype=np.int64)
        kernels.sample_many(self.row_norm_tree._tree, self._cap_m, us, out)
        self.ledger.add_samples(int(size))
        return out

    def sample_in_row(self, i: int, rng: np.random.Generator) -> int:
        """Column index j with probability |A(i,j)|^2 / ||A(i,.)||^2."""
        i = self._check(i, self.m, "row")
        if self._trees[i, 1] <= 0.0:
            raise ZeroNormSample(f"row {i} has zero norm")
        idx, _ = kernels.sample_one(self._trees[i], self._cap_n, float(rng.random()))
        self.ledger.add_samples(1)
        return int(idx)

    def sample_in_rows(self, rows, rng: np.random.Generator) -> np.ndarray:
        """Batched within-row draws, one per entry of `rows`."""
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        if rows.size and np.any(self._trees[rows, 1] <= 0.0):
            raise ZeroNormSample("requested draw from a zero row")
        us = rng.random(rows.size)
        out = np.empty(rows.size, dtype=np.int64)
        kernels.sample_rows_many(self._trees, self._cap_n, rows, us, out)
        self.ledger.add_samples(int(rows.size))
        return out

    # transpose-side access (requires with_transpose=True)

    def _require_transpose(self) -> None:
        if self._t_trees is None:
            raise ValueError("matrix was built without with_transpose=True")

    def col_norm(self, j: int) -> float:
        self._require_transpose()
        j = self._check(j, self.n, "column")
        self.ledger.add_norms(1)
        return float(np.sqrt(self._t_trees[j, 1]))

    def sample_col(self, rng: np.random.Generator) -> int:
        self._require_transpose()
        if self.col_norm_tree._tree[1] <= 0.0:
            raise ZeroNormSample("cannot sample columns of a zero matrix")
        idx, _ = kernels.sample_one(self.col_norm_tree._tree, self.col_norm_tree.cap, float(rng.random()))
        self.ledger.add_samples(1)
        return int(idx)

    def sample_in_col(self, j: int, rng: np.random.Generator) -> int:
        self._require_transpose()
        j = self._check(j, self.n, "column")
        if self._t_trees[j, 1] <= 0.0:
            raise ZeroNormSample(f"column {j} has zero norm")
        idx, _ = kernels.sample_one(self._t_trees[j], self._cap_m, float(rng.random()))
        self.ledger.add_samples(1)
        return int(idx)

    # mutation

    def write(self, i: int, j: int, value: complex) -> None:
        """Set A(i, j); refreshes row, row-norm, and transpose trees."""
        i = self._check(i, self.m, "row")
        j = self._check(j, self.n, "column")
        value = complex(value)
        self._values[i, j] = value
        kernels.update(self._trees[i], self._cap_n, j, value.real**2 + value.imag**2)
        self.row_norm_tree.write(i, float(np.sqrt(self._trees[i, 1])))
        if self._t_trees is not None:
            kernels.update(self._t_trees[j], self._cap_m, i, value.real**2 + value.imag**2)
            self.col_norm_tree.write(j, float(np.sqrt(self._t_trees[j, 1])))
        self.ledger.add_entries(1)

    def rebuild(self) -> None:
        """Recompute every tree bottom-up from the stored entries."""
        self._trees[:, self._cap_n : self._cap_n + self.n] = (
            self._values.real**2 + self._values.imag**2
        )
        self._trees[:, self._cap_n + self.n :] = 0.0
        kernels.rebuild_batch(self._trees, self._cap_n)
        self.row_norm_tree = SampledVector(np.sqrt(self._trees[:, 1]))
        if self._t_trees is not None:
            self._build_transpose()

    def _block_uncounted(self, rows, cols) -> np.ndarray:
        # raw fetch for samplers that account their semantic query cost
        # (entries per trial) themselves
        return self._values[np.ix_(np.asarray(rows, dtype=np.int64),
                                    np.asarray(cols, dtype=np.int64))]

    # oracle-side escape hatches (not ledger-counted)

    def to_dense(self) -> np.ndarray:
        """Dense copy of all entries for oracle comparisons."""
        return self._values.copy()

    def row_values(self, i: int) -> np.ndarray:
        return self._values[int(i)].copy()
