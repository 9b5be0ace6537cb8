"""Complex vector with O(log n) length-squared index sampling.

A `SampledVector` keeps the raw complex entries alongside a binary
sum-tree of squared magnitudes, giving exact draws from the distribution
D_v(i) = |v(i)|^2 / ||v||^2, O(log n) reads and writes, and an O(1) norm.

Layout: leaves are padded to the next power of two; padding leaves carry
zero weight and are unreachable by the descent.  Storage is dense per
entry; sparse leaf compression is out of scope at desk scale.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import EmptyVector, ZeroNormSample
from .ledger import QueryLedger


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


class SampledVector:
    """Binary sum-tree over a complex vector.

    Args:
        values: nonempty sequence of complex numbers.
        ledger: optional shared QueryLedger; a private one is created
            otherwise.

    Safe for concurrent reads and sampling once built; writes require
    exclusive access.
    """

    __slots__ = ("n", "cap", "_values", "_tree", "ledger")

    def __init__(self, values, ledger: QueryLedger | None = None) -> None:
        arr = np.asarray(values, dtype=np.complex128).ravel()
        if arr.size == 0:
            raise EmptyVector("cannot build a sampled vector from an empty sequence")
        self.n = int(arr.size)
        self.cap = _next_pow2(self.n)
        self._values = np.zeros(self.cap, dtype=np.complex128)
        self._values[: self.n] = arr
        self._tree = np.zeros(2 * self.cap, dtype=np.float64)
        self._tree[self.cap : self.cap + self.n] = arr.real**2 + arr.imag**2
        kernels.rebuild_batch(self._tree, self.cap)
        self.ledger = ledger if ledger is not None else QueryLedger()

    def __len__(self) -> int:
        return self.n

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} out of range for length {self.n}")
        return i

    def read(self, i: int) -> complex:
        """Exact stored value at index i."""
        i = self._check_index(i)
        self.ledger.add_entries(1)
        return complex(self._values[i])

    def read_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError("index out of range")
        self.ledger.add_entries(int(idx.size))
        return self._values[idx]

    def write(self, i: int, value: complex) -> None:
        """Set entry i and refresh the sums on the root path."""
        i = self._check_index(i)
        value = complex(value)
        self._values[i] = value
        kernels.update(self._tree, self.cap, i, value.real**2 + value.imag**2)
        self.ledger.add_entries(1)

    def write_counting(self, i: int, value: complex) -> int:
        """As `write`, returning the number of tree nodes touched."""
        i = self._check_index(i)
        value = complex(value)
        self._values[i] = value
        visits = kernels.update(self._tree, self.cap, i, value.real**2 + value.imag**2)
        self.ledger.add_entries(1)
        return visits

    def norm_sq(self) -> float:
        """||v||^2 from the root node."""
        self.ledger.add_norms(1)
        return float(self._tree[1])

    def norm(self) -> float:
        self.ledger.add_norms(1)
        return float(np.sqrt(self._tree[1]))

    def sample(self, rng: np.random.Generator) -> int:
        """One index drawn exactly from D_v."""
        if self._tree[1] <= 0.0:
            raise ZeroNormSample("cannot sample from a zero vector")
        idx, _ = kernels.sample_one(self._tree, self.cap, float(rng.random()))
        self.ledger.add_samples(1)
        return int(idx)

    def sample_with_visits(self, rng: np.random.Generator) -> tuple[int, int]:
        """As `sample`, returning (index, tree nodes visited)."""
        if self._tree[1] <= 0.0:
            raise ZeroNormSample("cannot sample from a zero vector")
        idx, visits = kernels.sample_one(self._tree, self.cap, float(rng.random()))
        self.ledger.add_samples(1)
        return int(idx), int(visits)

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """`size` i.i.d. draws from D_v."""
        if self._tree[1] <= 0.0:
            raise ZeroNormSample("cannot sample from a zero vector")
        us = rng.random(size)
        out = np.empty(size, dtype=np.int64)
        kernels.sample_many(self._tree, self.cap, us, out)
        self.ledger.add_samples(int(size))
        return out

    def rebuild(self) -> None:
        """Recompute all internal sums bottom-up (clears write drift)."""
        vals = self._values[: self.n]
        self._tree[self.cap : self.cap + self.n] = vals.real**2 + vals.imag**2
        self._tree[self.cap + self.n :] = 0.0
        kernels.rebuild_batch(self._tree, self.cap)

    def to_array(self) -> np.ndarray:
        """Dense copy of the entries (oracle/test use; not ledger-counted)."""
        return self._values[: self.n].copy()
