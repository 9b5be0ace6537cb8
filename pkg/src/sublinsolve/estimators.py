"""Sampling-based estimators over length-squared access.

Three families:

* inner products <x, y> from samples of x and queries of y;
* bilinear forms x' A y from samples of x and y plus entry queries of A,
  concentrated by median of means;
* rejection sampling of an index of M v for a thin matrix M whose columns
  are individually samplable.

Estimators draw through small access adapters so the same code serves raw
sampled vectors and implicitly-represented vectors (e.g. columns of the
sketch basis).  All draws flow through explicit Generator handles; groups
use independent child streams, so results do not depend on evaluation
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EstimatorFailure,
    IterationCapExceeded,
    NonfiniteSample,
    ZeroNormSample,
)
from .ledger import QueryLedger
from .matrix import SampledMatrix
from .oracle import exact_distribution, exact_tv
from .vector import SampledVector

_GUARD_ROUNDS = 64


@dataclass(frozen=True)
class EstimatorParams:
    """Accuracy/confidence targets plus optional explicit batch sizes.

    `epsilon` is the additive error target (relative to ||x|| ||y|| for the
    inner-product estimator, absolute for the bilinear one).  When `groups`
    or `group_size` is None the median-of-means shape is derived: the group
    count from the failure probability, the group size from the a-priori
    variance bound.  `max_group_size` caps the derived size so that desk
    runs stay bounded; an explicit `group_size` wins over the cap.
    """

    epsilon: float
    delta: float
    groups: int | None = None
    group_size: int | None = None
    max_group_size: int | None = None

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")

    def resolved_groups(self) -> int:
        if self.groups is not None:
            return int(self.groups)
        return max(1, math.ceil(8.0 * math.log(1.0 / self.delta)))

    def _apply_cap(self, q: int) -> int:
        if self.max_group_size is not None:
            q = min(q, int(self.max_group_size))
        return max(1, q)

    def inner_group_size(self) -> int:
        if self.group_size is not None:
            return int(self.group_size)
        return self._apply_cap(math.ceil(4.0 / self.epsilon**2))

    def bilinear_group_size(self, x_norm: float, y_norm: float, a_fro: float) -> int:
        if self.group_size is not None:
            return int(self.group_size)
        q = math.ceil(4.0 * (x_norm * y_norm * a_fro / self.epsilon) ** 2)
        return self._apply_cap(q)


class VectorAccess:
    """Query/sample/norm bundle over a logical complex vector.

    Subclasses provide `norm`, `query`, and `sample`; the batch variants
    default to loops and should be overridden where a vectorized path
    exists.  The sample law must be the length-squared distribution of the
    queried vector.
    """

    def norm(self) -> float:
        raise NotImplementedError

    def query(self, i: int) -> complex:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def query_many(self, idx) -> np.ndarray:
        return np.array([self.query(int(i)) for i in np.asarray(idx).ravel()],
                        dtype=np.complex128)

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.array([self.sample(rng) for _ in range(size)], dtype=np.int64)

    def sample_many_with_values(
        self, rng: np.random.Generator, size: int
    ) -> tuple[np.ndarray, np.ndarray]:
        idx = self.sample_many(rng, size)
        return idx, self.query_many(idx)


class SampledVectorAccess(VectorAccess):
    """Access adapter over a SampledVector (ledger-counted)."""

    def __init__(self, vec: SampledVector) -> None:
        self.vec = vec

    def norm(self) -> float:
        return self.vec.norm()

    def query(self, i: int) -> complex:
        return self.vec.read(i)

    def query_many(self, idx) -> np.ndarray:
        return self.vec.read_many(np.asarray(idx, dtype=np.int64))

    def sample(self, rng: np.random.Generator) -> int:
        return self.vec.sample(rng)

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.vec.sample_many(rng, size)


class ArrayQueryAccess(VectorAccess):
    """Query-only access over a dense array (e.g. the PSD-path b vector).

    Sampling is unavailable.  Reads count into `ledger` when given.
    """

    def __init__(self, values, ledger: QueryLedger | None = None,
                 known_norm: float | None = None) -> None:
        self.values = np.asarray(values, dtype=np.complex128).ravel()
        self.ledger = ledger
        self._norm = known_norm

    def norm(self) -> float:
        if self._norm is None:
            raise ValueError("norm of a query-only vector is not available")
        return float(self._norm)

    def query(self, i: int) -> complex:
        if self.ledger is not None:
            self.ledger.add_entries(1)
        return complex(self.values[int(i)])

    def query_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if self.ledger is not None:
            self.ledger.add_entries(int(idx.size))
        return self.values[idx]

    def sample(self, rng: np.random.Generator) -> int:
        raise ZeroNormSample("query-only access cannot sample")


class MatrixEntryAccess:
    """Entry and Frobenius-norm access to a sampled matrix."""

    def __init__(self, matrix: SampledMatrix) -> None:
        self.matrix = matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.dims

    def entries_at(self, ii, jj) -> np.ndarray:
        return self.matrix.entries_at(ii, jj)

    def frobenius(self) -> float:
        return float(np.sqrt(self.matrix.frobenius_sq()))


class AdjointEntryAccess(MatrixEntryAccess):
    """Entry access to the conjugate transpose of a sampled matrix."""

    @property
    def shape(self) -> tuple[int, int]:
        m, n = self.matrix.dims
        return (n, m)

    def entries_at(self, ii, jj) -> np.ndarray:
        return np.conj(self.matrix.entries_at(jj, ii))


class DenseEntryAccess:
    """Entry access over a dense array (test oracle side)."""

    def __init__(self, dense, ledger: QueryLedger | None = None) -> None:
        self.dense = np.asarray(dense, dtype=np.complex128)
        self.ledger = ledger

    @property
    def shape(self) -> tuple[int, int]:
        return self.dense.shape

    def entries_at(self, ii, jj) -> np.ndarray:
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        if self.ledger is not None:
            self.ledger.add_entries(int(ii.size))
        return self.dense[ii, jj]

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.dense))


def _complex_median(values: np.ndarray) -> complex:
    return complex(float(np.median(values.real)), float(np.median(values.imag)))


def _resample_zeros(
    access: VectorAccess,
    rng: np.random.Generator,
    idx: np.ndarray,
    vals: np.ndarray,
    ledger: QueryLedger | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Redraw slots whose sampled value is exactly zero.

    A zero entry has sampling probability zero, so this only fires when
    rounding produced an inconsistent weight; each firing is recorded as a
    guard hit.
    """
    for _ in range(_GUARD_ROUNDS):
        bad = np.flatnonzero(vals == 0.0)
        if bad.size == 0:
            return idx, vals
        if ledger is not None:
            ledger.add_guard_hits(int(bad.size))
        new_idx, new_vals = access.sample_many_with_values(rng, bad.size)
        idx = idx.copy()
        vals = vals.copy()
        idx[bad] = new_idx
        vals[bad] = new_vals
    raise EstimatorFailure("sampled values remained zero after guard resampling")


def estimate_inner(
    x: VectorAccess,
    y: VectorAccess,
    params: EstimatorParams,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
) -> complex:
    """Estimate <x, y> = sum_i conj(x(i)) y(i).

    Needs samples and queries of x with known ||x||, and queries of y.
    Additive error epsilon * ||x|| ||y|| with probability >= 1 - delta.
    """
    groups = params.resolved_groups()
    q = params.inner_group_size()
    nx = x.norm()
    if nx <= 0.0:
        raise ZeroNormSample("cannot sample from a zero vector")
    scale = nx * nx
    means = np.empty(groups, dtype=np.complex128)
    for g, child in enumerate(rng.spawn(groups)):
        idx, vals = x.sample_many_with_values(child, q)
        idx, vals = _resample_zeros(x, child, idx, vals, ledger)
        z = scale * y.query_many(idx) / vals
        if not np.all(np.isfinite(z.real) & np.isfinite(z.imag)):
            raise NonfiniteSample("inner-product draw overflowed")
        means[g] = z.mean()
    return _complex_median(means)


def estimate_bilinear(
    x: VectorAccess,
    a,
    y: VectorAccess,
    params: EstimatorParams,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
) -> complex:
    """Estimate x' A y = sum_ij conj(x(i)) A(i,j) y(j).

    Needs samples of x and y with known norms and entry access to A with
    known ||A||_F.  Additive error epsilon with probability >= 1 - delta;
    the group size follows the variance bound ||x||^2 ||y||^2 ||A||_F^2.
    Medians of the group means are taken per real/imaginary component.
    """
    groups = params.resolved_groups()
    nx = x.norm()
    ny = y.norm()
    if nx <= 0.0 or ny <= 0.0:
        raise ZeroNormSample("cannot sample from a zero vector")
    q = params.bilinear_group_size(nx, ny, a.frobenius())
    scale = (nx * nx) * (ny * ny)
    means = np.empty(groups, dtype=np.complex128)
    for g, child in enumerate(rng.spawn(groups)):
        ix, xv = x.sample_many_with_values(child, q)
        ix, xv = _resample_zeros(x, child, ix, xv, ledger)
        iy, yv = y.sample_many_with_values(child, q)
        iy, yv = _resample_zeros(y, child, iy, yv, ledger)
        av = a.entries_at(ix, iy)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            z = scale * av / (xv * np.conj(yv))
        if not np.all(np.isfinite(z.real) & np.isfinite(z.imag)):
            raise NonfiniteSample("bilinear draw overflowed")
        means[g] = z.mean()
    return _complex_median(means)


class ThinMatrixAccess:
    """Column-wise access to a thin n-by-k matrix M for Mv sampling.

    Contract: `col_norms` returns the k column norms (possibly the caller's
    near-isometry approximation), `sample_in_cols` draws row indices from
    the length-squared law of the requested columns, and `row_block`
    fetches rows M(i, .) for the acceptance test.  `row_block` is a raw
    fetch; the rejection sampler accounts `row_cost` semantic entry queries
    per trial against `ledger`.
    """

    n_rows: int
    n_cols: int
    ledger: QueryLedger | None = None

    @property
    def row_cost(self) -> int:
        return self.n_cols

    def col_norms(self) -> np.ndarray:
        raise NotImplementedError

    def sample_in_cols(self, js: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def row_block(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DenseThinAccess(ThinMatrixAccess):
    """Exact thin-matrix access over a dense array (tests, generic use)."""

    def __init__(self, dense, ledger: QueryLedger | None = None) -> None:
        self.dense = np.asarray(dense, dtype=np.complex128)
        if self.dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        self.n_rows, self.n_cols = self.dense.shape
        self.ledger = ledger
        self._col_trees = [SampledVector(self.dense[:, j]) for j in range(self.n_cols)]

    def col_norms(self) -> np.ndarray:
        if self.ledger is not None:
            self.ledger.add_norms(self.n_cols)
        return np.linalg.norm(self.dense, axis=0)

    def sample_in_cols(self, js: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        js = np.asarray(js, dtype=np.int64)
        out = np.empty(js.size, dtype=np.int64)
        for j in np.unique(js):
            mask = js == j
            out[mask] = self._col_trees[j].sample_many(rng, int(mask.sum()))
        if self.ledger is not None:
            self.ledger.add_samples(int(js.size))
        return out

    def row_block(self, idx: np.ndarray) -> np.ndarray:
        return self.dense[np.asarray(idx, dtype=np.int64), :]


def default_rejection_cap(n_cols: int) -> int:
    # a-priori bound: expected trials <= k * C(M, v) with C <= k absent
    # cancellation knowledge
    return 100 * n_cols * max(1, n_cols)


def sample_thin_product_many(
    m: ThinMatrixAccess,
    v,
    rng: np.random.Generator,
    size: int,
    cap: int | None = None,
    return_values: bool = False,
):
    """Draw `size` i.i.d. indices from the length-squared law of M v.

    Rejection sampling: propose column j with probability proportional to
    |v(j)|^2 ||M(.,j)||^2, draw i from the column's law, accept with
    probability |(Mv)(i)|^2 / (k * sum_j |v(j) M(i,j)|^2).  Conditioned on
    acceptance the law of i is exactly the target, so accepted trials form
    an i.i.d. stream.  Acceptance quantities are cached per distinct row,
    which leaves the semantic query count (row_cost entries per trial)
    unchanged.

    Raises:
        IterationCapExceeded: if any single draw rejects `cap` times in a
            row (signals Mv ~ 0 or an undersized cap).
        ZeroNormSample: if all proposal weights vanish.
    """
    v = np.asarray(v, dtype=np.complex128).ravel()
    k = m.n_cols
    if v.size != k:
        raise ValueError(f"v has length {v.size}, expected {k}")
    norms = np.asarray(m.col_norms(), dtype=np.float64)
    weights = (np.abs(v) ** 2) * norms**2
    total = float(weights.sum())
    if total <= 0.0:
        raise ZeroNormSample("all proposal weights are zero")
    cdf = np.cumsum(weights)
    if cap is None:
        cap = default_rejection_cap(k)

    abs_v2 = np.abs(v) ** 2
    mv_cache = np.empty(m.n_rows, dtype=np.complex128)
    den_cache = np.empty(m.n_rows, dtype=np.float64)
    seen = np.zeros(m.n_rows, dtype=bool)

    out_idx = np.empty(size, dtype=np.int64)
    out_val = np.empty(size, dtype=np.complex128) if return_values else None
    collected = 0
    run = 0  # consecutive rejections carried across batches
    batch = 512
    while collected < size:
        jj = np.searchsorted(cdf, rng.random(batch) * total, side="right")
        np.clip(jj, 0, k - 1, out=jj)
        ss = m.sample_in_cols(jj, rng)
        fresh = np.unique(ss[~seen[ss]])
        if fresh.size:
            rows = m.row_block(fresh)
            mv_cache[fresh] = rows @ v
            den_cache[fresh] = (np.abs(rows) ** 2) @ abs_v2
            seen[fresh] = True
        if m.ledger is not None:
            m.ledger.add_entries(batch * m.row_cost)
        mv = mv_cache[ss]
        den = den_cache[ss]
        with np.errstate(divide="ignore", invalid="ignore"):
            acc = np.abs(mv) ** 2 / (k * den)
        acc[den <= 0.0] = 0.0
        ok = rng.random(batch) < acc
        pos = np.flatnonzero(ok)
        if pos.size == 0:
            run += batch
            if run > cap:
                raise IterationCapExceeded(
                    f"no acceptance within {run} trials (cap {cap})"
                )
            continue
        gaps = np.diff(pos) - 1
        worst = max(run + int(pos[0]), int(gaps.max()) if gaps.size else 0)
        if worst > cap:
            raise IterationCapExceeded(f"a draw rejected {worst} times (cap {cap})")
        run = batch - 1 - int(pos[-1])
        take = min(pos.size, size - collected)
        out_idx[collected : collected + take] = ss[pos[:take]]
        if return_values:
            out_val[collected : collected + take] = mv[pos[:take]]
        collected += take
        # size the next batch from the observed acceptance rate
        rate = max(pos.size / batch, 1e-3)
        batch = int(min(65536, max(512, 1.5 * (size - collected) / rate)))
    if return_values:
        return out_idx, out_val
    return out_idx


def sample_thin_product(
    m: ThinMatrixAccess, v, rng: np.random.Generator, cap: int | None = None
) -> int:
    """One exact draw from the length-squared law of M v."""
    return int(sample_thin_product_many(m, v, rng, 1, cap=cap)[0])


def isometry_rejection_cap(n_cols: int, alpha: float) -> int:
    shrink = 1.0 - min(max(alpha, 0.0), 0.5)
    return math.ceil(100 * n_cols / shrink**2)


def sample_thin_product_isometry(
    m: ThinMatrixAccess,
    v,
    rng: np.random.Generator,
    alpha: float,
    size: int | None = None,
):
    """Mv sampling for M within Frobenius distance alpha of an isometry.

    The draw law is within O(alpha) total variation of the target when the
    access reports approximate column norms; with exact norms it coincides
    with `sample_thin_product`.  The trial cap uses the near-isometry to
    bound the rejection constant.
    """
    cap = isometry_rejection_cap(m.n_cols, alpha)
    if size is None:
        return sample_thin_product(m, v, rng, cap=cap)
    return sample_thin_product_many(m, v, rng, size, cap=cap)


def tv_distance_bound_check(x, y) -> float:
    """Exact total variation distance between D_x and D_y (test utility)."""
    return exact_tv(exact_distribution(x), exact_distribution(y))
