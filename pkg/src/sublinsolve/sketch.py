"""Row/column subsampling into a succinct sketch description.

The subsample draws p rows of A by squared row norm (forming the
implicitly-scaled submatrix S), then p columns of S by the averaged
within-row law (forming the p-by-p core W), and keeps only W's top-k
singular values and left singular vectors together with the sampled
indices and scales.  Everything downstream -- the near-orthonormal basis
V(., i) = S' u_i / sigma_i, the squared and inverse-squared reconstructions
V D^2 V' and V D^-2 V' -- is accessed through this description without ever
materializing an n-sized object.

`verify_sketch` is the desk-scale escape hatch: it materializes S, W and V
densely and reports the full approximation panel.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import DimensionTooLarge, RankDeficientSketch, ZeroNormSample
from .estimators import (
    ThinMatrixAccess,
    VectorAccess,
    sample_thin_product,
    sample_thin_product_many,
)
from .matrix import SampledMatrix


def matrix_digest(a: SampledMatrix) -> str:
    """Provenance fingerprint: dims, Frobenius norm, and row norms."""
    h = hashlib.blake2b(digest_size=16)
    h.update(np.asarray(a.dims, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(np.sqrt(a._trees[:, 1])).tobytes())
    return h.hexdigest()


@dataclass
class SuccinctDescription:
    """Output of the subsampling pass.

    Holds the sampled row/column indices, the normalization scales
    1/sqrt(p * P), and the top-k singular pairs of the core matrix W.  The
    basis column V(., i) equals S' u_hat_i / sigma_hat_i and is reachable
    through `v_entry` / `v_column_access` with O(p) work per element.
    """

    row_indices: np.ndarray
    row_scales: np.ndarray
    col_indices: np.ndarray
    col_scales: np.ndarray
    sigma_hat: np.ndarray
    u_hat: np.ndarray
    k: int
    p: int
    seed: int | None = None
    source_digest: str = ""

    def validate(self) -> None:
        gram = self.u_hat.conj().T @ self.u_hat
        dev = float(np.abs(gram - np.eye(self.k)).max())
        if dev > 1e-10:
            raise ValueError(f"u_hat not orthonormal: max Gram deviation {dev:.2e}")
        if np.any(self.sigma_hat <= 0.0):
            raise ValueError("sigma_hat must be strictly positive")
        if np.any(np.diff(self.sigma_hat) > 0.0):
            raise ValueError("sigma_hat must be non-increasing")

    def check_scales(self, a: SampledMatrix, rtol: float = 1e-12) -> bool:
        """Row scales match 1/sqrt(p * P_i) recomputed from the matrix."""
        fro = a.frobenius_sq()
        norms = a.row_norms_at(self.row_indices)
        expect = 1.0 / np.sqrt(self.p * (norms**2 / fro))
        return bool(np.allclose(self.row_scales, expect, rtol=rtol, atol=0.0))

    def to_json_dict(self) -> dict:
        return {
            "format": "sketch/v1",
            "k": self.k,
            "p": self.p,
            "seed": self.seed,
            "source_digest": self.source_digest,
            "row_indices": [int(i) for i in self.row_indices],
            "row_scales": [float(s) for s in self.row_scales],
            "col_indices": [int(i) for i in self.col_indices],
            "col_scales": [float(s) for s in self.col_scales],
            "sigma_hat": [float(s) for s in self.sigma_hat],
            "u_hat": [[float(z.real), float(z.imag)] for z in self.u_hat.ravel()],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SuccinctDescription":
        if data.get("format") != "sketch/v1":
            raise ValueError(f"unsupported sketch format {data.get('format')!r}")
        k = int(data["k"])
        p = int(data["p"])
        u_flat = np.array(
            [complex(re, im) for re, im in data["u_hat"]], dtype=np.complex128
        )
        return cls(
            row_indices=np.array(data["row_indices"], dtype=np.int64),
            row_scales=np.array(data["row_scales"], dtype=np.float64),
            col_indices=np.array(data["col_indices"], dtype=np.int64),
            col_scales=np.array(data["col_scales"], dtype=np.float64),
            sigma_hat=np.array(data["sigma_hat"], dtype=np.float64),
            u_hat=u_flat.reshape(p, k),
            k=k,
            p=p,
            seed=data.get("seed"),
            source_digest=data.get("source_digest", ""),
        )


def paper_sketch_size(k: int, kappa: float, epsilon: float, fro_norm: float) -> float:
    """The literal worst-case sketch size, exposed for display only.

    Infeasible at desk scale; the default heuristic is
    `suggest_sketch_size`.
    """
    return 1e7 * k**11 * kappa**20 / (epsilon**4 * fro_norm**4)


def suggest_sketch_size(k: int, m: int, n: int) -> int:
    """Heuristic default sketch size for desk-scale runs."""
    return max(20 * k, k * int(np.ceil(np.log(max(2, m * n)))))


def sample_rows(a: SampledMatrix, p: int, rng: np.random.Generator):
    """Draw p row indices by squared row norm; return (indices, scales).

    The scale for sampled row i is 1/sqrt(p * P_i) with
    P_i = ||A(i,.)||^2 / ||A||_F^2, so the implicit submatrix
    S(t,.) = A(i_t,.) * scale_t satisfies E[S'S] = A'A.
    """
    fro = a.frobenius_sq()
    if fro <= 0.0:
        raise ZeroNormSample("cannot sketch a zero matrix")
    idx = a.sample_rows(rng, p)
    norms = a.row_norms_at(idx)
    probs = norms**2 / fro
    return idx, 1.0 / np.sqrt(p * probs)


def _phase_normalize(u: np.ndarray) -> np.ndarray:
    # largest-magnitude component made real positive, for reproducibility
    out = u.copy()
    for i in range(out.shape[1]):
        t = int(np.argmax(np.abs(out[:, i])))
        z = out[t, i]
        mag = abs(z)
        if mag > 0.0:
            out[:, i] *= np.conj(z) / mag
    return out


def subsample(
    a: SampledMatrix,
    k: int,
    p: int,
    rng: np.random.Generator,
    col_rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> SuccinctDescription:
    """Run the two-stage subsampling pass and factor the core matrix.

    Rows are drawn i.i.d. by squared row norm.  Column index j is drawn by
    picking one of the p sampled rows uniformly and sampling within it, so
    its marginal is P'_j, the average of the sampled rows' within-row laws;
    P'_j is then evaluated exactly by an O(p) sum of entry queries (cached
    per distinct j) to form the column scales.  Duplicate indices are kept
    as-is: the guarantees assume i.i.d. draws.

    Raises:
        RankDeficientSketch: if the k-th singular value of W falls below
            max(p, k) * eps * sigma_1 (pick a smaller k, or probe the
            spectrum with `rank_probe`).
    """
    if k < 1:
        raise ValueError("rank k must be at least 1")
    if p < k:
        raise ValueError(f"sketch size p={p} must be at least k={k}")
    if col_rng is None:
        col_rng = rng
    row_idx, row_scales = sample_rows(a, p, rng)
    row_norms_sq = (a.row_norms_at(row_idx)) ** 2

    t_choice = col_rng.integers(0, p, size=p)
    col_idx = a.sample_in_rows(row_idx[t_choice], col_rng)

    distinct, inverse = np.unique(col_idx, return_inverse=True)
    block = a.entry_block(row_idx, distinct)
    p_prime_distinct = ((np.abs(block) ** 2) / row_norms_sq[:, None]).sum(axis=0) / p
    p_prime = p_prime_distinct[inverse]
    col_scales = 1.0 / np.sqrt(p * p_prime)

    w = a.entry_block(row_idx, col_idx) * row_scales[:, None] * col_scales[None, :]
    u, s, _ = np.linalg.svd(w)
    top = s[0] if s.size else 0.0
    tau = max(p, k) * np.finfo(np.float64).eps * top
    usable = int(np.sum(s > tau))
    if usable < k:
        raise RankDeficientSketch(
            f"core matrix has {usable} usable singular values, need k={k}"
        )
    return SuccinctDescription(
        row_indices=row_idx,
        row_scales=row_scales,
        col_indices=col_idx,
        col_scales=col_scales,
        sigma_hat=s[:k].copy(),
        u_hat=_phase_normalize(u[:, :k]),
        k=k,
        p=p,
        seed=seed,
        source_digest=matrix_digest(a),
    )


def rank_probe(a: SampledMatrix, p: int, rng: np.random.Generator) -> np.ndarray:
    """Full singular spectrum of a sketched core, for choosing k."""
    d = subsample(a, 1, p, rng)
    w = (
        a.entry_block(d.row_indices, d.col_indices)
        * d.row_scales[:, None]
        * d.col_scales[None, :]
    )
    return np.linalg.svd(w, compute_uv=False)


def v_entry(d: SuccinctDescription, a: SampledMatrix, j: int, i: int) -> complex:
    """Entry V(j, i) = (S' u_hat_i)(j) / sigma_hat_i, via p entry queries."""
    if not 0 <= j < a.n:
        raise IndexError(f"row index {j} out of range")
    if not 0 <= i < d.k:
        raise IndexError(f"basis column {i} out of range")
    s_col = a.entries_at(d.row_indices, np.full(d.p, j, dtype=np.int64)) * d.row_scales
    return complex(np.conj(s_col) @ d.u_hat[:, i] / d.sigma_hat[i])


def v_rows(d: SuccinctDescription, a: SampledMatrix, js) -> np.ndarray:
    """Rows V(j, .) for each j in js, shape (len(js), k)."""
    js = np.asarray(js, dtype=np.int64)
    block = a.entry_block(d.row_indices, js) * d.row_scales[:, None]
    return (block.conj().T @ d.u_hat) / d.sigma_hat[None, :]


class SDaggerAccess(ThinMatrixAccess):
    """Thin access to M = S', the n-by-p adjoint of the sketched rows.

    Column j of S' is the conjugated, scaled sampled row A(i_j, .), so its
    length-squared law is served directly by the matrix structure and its
    norm is ||A||_F / sqrt(p) exactly.
    """

    def __init__(self, d: SuccinctDescription, a: SampledMatrix) -> None:
        self.d = d
        self.a = a
        self.n_rows = a.n
        self.n_cols = d.p
        self.ledger = a.ledger

    def col_norms(self) -> np.ndarray:
        return self.a.row_norms_at(self.d.row_indices) * self.d.row_scales

    def sample_in_cols(self, js: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.a.sample_in_rows(self.d.row_indices[np.asarray(js, dtype=np.int64)], rng)

    def row_block(self, idx: np.ndarray) -> np.ndarray:
        block = self.a._block_uncounted(self.d.row_indices, idx)
        return (block * self.d.row_scales[:, None]).conj().T


class VColumnAccess(VectorAccess):
    """Query/sample access to the basis column V(., i).

    Queries cost p entry queries each; samples run rejection over S' with
    coefficient vector u_hat_i / sigma_hat_i and are exact draws from the
    column's length-squared law.  The norm is reported as 1, the
    near-isometry value; `verify_sketch` reports true norms at desk scale.
    """

    def __init__(
        self,
        d: SuccinctDescription,
        a: SampledMatrix,
        i: int,
        s_access: SDaggerAccess | None = None,
        cap: int | None = None,
    ) -> None:
        if not 0 <= i < d.k:
            raise IndexError(f"basis column {i} out of range")
        self.d = d
        self.a = a
        self.i = int(i)
        self.s_access = s_access if s_access is not None else SDaggerAccess(d, a)
        self.coeff = d.u_hat[:, self.i] / d.sigma_hat[self.i]
        self.cap = cap

    def norm(self) -> float:
        return 1.0

    def query(self, j: int) -> complex:
        return v_entry(self.d, self.a, j, self.i)

    def query_many(self, js) -> np.ndarray:
        return v_rows(self.d, self.a, js)[:, self.i]

    def sample(self, rng: np.random.Generator) -> int:
        return sample_thin_product(self.s_access, self.coeff, rng, cap=self.cap)

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return sample_thin_product_many(self.s_access, self.coeff, rng, size, cap=self.cap)

    def sample_many_with_values(self, rng, size) -> tuple[np.ndarray, np.ndarray]:
        return sample_thin_product_many(
            self.s_access, self.coeff, rng, size, cap=self.cap, return_values=True
        )


def v_column_access(
    d: SuccinctDescription,
    a: SampledMatrix,
    i: int,
    s_access: SDaggerAccess | None = None,
    cap: int | None = None,
) -> VColumnAccess:
    return VColumnAccess(d, a, i, s_access=s_access, cap=cap)


@dataclass
class SketchReport:
    """Dense approximation panel for a sketch (desk scale only)."""

    ata_sts_err: float
    sst_wwt_err: float
    ata_ahat2_err: float
    inv_ahat_m2_err: float
    v_gram_err: float
    v_col_norms: list[float]
    sigma_k_w: float
    sigma_1_w: float
    s_fro_ratio: float
    w_fro_ratio: float
    ata_fro: float = 0.0

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def dense_s(d: SuccinctDescription, a_dense: np.ndarray) -> np.ndarray:
    return a_dense[d.row_indices, :] * d.row_scales[:, None]


def dense_v(d: SuccinctDescription, a_dense: np.ndarray) -> np.ndarray:
    s = dense_s(d, a_dense)
    return (s.conj().T @ d.u_hat) / d.sigma_hat[None, :]


def verify_sketch(
    d: SuccinctDescription, a, dense_cap: int = oracle.DENSE_CAP
) -> SketchReport:
    """Materialize S, W, V densely and report the approximation panel.

    Accepts a SampledMatrix or a dense array.  Raises DimensionTooLarge
    above `dense_cap`.
    """
    a_dense = a.to_dense() if isinstance(a, SampledMatrix) else np.asarray(
        a, dtype=np.complex128
    )
    m, n = a_dense.shape
    if max(m, n, d.p) > dense_cap:
        raise DimensionTooLarge(
            f"verify_sketch capped at {dense_cap}, got {max(m, n, d.p)}"
        )
    s = dense_s(d, a_dense)
    w = s[:, d.col_indices] * d.col_scales[None, :]
    v = (s.conj().T @ d.u_hat) / d.sigma_hat[None, :]

    ata = a_dense.conj().T @ a_dense
    sts = s.conj().T @ s
    sst = s @ s.conj().T
    wwt = w @ w.conj().T
    ahat2 = (v * d.sigma_hat**2) @ v.conj().T
    ahat_m2 = (v * d.sigma_hat**-2.0) @ v.conj().T
    inv_ata = oracle.pinv(ata)
    w_sigma = np.linalg.svd(w, compute_uv=False)
    gram = v.conj().T @ v

    return SketchReport(
        ata_sts_err=float(np.linalg.norm(ata - sts)),
        sst_wwt_err=float(np.linalg.norm(sst - wwt)),
        ata_ahat2_err=float(np.linalg.norm(ata - ahat2)),
        inv_ahat_m2_err=float(np.linalg.norm(inv_ata - ahat_m2)),
        v_gram_err=float(np.linalg.norm(gram - np.eye(d.k))),
        v_col_norms=[float(x) for x in np.linalg.norm(v, axis=0)],
        sigma_k_w=float(w_sigma[d.k - 1]) if w_sigma.size >= d.k else 0.0,
        sigma_1_w=float(w_sigma[0]) if w_sigma.size else 0.0,
        s_fro_ratio=float(np.linalg.norm(s) / np.linalg.norm(a_dense)),
        w_fro_ratio=float(np.linalg.norm(w) / np.linalg.norm(s)),
        ata_fro=float(np.linalg.norm(ata)),
    )
