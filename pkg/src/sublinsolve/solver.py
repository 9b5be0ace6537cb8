"""Entry queries and index sampling for the pseudo-inverse solution.

The pipeline follows the identity A^-1 b = (A'A)^-1 A' b: a sketching pass
builds the succinct basis V and spectrum D, bilinear estimation produces
w(i) ~ V(.,i)' A' b, and both outputs read off V w' with w' = D^-2 w.
Queries fetch one scaled sample-row column per entry; sampling rejects
against the factorization V w' = S' g with g = U_hat (w' / sigma_hat),
whose column norms are known exactly, so draws follow the target law
without distortion.

The positive-semidefinite variant reuses the same sketch with a single
inverse power (w' = D^-1 w) and needs only entry access to b.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .errors import EstimatorFailure, NotPSD, ZeroSolution
from .estimators import (
    AdjointEntryAccess,
    ArrayQueryAccess,
    EstimatorParams,
    SampledVectorAccess,
    VectorAccess,
    estimate_bilinear,
    estimate_inner,
    sample_thin_product,
    sample_thin_product_many,
)
from .ledger import QueryLedger
from .matrix import SampledMatrix
from .rng import named_stream
from .sketch import SDaggerAccess, SuccinctDescription, VColumnAccess, subsample
from .vector import SampledVector


@dataclass
class SolverConfig:
    """Solve-time knobs.

    `epsilon`/`delta` are the additive-error and failure targets; the
    derived per-component estimator budgets follow the error-splitting
    rescalings (component target epsilon * sigma_k^2 / sqrt(k), confidence
    delta / (k+1)) with the sketch's sigma_hat standing in for the unknown
    spectral data.  Derived group sizes are capped by `max_group_size`;
    explicit `estimator_group_size` wins outright.
    """

    k: int
    p: int
    epsilon: float = 0.05
    delta: float = 0.1
    estimator_groups: int | None = None
    estimator_group_size: int | None = None
    max_group_size: int = 200_000
    rejection_cap: int | None = None
    tau_b: float = 0.1
    seed: int = 0
    psd_check_cap: int = 512

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.p < self.k:
            raise ValueError(f"p={self.p} must be at least k={self.k}")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 <= self.tau_b <= 1.0:
            raise ValueError("tau_b must lie in [0, 1]")


@dataclass
class SolveState:
    """Prepared solve: sketch description plus the estimated coefficients.

    `w_prime(i) = w(i) / sigma_hat_i^inverse_power` exactly, and
    `g = u_hat @ (w_prime / sigma_hat)` is the p-vector with
    V w' = S' g, shared by entry queries and solution sampling.
    """

    description: SuccinctDescription
    w: np.ndarray
    w_prime: np.ndarray
    g: np.ndarray
    inverse_power: int
    config: SolverConfig
    ledger_snapshot: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def _component_params(cfg: SolverConfig, sigma: np.ndarray) -> EstimatorParams:
    eps_comp = cfg.epsilon * sigma[-1] ** 2 / np.sqrt(cfg.k)
    return EstimatorParams(
        epsilon=float(eps_comp),
        delta=cfg.delta / (cfg.k + 1),
        groups=cfg.estimator_groups,
        group_size=cfg.estimator_group_size,
        max_group_size=cfg.max_group_size,
    )


def _column_cap(cfg: SolverConfig, fro_sq: float, sigma_i: float) -> int:
    if cfg.rejection_cap is not None:
        return cfg.rejection_cap
    expected = fro_sq / sigma_i**2
    return int(np.ceil(50.0 * max(20.0, expected)))


def _finalize_state(
    d: SuccinctDescription,
    w: np.ndarray,
    power: int,
    cfg: SolverConfig,
    a: SampledMatrix,
    timings: dict,
) -> SolveState:
    if not np.all(np.isfinite(w.real) & np.isfinite(w.imag)):
        raise EstimatorFailure("coefficient estimation produced non-finite values")
    w_prime = w / d.sigma_hat**power
    g = d.u_hat @ (w_prime / d.sigma_hat)
    return SolveState(
        description=d,
        w=w,
        w_prime=w_prime,
        g=g,
        inverse_power=power,
        config=cfg,
        ledger_snapshot=a.ledger.snapshot(),
        timings=timings,
    )


def prepare(
    a: SampledMatrix,
    b: SampledVector,
    cfg: SolverConfig,
    rng: np.random.Generator | None = None,
) -> SolveState:
    """Sketch A and estimate w(i) = V(.,i)' A' b for i = 1..k.

    Each component is a bilinear-form estimate with x = V(.,i) (sampled by
    rejection over S'), the adjoint entry map of A, and y = b, at the
    derived per-component budget.  Randomness flows through named streams
    of cfg.seed unless an explicit generator is supplied.
    """
    if b.n != a.m:
        raise ValueError(f"b has length {b.n}, expected {a.m}")
    if rng is None:
        rows_rng = named_stream(cfg.seed, "rows")
        cols_rng = named_stream(cfg.seed, "cols")
        comp_rngs = [named_stream(cfg.seed, f"estimator-g{i}") for i in range(cfg.k)]
    else:
        rows_rng = cols_rng = rng
        comp_rngs = list(rng.spawn(cfg.k))

    t0 = time.perf_counter()
    d = subsample(a, cfg.k, cfg.p, rows_rng, col_rng=cols_rng, seed=cfg.seed)
    t1 = time.perf_counter()

    s_access = SDaggerAccess(d, a)
    b_access = SampledVectorAccess(b)
    a_adj = AdjointEntryAccess(a)
    fro_sq = a.frobenius_sq()
    params = _component_params(cfg, d.sigma_hat)
    w = np.empty(cfg.k, dtype=np.complex128)
    for i in range(cfg.k):
        x = VColumnAccess(
            d, a, i, s_access=s_access,
            cap=_column_cap(cfg, fro_sq, float(d.sigma_hat[i])),
        )
        w[i] = estimate_bilinear(x, a_adj, b_access, params, comp_rngs[i],
                                 ledger=a.ledger)
    t2 = time.perf_counter()
    timings = {"sketch_s": t1 - t0, "estimate_s": t2 - t1}
    return _finalize_state(d, w, 2, cfg, a, timings)


def query_entry(state: SolveState, a: SampledMatrix, j: int) -> complex:
    """Approximate (A^-1 b)(j) as the inner product V(j, .) w'."""
    d = state.description
    if not 0 <= j < a.n:
        raise IndexError(f"index {j} out of range for n={a.n}")
    s_col = a.entries_at(d.row_indices, np.full(d.p, j, dtype=np.int64)) * d.row_scales
    return complex(np.conj(s_col) @ state.g)


def query_entries(state: SolveState, a: SampledMatrix, js) -> np.ndarray:
    """Vectorized `query_entry` over an index array."""
    d = state.description
    js = np.asarray(js, dtype=np.int64)
    block = a.entry_block(d.row_indices, js) * d.row_scales[:, None]
    return block.conj().T @ state.g


def _solution_cap(state: SolveState, fro_sq: float) -> int:
    cfg = state.config
    if cfg.rejection_cap is not None:
        return cfg.rejection_cap
    wp_sq = float(np.linalg.norm(state.w_prime) ** 2)
    g_sq = float(np.linalg.norm(state.g) ** 2)
    expected = fro_sq * g_sq / max(wp_sq, 1e-300)
    return int(np.ceil(50.0 * max(20.0, expected)))


def _zero_guard(state: SolveState) -> None:
    tau = state.config.epsilon / state.description.sigma_hat[0] ** state.inverse_power
    if float(np.linalg.norm(state.w_prime)) <= tau:
        raise ZeroSolution(
            "solution coefficients below the sampling threshold; "
            "b has (numerically) no overlap with the column space"
        )


def sample_solution(state: SolveState, a: SampledMatrix,
                    rng: np.random.Generator) -> int:
    """One index drawn from the length-squared law of the solution.

    Samples V w' through the exact factorization S' g; the law matches the
    solution's distribution up to the sketch and estimation error.
    """
    _zero_guard(state)
    s_access = SDaggerAccess(state.description, a)
    cap = _solution_cap(state, a.frobenius_sq())
    return sample_thin_product(s_access, state.g, rng, cap=cap)


def sample_solutions(state: SolveState, a: SampledMatrix,
                     rng: np.random.Generator, size: int) -> np.ndarray:
    """Batched `sample_solution` (i.i.d. draws)."""
    _zero_guard(state)
    s_access = SDaggerAccess(state.description, a)
    cap = _solution_cap(state, a.frobenius_sq())
    return sample_thin_product_many(s_access, state.g, rng, size, cap=cap)


def overlap_estimate(
    state: SolveState,
    a: SampledMatrix,
    b: SampledVector,
    params: EstimatorParams | None = None,
) -> float:
    """Estimate b' A (V D^-2 V') A' b, the squared-overlap proxy of b.

    With unit spectrum this approaches ||b||^2 times the squared fraction
    of b inside the column space; callers gate sampling by comparing it
    against tau_b * ||b||^2.  With `params` given, the k coefficient
    estimates are re-run at that budget on fresh named streams; otherwise
    the prepared state's w is reused.
    """
    d = state.description
    if params is None:
        w = state.w
    else:
        s_access = SDaggerAccess(d, a)
        b_access = SampledVectorAccess(b)
        a_adj = AdjointEntryAccess(a)
        fro_sq = a.frobenius_sq()
        w = np.empty(d.k, dtype=np.complex128)
        for i in range(d.k):
            x = VColumnAccess(
                d, a, i, s_access=s_access,
                cap=_column_cap(state.config, fro_sq, float(d.sigma_hat[i])),
            )
            w[i] = estimate_bilinear(
                x, a_adj, b_access, params,
                named_stream(state.config.seed, f"overlap-g{i}"), ledger=a.ledger,
            )
    return float(np.sum(np.abs(w) ** 2 / d.sigma_hat**2).real)


def sample_gate(state: SolveState, a: SampledMatrix, b: SampledVector) -> float:
    """Overlap gate for sample mode: returns the overlap estimate.

    Raises:
        ZeroSolution: if the overlap falls below tau_b * ||b||^2.
    """
    overlap = overlap_estimate(state, a, b)
    threshold = state.config.tau_b * b.norm_sq()
    if overlap < threshold:
        raise ZeroSolution(
            f"overlap estimate {overlap:.3e} below gate {threshold:.3e}"
        )
    return overlap


def _as_query_access(b, ledger: QueryLedger | None) -> VectorAccess:
    if isinstance(b, VectorAccess):
        return b
    if isinstance(b, SampledVector):
        return SampledVectorAccess(b)
    return ArrayQueryAccess(b, ledger=ledger)


def prepare_psd(
    a: SampledMatrix,
    b,
    cfg: SolverConfig,
    rng: np.random.Generator | None = None,
) -> SolveState:
    """Prepared solve for Hermitian PSD A with query-only b.

    The sketch is reused with a single inverse power: V D V' approximates
    A itself, so w(i) = V(.,i)' b (an inner-product estimate needing no
    samples of b) and w' = D^-1 w.  PSD-ness is asserted densely up to
    cfg.psd_check_cap and trusted above it.
    """
    if a.m != a.n:
        raise NotPSD("matrix is not square")
    if a.n <= cfg.psd_check_cap:
        oracle.assert_psd(a.to_dense())
    if rng is None:
        rows_rng = named_stream(cfg.seed, "rows")
        cols_rng = named_stream(cfg.seed, "cols")
        comp_rngs = [named_stream(cfg.seed, f"estimator-g{i}") for i in range(cfg.k)]
    else:
        rows_rng = cols_rng = rng
        comp_rngs = list(rng.spawn(cfg.k))

    t0 = time.perf_counter()
    d = subsample(a, cfg.k, cfg.p, rows_rng, col_rng=cols_rng, seed=cfg.seed)
    t1 = time.perf_counter()

    b_access = _as_query_access(b, a.ledger)
    s_access = SDaggerAccess(d, a)
    fro_sq = a.frobenius_sq()
    # component target is dimensionless here since ||b|| is unavailable
    eps_rel = cfg.epsilon * float(d.sigma_hat[-1] / (np.sqrt(cfg.k) * d.sigma_hat[0]))
    params = EstimatorParams(
        epsilon=eps_rel,
        delta=cfg.delta / (cfg.k + 1),
        groups=cfg.estimator_groups,
        group_size=cfg.estimator_group_size,
        max_group_size=cfg.max_group_size,
    )
    w = np.empty(cfg.k, dtype=np.complex128)
    for i in range(cfg.k):
        x = VColumnAccess(
            d, a, i, s_access=s_access,
            cap=_column_cap(cfg, fro_sq, float(d.sigma_hat[i])),
        )
        w[i] = estimate_inner(x, b_access, params, comp_rngs[i], ledger=a.ledger)
    t2 = time.perf_counter()
    timings = {"sketch_s": t1 - t0, "estimate_s": t2 - t1}
    return _finalize_state(d, w, 1, cfg, a, timings)


def solve_psd(
    a: SampledMatrix,
    b,
    cfg: SolverConfig,
    mode: str,
    j: int | None = None,
    rng: np.random.Generator | None = None,
):
    """One-shot PSD solve: `mode="query"` returns (A^-1 b)(j),
    `mode="sample"` returns an index drawn from the solution's law."""
    state = prepare_psd(a, b, cfg, rng=rng)
    if mode == "query":
        if j is None:
            raise ValueError("query mode requires an index j")
        return query_entry(state, a, j)
    if mode == "sample":
        sample_rng = rng if rng is not None else named_stream(cfg.seed, "rejection")
        return sample_solution(state, a, sample_rng)
    raise ValueError(f"unknown mode {mode!r}")
