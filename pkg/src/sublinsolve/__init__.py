"""Sublinear-time solving of low-rank linear systems via length-squared
sampling.

Query an entry of the pseudo-inverse solution A^-1 b, or sample an index
from its length-squared distribution, using only sampling/entry/norm
access to A and b.  An exact dense oracle and a query ledger support
correctness and sublinearity verification at desk scale.
"""

from . import errors
from .errors import (
    DimensionTooLarge,
    DuplicateEntry,
    EmptyVector,
    EstimatorFailure,
    IterationCapExceeded,
    NonfiniteSample,
    NotPSD,
    RankDeficientSketch,
    ZeroNormSample,
    ZeroSolution,
)
from .estimators import (
    DenseThinAccess,
    EstimatorParams,
    SampledVectorAccess,
    VectorAccess,
    estimate_bilinear,
    estimate_inner,
    sample_thin_product,
    sample_thin_product_isometry,
    sample_thin_product_many,
    tv_distance_bound_check,
)
from .generate import Instance, InstanceSpec, generate_instance, generate_psd_instance
from .kernels import BACKEND as KERNEL_BACKEND
from .ledger import QueryLedger
from .matrix import SampledMatrix
from .rng import named_stream
from .sketch import (
    SuccinctDescription,
    paper_sketch_size,
    rank_probe,
    sample_rows,
    subsample,
    suggest_sketch_size,
    v_column_access,
    v_entry,
    verify_sketch,
)
from .solver import (
    SolverConfig,
    SolveState,
    overlap_estimate,
    prepare,
    prepare_psd,
    query_entries,
    query_entry,
    sample_gate,
    sample_solution,
    sample_solutions,
    solve_psd,
)
from .vector import SampledVector

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "QueryLedger",
    "SampledVector",
    "SampledMatrix",
    "SuccinctDescription",
    "SolverConfig",
    "SolveState",
    "EstimatorParams",
    "VectorAccess",
    "SampledVectorAccess",
    "DenseThinAccess",
    "Instance",
    "InstanceSpec",
    "errors",
    "estimate_inner",
    "estimate_bilinear",
    "sample_thin_product",
    "sample_thin_product_many",
    "sample_thin_product_isometry",
    "tv_distance_bound_check",
    "generate_instance",
    "generate_psd_instance",
    "named_stream",
    "sample_rows",
    "subsample",
    "suggest_sketch_size",
    "paper_sketch_size",
    "rank_probe",
    "v_entry",
    "v_column_access",
    "verify_sketch",
    "prepare",
    "prepare_psd",
    "query_entry",
    "query_entries",
    "sample_solution",
    "sample_solutions",
    "sample_gate",
    "overlap_estimate",
    "solve_psd",
    "EmptyVector",
    "ZeroNormSample",
    "DuplicateEntry",
    "NonfiniteSample",
    "IterationCapExceeded",
    "RankDeficientSketch",
    "EstimatorFailure",
    "ZeroSolution",
    "NotPSD",
    "DimensionTooLarge",
]
