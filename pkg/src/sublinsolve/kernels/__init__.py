"""Sum-tree kernel backend selection.

The compiled extension is used when it importable; otherwise the numpy
fallback takes over.  Set SUBLINSOLVE_KERNELS=py to force the fallback
(used by tests and the backend benchmark).  Both backends are
draw-for-draw identical given the same uniforms.
"""

from __future__ import annotations

import os

from . import pytree

_forced = os.environ.get("SUBLINSOLVE_KERNELS", "").strip().lower()

if _forced in ("py", "python"):
    _impl = pytree
    BACKEND = "python"
else:
    try:
        from . import _ctree as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = pytree
        BACKEND = "python"

rebuild = _impl.rebuild
update = _impl.update
sample_one = _impl.sample_one
sample_many = _impl.sample_many
sample_rows_many = _impl.sample_rows_many

# Batched (2-D) rebuild is a vectorized numpy op in either backend.
rebuild_batch = pytree.rebuild

__all__ = [
    "BACKEND",
    "rebuild",
    "rebuild_batch",
    "update",
    "sample_one",
    "sample_many",
    "sample_rows_many",
    "pytree",
]
