"""Text interchange formats and report serialization.

Vector files:  line 1 `VEC n`, then n lines `re im`.
Matrix files:  line 1 `MAT m n nnz`, then nnz lines `i j re im` (0-based).
Floats are written with `repr`, the shortest decimal that round-trips
binary64 exactly.
"""

from __future__ import annotations

import json
import os
from typing import IO

import numpy as np

from .ledger import QueryLedger
from .matrix import SampledMatrix
from .vector import SampledVector


class FormatError(ValueError):
    """Raised for malformed interchange files (an I/O-class failure)."""


def _fmt(x: float) -> str:
    return repr(float(x))


def save_vector(values, path: str | os.PathLike) -> None:
    arr = np.asarray(values, dtype=np.complex128).ravel()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"VEC {arr.size}\n")
        for v in arr:
            fh.write(f"{_fmt(v.real)} {_fmt(v.imag)}\n")


def _parse_header(line: str, tag: str, path) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != tag:
        raise FormatError(f"{path}: expected header '{tag} ...', got {line!r}")
    return parts[1:]


def load_vector_array(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            n = int(_parse_header(fh.readline(), "VEC", path)[0])
            out = np.empty(n, dtype=np.complex128)
            for i in range(n):
                re, im = fh.readline().split()
                out[i] = complex(float(re), float(im))
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}: malformed vector file: {exc}") from exc
    return out


def load_vector(path: str | os.PathLike, ledger: QueryLedger | None = None) -> SampledVector:
    return SampledVector(load_vector_array(path), ledger=ledger)


def save_matrix(matrix, path: str | os.PathLike) -> None:
    """Write a dense array or SampledMatrix; zero entries are omitted."""
    dense = matrix.to_dense() if isinstance(matrix, SampledMatrix) else np.asarray(
        matrix, dtype=np.complex128
    )
    m, n = dense.shape
    ii, jj = np.nonzero(dense)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"MAT {m} {n} {ii.size}\n")
        for i, j in zip(ii, jj):
            v = dense[i, j]
            fh.write(f"{i} {j} {_fmt(v.real)} {_fmt(v.imag)}\n")


def load_matrix_dense(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            m, n, nnz = (int(x) for x in _parse_header(fh.readline(), "MAT", path)[:3])
            dense = np.zeros((m, n), dtype=np.complex128)
            for _ in range(nnz):
                i, j, re, im = fh.readline().split()
                dense[int(i), int(j)] = complex(float(re), float(im))
        except (ValueError, IndexError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{path}: malformed matrix file: {exc}") from exc
    return dense


def load_matrix(
    path: str | os.PathLike,
    with_transpose: bool = False,
    ledger: QueryLedger | None = None,
) -> SampledMatrix:
    return SampledMatrix(
        load_matrix_dense(path), with_transpose=with_transpose, ledger=ledger
    )


def _complex_list(arr: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(arr).ravel()]


def _complex_array(pairs, shape) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
    return flat.reshape(shape)


def write_json(obj: dict, path_or_fh: str | os.PathLike | IO[str]) -> None:
    if hasattr(path_or_fh, "write"):
        json.dump(obj, path_or_fh, indent=2, sort_keys=True)
        path_or_fh.write("\n")
    else:
        with open(path_or_fh, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_json(path: str | os.PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
