"""Exact dense reference implementations used as ground truth.

Everything here is O(n^3) on purpose and capped at desk scale: the oracle
exists to check the sublinear paths, not to compete with them.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionTooLarge, NotPSD, ZeroNormSample

DENSE_CAP = 5000

_PSD_TOL = 1e-10


def _check_cap(*dims: int) -> None:
    if dims and max(dims) > DENSE_CAP:
        raise DimensionTooLarge(
            f"dense oracle capped at {DENSE_CAP}, got dimension {max(dims)}"
        )


def pinv_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return the pseudo-inverse solution of a x = b.

    Full SVD with singular values below sigma_1 * max(m, n) * eps treated
    as zero, so null directions are dropped rather than amplified.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128).ravel()
    m, n = a.shape
    _check_cap(m, n)
    if b.shape[0] != m:
        raise ValueError(f"shape mismatch: matrix {m}x{n}, vector {b.shape[0]}")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(n, dtype=np.complex128)
    cutoff = s[0] * max(m, n) * np.finfo(np.float64).eps
    keep = s > cutoff
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return vh.conj().T @ (inv_s * (u.conj().T @ b))


def pinv(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the same cutoff as `pinv_solve`."""
    a = np.asarray(a, dtype=np.complex128)
    _check_cap(*a.shape)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    cutoff = s[0] * max(a.shape) * np.finfo(np.float64).eps
    keep = s > cutoff
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (vh.conj().T * inv_s) @ u.conj().T


def exact_distribution(x: np.ndarray) -> np.ndarray:
    """The length-squared distribution of x: |x(i)|^2 / ||x||^2."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    w = np.abs(x) ** 2
    total = w.sum()
    if total <= 0.0:
        raise ZeroNormSample("zero vector has no length-squared distribution")
    return w / total


def exact_tv(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance: half the l1 distance of two distributions."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise ValueError("distributions must have equal length")
    return float(0.5 * np.abs(p - q).sum())


def empirical_distribution(indices: np.ndarray, n: int) -> np.ndarray:
    """Normalized histogram of sampled indices over {0, ..., n-1}."""
    counts = np.bincount(np.asarray(indices, dtype=np.int64), minlength=n)
    total = counts.sum()
    if total == 0:
        raise ZeroNormSample("no samples provided")
    return counts / total


def assert_psd(x: np.ndarray, tol: float = _PSD_TOL) -> np.ndarray:
    """Check Hermitian positive semidefiniteness; return eigenvalues.

    Raises:
        NotPSD: if x is not Hermitian or has an eigenvalue below -tol*scale.
    """
    x = np.asarray(x, dtype=np.complex128)
    _check_cap(*x.shape)
    if x.shape[0] != x.shape[1]:
        raise NotPSD("matrix is not square")
    scale = max(1.0, float(np.abs(x).max(initial=0.0)))
    if not np.allclose(x, x.conj().T, atol=tol * scale, rtol=0.0):
        raise NotPSD("matrix is not Hermitian")
    eigs = np.linalg.eigvalsh(x)
    if eigs.size and eigs[0] < -tol * max(scale, float(eigs[-1])):
        raise NotPSD(f"minimum eigenvalue {eigs[0]:.3e} is negative")
    return eigs


def _rank(eigs: np.ndarray) -> int:
    if eigs.size == 0:
        return 0
    top = float(eigs.max())
    if top <= 0.0:
        return 0
    return int(np.sum(eigs > top * eigs.size * np.finfo(np.float64).eps))


def check_sqrt_lemma(x: np.ndarray, y: np.ndarray) -> bool:
    """True iff ||X - Y||_F <= (2k)^(1/4) * ||X^2 - Y^2||_F^(1/2).

    X, Y must be PSD; k is the larger of their ranks.
    """
    ex = assert_psd(x)
    ey = assert_psd(y)
    k = max(_rank(ex), _rank(ey))
    lhs = float(np.linalg.norm(x - y))
    if k == 0:
        return lhs <= 1e-12
    rhs = (2.0 * k) ** 0.25 * float(np.linalg.norm(x @ x - y @ y)) ** 0.5
    return lhs <= rhs + 1e-9 * max(1.0, rhs)


def check_inv_lemma(x: np.ndarray, y: np.ndarray) -> bool:
    """True iff ||X^-1 - Y^-1||_F <= 3 ||X - Y||_F / sigma_min^2.

    Pseudo-inverses; sigma_min is the smaller of the two minimum nonzero
    singular values.
    """
    ex = assert_psd(x)
    ey = assert_psd(y)
    lhs = float(np.linalg.norm(pinv(x) - pinv(y)))
    mins = []
    for eigs in (ex, ey):
        if _rank(eigs) > 0:
            cut = eigs.max() * eigs.size * np.finfo(np.float64).eps
            mins.append(float(eigs[eigs > cut].min()))
    if not mins:
        return lhs <= 1e-12
    smin = min(mins)
    rhs = 3.0 * float(np.linalg.norm(x - y)) / smin**2
    return lhs <= rhs + 1e-9 * max(1.0, rhs)
