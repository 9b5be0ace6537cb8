"""Synthetic instances with prescribed rank, condition number, and b-mode.

A = U diag(sigma) V' with Haar-random orthonormal factors (QR of Gaussian
matrices with phase-fixed diagonals), sigma spanning [sigma_max / kappa,
sigma_max] on a linear or geometric grid.  The right-hand side is built
in-range (b = A z), orthogonal to the column space, or as the mix
sqrt(c) b_in + sqrt(1-c) b_orth with unit pieces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import named_stream

B_MODES = ("in-range", "mixed", "orthogonal")
PROFILES = ("linear", "geometric")


@dataclass
class InstanceSpec:
    """Shape, spectrum, and right-hand-side recipe for one instance."""

    m: int
    n: int
    k: int
    kappa: float
    profile: str = "linear"
    b_mode: str = "in-range"
    mix_c: float = 0.5
    sigma_max: float = 1.0
    seed: int = 0
    complex_field: bool = True

    def __post_init__(self) -> None:
        if self.k < 1 or self.k > min(self.m, self.n):
            raise ValueError(f"k={self.k} must lie in [1, min(m, n)]")
        if self.kappa < 1.0:
            raise ValueError("kappa must be at least 1")
        if self.k == 1 and self.kappa != 1.0:
            raise ValueError("a rank-1 matrix has condition number 1")
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}")
        if self.b_mode not in B_MODES:
            raise ValueError(f"b_mode must be one of {B_MODES}")
        if not 0.0 <= self.mix_c <= 1.0:
            raise ValueError("mix_c must lie in [0, 1]")
        if self.b_mode == "orthogonal" and self.k >= self.m:
            raise ValueError("orthogonal b needs k < m")


@dataclass
class Instance:
    """Dense realization of an InstanceSpec plus generation metadata."""

    spec: InstanceSpec
    a: np.ndarray
    b: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def kappa_achieved(self) -> float:
        return float(self.sigma[0] / self.sigma[-1])

    def metadata(self) -> dict:
        s = self.spec
        return {
            "m": s.m,
            "n": s.n,
            "k": s.k,
            "kappa_target": s.kappa,
            "kappa_achieved": self.kappa_achieved,
            "profile": s.profile,
            "b_mode": s.b_mode,
            "mix_c": s.mix_c,
            "sigma_max": s.sigma_max,
            "seed": s.seed,
            "complex_field": s.complex_field,
            "frobenius": float(np.linalg.norm(self.a)),
            "b_norm": float(np.linalg.norm(self.b)),
        }


def haar_columns(rows: int, cols: int, rng: np.random.Generator,
                 complex_field: bool = True) -> np.ndarray:
    """Orthonormal columns distributed by the Haar measure."""
    g = rng.standard_normal((rows, cols))
    if complex_field:
        g = g + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g.astype(np.complex128))
    diag = np.diag(r)
    phase = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
    return q * np.conj(phase)[None, :]


def singular_values(spec: InstanceSpec) -> np.ndarray:
    hi = spec.sigma_max
    lo = hi / spec.kappa
    if spec.k == 1:
        return np.array([hi])
    if spec.profile == "linear":
        return np.linspace(hi, lo, spec.k)
    return np.geomspace(hi, lo, spec.k)


def generate_instance(spec: InstanceSpec) -> Instance:
    """Realize the instance; achieved kappa is exact by construction."""
    rng = named_stream(spec.seed, "instance")
    u = haar_columns(spec.m, spec.k, rng, spec.complex_field)
    v = haar_columns(spec.n, spec.k, rng, spec.complex_field)
    sigma = singular_values(spec)
    a = (u * sigma[None, :]) @ v.conj().T

    if spec.b_mode == "in-range":
        z = rng.standard_normal(spec.n)
        if spec.complex_field:
            z = z + 1j * rng.standard_normal(spec.n)
        b = a @ (z / np.linalg.norm(z))
    else:
        g = rng.standard_normal(spec.m)
        if spec.complex_field:
            g = g + 1j * rng.standard_normal(spec.m)
        coeff = u.conj().T @ g
        b_in = u @ coeff
        b_in /= np.linalg.norm(b_in)
        b_out = g - u @ coeff
        b_out /= np.linalg.norm(b_out)
        if spec.b_mode == "orthogonal":
            b = b_out
        else:
            b = np.sqrt(spec.mix_c) * b_in + np.sqrt(1.0 - spec.mix_c) * b_out
    return Instance(spec=spec, a=a.astype(np.complex128),
                    b=b.astype(np.complex128), sigma=sigma, u=u, v=v)


def generate_psd_instance(spec: InstanceSpec) -> Instance:
    """Hermitian PSD variant: A = V diag(sigma) V' on an n-by-n frame."""
    if spec.m != spec.n:
        raise ValueError("PSD instances must be square")
    rng = named_stream(spec.seed, "instance")
    v = haar_columns(spec.n, spec.k, rng, spec.complex_field)
    sigma = singular_values(spec)
    a = (v * sigma[None, :]) @ v.conj().T
    a = 0.5 * (a + a.conj().T)

    if spec.b_mode != "in-range":
        raise ValueError(f"unsupported PSD b_mode {spec.b_mode!r}")
    z = rng.standard_normal(spec.n)
    if spec.complex_field:
        z = z + 1j * rng.standard_normal(spec.n)
    b = a @ (z / np.linalg.norm(z))
    return Instance(spec=spec, a=a.astype(np.complex128),
                    b=b.astype(np.complex128), sigma=sigma, u=v, v=v)
