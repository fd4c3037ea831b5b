"""Dense complex linear algebra for small matrices (2 <= d <= 8).

Hermitian eigendecomposition, unitary matrix exponential and polar
decomposition, built on the selected kernel backend.  All operations are
pure functions; inputs are never mutated.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .errors import NoConvergence, NotHermitian, SingularMatrix

HERMITICITY_RTOL = 1e-12
SINGULARITY_TOL = 1e-12


def as_complex_matrix(a) -> np.ndarray:
    """Validate and return ``a`` as a square complex128 array with d >= 2."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 2:
        raise ValueError("matrix dimension must be at least 2")
    return m


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().T


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


def matrices_close(a, b, tol: float) -> bool:
    """Equality up to ``tol`` in Frobenius norm."""
    return frobenius(np.asarray(a) - np.asarray(b)) <= tol


def hermiticity_defect(h) -> float:
    """||H - H^dag||_F relative to ||H||_F (0 for the zero matrix)."""
    scale = frobenius(h)
    if scale == 0.0:
        return 0.0
    return frobenius(h - dagger(h)) / scale


def check_hermitian(h, rtol: float = HERMITICITY_RTOL) -> None:
    if hermiticity_defect(h) > rtol:
        raise NotHermitian(f"matrix deviates from Hermitian by more than {rtol:g} (relative)")


def unitarity_defect(u) -> float:
    u = np.asarray(u)
    return frobenius(dagger(u) @ u - np.eye(u.shape[0]))


def herm_eig(h, rtol: float = HERMITICITY_RTOL):
    """Eigenvalues (ascending) and eigenvector matrix of a Hermitian matrix.

    Returns (w, v) with H v = v diag(w) and v unitary.  Raises NotHermitian
    if the input fails the Hermiticity check, NoConvergence if the backend
    iteration does not settle.
    """
    m = as_complex_matrix(h)
    check_hermitian(m, rtol)
    try:
        w, v = backend.kernels.eigh_herm(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return np.asarray(w, dtype=float), np.asarray(v)


def herm_eig_many(hs):
    """Batched eigendecomposition; inputs assumed Hermitian by construction."""
    hs = np.ascontiguousarray(hs, dtype=np.complex128)
    return backend.kernels.eigh_herm_many(hs)


def expm_iherm(h, s=1.0) -> np.ndarray:
    """exp(i s H) for Hermitian H via eigendecomposition.

    ``s`` may be complex: s = -1j gives exp(H), used for the positive
    sector factor.  The result is unitary (to round-off) for real ``s``.
    """
    w, v = herm_eig(h)
    phases = np.exp(1j * s * w)
    return (v * phases) @ v.conj().T


def polar_decompose(a):
    """Polar split A = Q S with Q = sqrt(A A^dag) PSD Hermitian, S unitary.

    Q is the principal square root (eigenvalue route, negative round-off
    eigenvalues zeroed).  Raises SingularMatrix when |det A| < 1e-12; the
    exception still carries Q since only S is ill-defined there.
    """
    m = as_complex_matrix(a)
    w, v = backend.kernels.eigh_herm(m @ dagger(m))
    w = np.where(w > 0.0, w, 0.0)
    roots = np.sqrt(w)
    q = (v * roots) @ v.conj().T
    if abs(np.linalg.det(m)) < SINGULARITY_TOL:
        raise SingularMatrix("matrix is singular; unitary polar factor undefined", q=q)
    s = (v * (1.0 / roots)) @ v.conj().T @ m
    return q, s


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary (QR of a complex Ginibre matrix)."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def haar_special_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary with the determinant phase divided out (det = 1)."""
    u = haar_unitary(d, rng)
    return u * np.exp(-1j * np.angle(np.linalg.det(u)) / d)


def random_traceless_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian traceless matrix, Frobenius norm of order ``scale``."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (z + z.conj().T)
    h -= np.trace(h).real / d * np.eye(d)
    norm = np.linalg.norm(h)
    if norm == 0.0:
        return h
    return (scale / norm) * h
