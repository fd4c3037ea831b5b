"""SU(d) structure: generalized Gell-Mann generators, structure constants,
the adjoint map, and the distinguished diagonal generator of the cyclic path.

Generator ordering is fixed: all symmetric off-diagonal pairs (j < k,
row-major), then all antisymmetric pairs (j < k, row-major), then the d-1
diagonal generators by increasing rank.  The final generator (index
N = d^2 - 1) is diagonal proportional to (1, ..., 1, -(d-1)), so the
distinguished diagonal generator is always c_max * T_N.  Normalization:
Tr(T_a T_b) = delta_ab / 2; for d = 2 this gives exactly the Pauli
matrices over two.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import BasisInconsistent, NotUnitary, UnsupportedDimension

DIM_MIN = 2
DIM_MAX = 8


def _check_dim(d: int) -> int:
    d = int(d)
    if not DIM_MIN <= d <= DIM_MAX:
        raise UnsupportedDimension(f"dimension {d} outside supported range {DIM_MIN}..{DIM_MAX}")
    return d


@dataclass(frozen=True)
class GeneratorBasis:
    """Ordered orthonormal basis of Hermitian traceless d x d matrices."""

    dim: int
    matrices: np.ndarray = field(repr=False)  # (d^2-1, d, d)

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, a: int) -> np.ndarray:
        return self.matrices[a]

    def __iter__(self):
        return iter(self.matrices)


@dataclass(frozen=True)
class StructureConstants:
    """Totally antisymmetric table f_abc with [T_a, T_b] = i f_abc T_c."""

    dim: int
    f: np.ndarray = field(repr=False)  # (n, n, n) real


def generators(d: int) -> GeneratorBasis:
    """Generator basis of su(d) in the fixed symmetric/antisymmetric/diagonal order."""
    d = _check_dim(d)
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = m[k, j] = 0.5
            mats.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = -0.5j
            m[k, j] = 0.5j
            mats.append(m)
    for rank in range(1, d):
        diag = np.zeros(d)
        diag[:rank] = 1.0
        diag[rank] = -rank
        mats.append(np.diag(diag / np.sqrt(2.0 * rank * (rank + 1))).astype(np.complex128))
    stacked = np.stack(mats)
    stacked.setflags(write=False)
    return GeneratorBasis(dim=d, matrices=stacked)


def vn_generator(d: int) -> np.ndarray:
    """Diagonal traceless generator of the elementary cyclic path.

    Entries 1/d on the first d-1 diagonal positions and 1/d - 1 on the
    last; equals c_max(d) times the final basis generator T_N.
    """
    d = _check_dim(d)
    diag = np.full(d, 1.0 / d)
    diag[-1] = 1.0 / d - 1.0
    return np.diag(diag).astype(np.complex128)


def structure_constants(basis: GeneratorBasis) -> StructureConstants:
    """f_abc = -2i Tr([T_a, T_b] T_c), validated real and antisymmetric."""
    t = basis.matrices
    prod = np.einsum("aij,bjk->abik", t, t, optimize=True)
    comm = prod - prod.transpose(1, 0, 2, 3)
    f = -2j * np.einsum("abik,cki->abc", comm, t, optimize=True)
    if np.abs(f.imag).max() > 1e-12:
        raise BasisInconsistent("structure constants have nonreal parts")
    f = f.real
    if (
        np.abs(f + f.transpose(1, 0, 2)).max() > 1e-12
        or np.abs(f + f.transpose(0, 2, 1)).max() > 1e-12
    ):
        raise BasisInconsistent("structure constants are not totally antisymmetric")
    f = np.ascontiguousarray(f)
    f.setflags(write=False)
    return StructureConstants(dim=basis.dim, f=f)


def adjoint_rep(sbar, basis: GeneratorBasis) -> np.ndarray:
    """Orthogonal matrix R with R_ba = 2 Tr(T_b sbar T_a sbar^dag).

    Columns are the rotated frame vectors; unitaries differing by a d-th
    root of unity map to the same R.
    """
    sbar = matcore.as_complex_matrix(sbar)
    if matcore.unitarity_defect(sbar) > 1e-10:
        raise NotUnitary("adjoint map requires a unitary input")
    t = basis.matrices
    rotated = np.einsum("ij,ajk,lk->ail", sbar, t, sbar.conj(), optimize=True)
    r = 2.0 * np.einsum("bij,aji->ba", t, rotated, optimize=True).real
    return r


def decompose_hermitian(h, basis: GeneratorBasis):
    """Split Hermitian H = c0 I + c_a T_a; returns (c0, c)."""
    h = matcore.as_complex_matrix(h)
    matcore.check_hermitian(h)
    c0 = float(np.trace(h).real) / basis.dim
    c = 2.0 * np.einsum("aij,ji->a", basis.matrices, h, optimize=True).real
    return c0, c
