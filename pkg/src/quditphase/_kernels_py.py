"""Pure-numpy implementations of the hot small-matrix kernels.

Same call signatures as the compiled module ``_ckernels``; the backend
module picks one of the two at import time.  All series arguments are
stacked along the leading axis: shape (n, d, d).
"""

import numpy as np

NAME = "python"


def eigh_herm(h):
    """Eigendecomposition of one Hermitian matrix, eigenvalues ascending."""
    return np.linalg.eigh(h)


def eigh_herm_many(hs):
    """Batched Hermitian eigendecomposition over the leading axis."""
    return np.linalg.eigh(hs)


def unitary_from_phases(v, phases):
    """v @ diag(phases[k]) @ v^dag for every row of ``phases`` -> (n, d, d)."""
    return np.einsum("ik,nk,jk->nij", v, phases, v.conj(), optimize=True)


def conjugate_series(u, a, w):
    """u[k] @ a @ w[k] for every k -> (n, d, d)."""
    return np.einsum("nij,jk,nkl->nil", u, a, w, optimize=True)


def trace_product_series(a, u, b, w):
    """Tr[a @ u[k] @ b @ w[k]] for every k -> (n,) complex."""
    return np.einsum("ij,njk,kl,nli->n", a, u, b, w, optimize=True)


def dyn_integrand_series(rho_b, h_a, rho_a, h_b):
    """Re(Tr[rho_b @ h_a[k]] + Tr[rho_a @ h_b[k]]) -> (n,) float."""
    vals = np.einsum("ij,nji->n", rho_b, h_a) + np.einsum("ij,nji->n", rho_a, h_b)
    return np.ascontiguousarray(vals.real)


def purity_series(alphas):
    """Tr[(alpha[k] alpha[k]^dag)^2] for every k -> (n,) float."""
    rho = alphas @ alphas.conj().transpose(0, 2, 1)
    return np.einsum("nij,nij->n", rho, rho.conj()).real
