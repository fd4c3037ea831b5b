# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled small-matrix kernels (d <= 8).

Cyclic Jacobi eigensolver for complex Hermitian matrices plus the batched
series operations that dominate phase-trace evaluation.  Signatures match
``_kernels_py``.
"""

import numpy as np

from libc.math cimport sqrt

NAME = "c"

DEF MAXD = 8
DEF MAX_SWEEPS = 60


cdef double _offdiag_norm(double complex* a, int d) noexcept nogil:
    cdef int p, q
    cdef double acc = 0.0
    for p in range(d - 1):
        for q in range(p + 1, d):
            acc += (a[p * d + q].real * a[p * d + q].real
                    + a[p * d + q].imag * a[p * d + q].imag)
    return sqrt(2.0 * acc)


cdef int _jacobi(double complex* a, double complex* v, double* w, int d) noexcept nogil:
    """Cyclic-by-row Jacobi on a Hermitian matrix held row-major in ``a``.

    Eigenvalues land in ``w`` (unsorted), eigenvectors in the columns of
    ``v``.  Returns 0 on convergence, 1 after the sweep budget runs out.
    """
    cdef int p, q, k, sweep, converged
    cdef double scale, app, aqq, r, tau, t, c, s
    cdef double complex apq, phase, tp, tq

    for p in range(d):
        for q in range(d):
            v[p * d + q] = 1.0 if p == q else 0.0

    scale = 0.0
    for p in range(d):
        for q in range(d):
            scale += (a[p * d + q].real * a[p * d + q].real
                      + a[p * d + q].imag * a[p * d + q].imag)
    scale = sqrt(scale)
    if scale == 0.0:
        for p in range(d):
            w[p] = 0.0
        return 0

    converged = 0
    for sweep in range(MAX_SWEEPS):
        if _offdiag_norm(a, d) <= 1e-14 * scale:
            converged = 1
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p * d + q]
                r = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if r <= 1e-300:
                    a[p * d + q] = 0.0
                    a[q * d + p] = 0.0
                    continue
                phase = apq / r
                app = a[p * d + p].real
                aqq = a[q * d + q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # A <- J^dag A J with J_pp = J_qq = c, J_pq = s e^(i phi),
                # J_qp = -s e^(-i phi); column pass then row pass.
                for k in range(d):
                    tp = a[k * d + p]
                    tq = a[k * d + q]
                    a[k * d + p] = c * tp - s * phase.conjugate() * tq
                    a[k * d + q] = s * phase * tp + c * tq
                for k in range(d):
                    tp = a[p * d + k]
                    tq = a[q * d + k]
                    a[p * d + k] = c * tp - s * phase * tq
                    a[q * d + k] = s * phase.conjugate() * tp + c * tq
                a[p * d + q] = 0.0
                a[q * d + p] = 0.0
                a[p * d + p] = a[p * d + p].real
                a[q * d + q] = a[q * d + q].real
                for k in range(d):
                    tp = v[k * d + p]
                    tq = v[k * d + q]
                    v[k * d + p] = c * tp - s * phase.conjugate() * tq
                    v[k * d + q] = s * phase * tp + c * tq
    for p in range(d):
        w[p] = a[p * d + p].real
    if converged:
        return 0
    return 0 if _offdiag_norm(a, d) <= 1e-12 * scale else 1


cdef void _sort_ascending(double* w, double complex* v, int d) noexcept nogil:
    cdef int i, j, best, k
    cdef double tmp
    cdef double complex tc
    for i in range(d - 1):
        best = i
        for j in range(i + 1, d):
            if w[j] < w[best]:
                best = j
        if best != i:
            tmp = w[i]
            w[i] = w[best]
            w[best] = tmp
            for k in range(d):
                tc = v[k * d + i]
                v[k * d + i] = v[k * d + best]
                v[k * d + best] = tc


cdef int _eigh_into(const double complex[:, ::1] h, double[::1] w_out,
                    double complex[:, ::1] v_out) noexcept nogil:
    cdef double complex buf[MAXD * MAXD]
    cdef double complex vec[MAXD * MAXD]
    cdef double w[MAXD]
    cdef int d = h.shape[0]
    cdef int i, j, status
    for i in range(d):
        for j in range(d):
            buf[i * d + j] = h[i, j]
    status = _jacobi(buf, vec, w, d)
    _sort_ascending(w, vec, d)
    for i in range(d):
        w_out[i] = w[i]
        for j in range(d):
            v_out[i, j] = vec[i * d + j]
    return status


def eigh_herm(h):
    """Eigendecomposition of one Hermitian matrix, eigenvalues ascending."""
    cdef const double complex[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef int d = hv.shape[0]
    if d > MAXD:
        raise ValueError(f"compiled kernels support d <= {MAXD}, got {d}")
    w = np.empty(d, dtype=np.float64)
    v = np.empty((d, d), dtype=np.complex128)
    cdef double[::1] wv = w
    cdef double complex[:, ::1] vv = v
    if _eigh_into(hv, wv, vv):
        raise np.linalg.LinAlgError("Jacobi sweeps did not converge")
    return w, v


def eigh_herm_many(hs):
    """Batched Hermitian eigendecomposition over the leading axis."""
    cdef const double complex[:, :, ::1] hv = np.ascontiguousarray(hs, dtype=np.complex128)
    cdef Py_ssize_t n = hv.shape[0]
    cdef int d = hv.shape[1]
    if d > MAXD:
        raise ValueError(f"compiled kernels support d <= {MAXD}, got {d}")
    ws = np.empty((n, d), dtype=np.float64)
    vs = np.empty((n, d, d), dtype=np.complex128)
    cdef double[:, ::1] wv = ws
    cdef double complex[:, :, ::1] vv = vs
    cdef Py_ssize_t k
    cdef int bad = 0
    with nogil:
        for k in range(n):
            if _eigh_into(hv[k], wv[k], vv[k]):
                bad = 1
    if bad:
        raise np.linalg.LinAlgError("Jacobi sweeps did not converge")
    return ws, vs


def unitary_from_phases(v, phases):
    """v @ diag(phases[k]) @ v^dag for every row of ``phases`` -> (n, d, d)."""
    cdef const double complex[:, ::1] vv = np.ascontiguousarray(v, dtype=np.complex128)
    cdef const double complex[:, ::1] pv = np.ascontiguousarray(phases, dtype=np.complex128)
    cdef Py_ssize_t n = pv.shape[0]
    cdef int d = vv.shape[0]
    out = np.empty((n, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef Py_ssize_t k
    cdef int i, j, m
    cdef double complex acc
    with nogil:
        for k in range(n):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc += vv[i, m] * pv[k, m] * vv[j, m].conjugate()
                    ov[k, i, j] = acc
    return out


def conjugate_series(u, a, w):
    """u[k] @ a @ w[k] for every k -> (n, d, d)."""
    cdef const double complex[:, :, ::1] uv = np.ascontiguousarray(u, dtype=np.complex128)
    cdef const double complex[:, ::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const double complex[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.complex128)
    cdef Py_ssize_t n = uv.shape[0]
    cdef int d = av.shape[0]
    out = np.empty((n, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef double complex tmp[MAXD * MAXD]
    cdef Py_ssize_t k
    cdef int i, j, m
    cdef double complex acc
    with nogil:
        for k in range(n):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc += uv[k, i, m] * av[m, j]
                    tmp[i * d + j] = acc
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc += tmp[i * d + m] * wv[k, m, j]
                    ov[k, i, j] = acc
    return out


def trace_product_series(a, u, b, w):
    """Tr[a @ u[k] @ b @ w[k]] for every k -> (n,) complex."""
    cdef const double complex[:, ::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const double complex[:, :, ::1] uv = np.ascontiguousarray(u, dtype=np.complex128)
    cdef const double complex[:, ::1] bv = np.ascontiguousarray(b, dtype=np.complex128)
    cdef const double complex[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.complex128)
    cdef Py_ssize_t n = uv.shape[0]
    cdef int d = av.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double complex left[MAXD * MAXD]
    cdef double complex right[MAXD * MAXD]
    cdef Py_ssize_t k
    cdef int i, j, m
    cdef double complex acc
    with nogil:
        for k in range(n):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc += av[i, m] * uv[k, m, j]
                    left[i * d + j] = acc
                    acc = 0.0
                    for m in range(d):
                        acc += bv[i, m] * wv[k, m, j]
                    right[i * d + j] = acc
            acc = 0.0
            for i in range(d):
                for j in range(d):
                    acc += left[i * d + j] * right[j * d + i]
            ov[k] = acc
    return out


def dyn_integrand_series(rho_b, h_a, rho_a, h_b):
    """Re(Tr[rho_b @ h_a[k]] + Tr[rho_a @ h_b[k]]) -> (n,) float."""
    cdef const double complex[:, ::1] rb = np.ascontiguousarray(rho_b, dtype=np.complex128)
    cdef const double complex[:, :, ::1] ha = np.ascontiguousarray(h_a, dtype=np.complex128)
    cdef const double complex[:, ::1] ra = np.ascontiguousarray(rho_a, dtype=np.complex128)
    cdef const double complex[:, :, ::1] hb = np.ascontiguousarray(h_b, dtype=np.complex128)
    cdef Py_ssize_t n = ha.shape[0]
    cdef int d = rb.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t k
    cdef int i, j
    cdef double acc
    with nogil:
        for k in range(n):
            acc = 0.0
            for i in range(d):
                for j in range(d):
                    acc += (rb[i, j] * ha[k, j, i]).real
                    acc += (ra[i, j] * hb[k, j, i]).real
            ov[k] = acc
    return out


def purity_series(alphas):
    """Tr[(alpha[k] alpha[k]^dag)^2] for every k -> (n,) float."""
    cdef const double complex[:, :, ::1] av = np.ascontiguousarray(alphas, dtype=np.complex128)
    cdef Py_ssize_t n = av.shape[0]
    cdef int d = av.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double complex rho[MAXD * MAXD]
    cdef Py_ssize_t k
    cdef int i, j, m
    cdef double complex acc
    cdef double total
    with nogil:
        for k in range(n):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc += av[k, i, m] * av[k, j, m].conjugate()
                    rho[i * d + j] = acc
            total = 0.0
            for i in range(d):
                for j in range(d):
                    total += (rho[i * d + j] * rho[i * d + j].conjugate()).real
            ov[k] = total
    return out
