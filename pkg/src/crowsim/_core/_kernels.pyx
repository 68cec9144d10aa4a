# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops for the Volterra solver; see _kernels_py for contracts.

Both implementations take the same arguments and agree to rounding; the pure
loops here avoid the per-step slice/dispatch overhead of the numpy fallback.
"""

import numpy as np

cimport numpy as cnp


def u_recurrence(P_in, Q_in):
    P_arr = np.ascontiguousarray(P_in, dtype=np.complex128).copy()
    Q_arr = np.ascontiguousarray(Q_in, dtype=np.complex128).copy()
    cdef cnp.complex128_t[::1] P = P_arr
    cdef cnp.complex128_t[::1] Q = Q_arr
    cdef Py_ssize_t n = P_arr.shape[0] - 1
    out = np.empty(n + 1, dtype=np.complex128)
    d_arr = np.zeros(n + 1, dtype=np.complex128)
    cdef cnp.complex128_t[::1] w = out
    cdef cnp.complex128_t[::1] d = d_arr
    cdef Py_ssize_t j, k, m
    cdef double complex acc, denom, w0
    for m in range(1, n):
        d[m] = Q[m] + P[m + 1]
    denom = 1.0 + P[1]
    w[0] = 1.0
    w0 = w[0]
    for j in range(1, n + 1):
        acc = 0.0
        for k in range(1, j):
            acc = acc + d[j - k] * w[k]
        w[j] = (1.0 - Q[j] * w0 - acc) / denom
    return out


def v_accumulate(u_in, gt_in, gt_neg_in, double dt):
    u_arr = np.ascontiguousarray(u_in, dtype=np.complex128).copy()
    gt_arr = np.ascontiguousarray(gt_in, dtype=np.complex128).copy()
    gn_arr = np.ascontiguousarray(gt_neg_in, dtype=np.complex128).copy()
    uc_arr = np.conj(u_arr)
    cdef cnp.complex128_t[::1] u = u_arr
    cdef cnp.complex128_t[::1] uc = uc_arr
    cdef cnp.complex128_t[::1] gt = gt_arr
    cdef cnp.complex128_t[::1] gn = gn_arr
    cdef Py_ssize_t n = u_arr.shape[0] - 1
    out = np.zeros(n + 1, dtype=np.complex128)
    cdef cnp.complex128_t[::1] v = out
    cdef Py_ssize_t j, k
    cdef double complex S, A, Bn, Uc, L, r0, c0, rj, cj, corner, g0n
    cdef double dt2 = dt * dt
    g0n = gn[0]
    S = u[0] * uc[0] * g0n
    A = 0.0
    Bn = 0.0
    for j in range(1, n + 1):
        Uc = 0.0
        L = 0.0
        for k in range(j):
            Uc = Uc + u[k] * gt[j - k]
            L = L + uc[k] * gn[j - k]
        S = S + u[j] * L + uc[j] * Uc + (u[j] * uc[j]) * g0n
        A = A + uc[j] * gt[j]
        Bn = Bn + u[j] * gn[j]
        r0 = u[0] * (uc[0] * g0n + A)
        c0 = uc[0] * (u[0] * g0n + Bn)
        rj = u[j] * (L + uc[j] * g0n)
        cj = uc[j] * (Uc + u[j] * g0n)
        corner = (
            (u[0] * uc[0] + u[j] * uc[j]) * g0n
            + u[0] * uc[j] * gt[j]
            + u[j] * uc[0] * gn[j]
        )
        v[j] = dt2 * (S - 0.5 * (r0 + c0 + rj + cj) + 0.25 * corner)
    return out
