"""Pure-Python (numpy) implementations of the solver's O(n²) inner loops.

These are the fallback for :mod:`crowsim._core._kernels`; both backends share
the exact calling conventions documented here. Per-step memory sums use
contiguous reversed-table slices so each step is a single BLAS dot.
"""

from __future__ import annotations

import numpy as np


def u_recurrence(P, Q):
    """March the product-integrated Volterra recurrence for w(t) = e^{iω_c t}u(t).

    ``P`` and ``Q`` are the hat-weight moments of the running kernel H on the
    intervals [(m−1)dt, mdt], indexed m = 1..n with index 0 unused. The
    discrete update, with D_m = Q_m + P_{m+1},

        w_j·(1 + P_1) = 1 − Q_j·w_0 − Σ_{k=1}^{j−1} D_{j−k}·w_k,

    is the exactly time-integrated equation with piecewise-linear w, so the
    implicit weight P_1 of the new sample is built in.
    """
    P = np.ascontiguousarray(P, dtype=np.complex128)
    Q = np.ascontiguousarray(Q, dtype=np.complex128)
    n = len(P) - 1
    w = np.empty(n + 1, dtype=np.complex128)
    w[0] = 1.0
    d = np.zeros(n + 1, dtype=np.complex128)
    if n > 1:
        d[1:n] = Q[1:n] + P[2 : n + 1]
    drev = d[::-1].copy()  # drev[i] = d[n-i]: memory sums become contiguous dots
    denom = 1.0 + P[1]
    for j in range(1, n + 1):
        acc = np.dot(drev[n - j + 1 : n], w[1:j])
        w[j] = (1.0 - Q[j] * w[0] - acc) / denom
    return w


def v_accumulate(u, gt, gt_neg, dt):
    """Trapezoidal double-sum v(t_j) over the growing square [0,t_j]², complex.

    ``gt`` supplies g̃ at non-negative lags and ``gt_neg`` the values used for
    negative lags (conj(gt) under the Hermiticity convention; kept separate so
    symmetry violations surface in the imaginary part instead of cancelling).
    Returns the complex accumulation; the caller checks and discards Im.

    Each step adds row j and column j of the weighted matrix
    u_k·u*_l·G(k,l), G(k,l) = gt[l−k] (l ≥ k) else gt_neg[k−l], then applies
    the trapezoid edge corrections in closed form — O(j) work per step.
    """
    u = np.ascontiguousarray(u, dtype=np.complex128)
    gt = np.ascontiguousarray(gt, dtype=np.complex128)
    gt_neg = np.ascontiguousarray(gt_neg, dtype=np.complex128)
    n = len(u) - 1
    uc = np.conj(u)
    gtrev = gt[::-1].copy()
    gnrev = gt_neg[::-1].copy()
    out = np.zeros(n + 1, dtype=np.complex128)
    g0n = gt_neg[0]
    S = u[0] * uc[0] * g0n
    A = 0.0 + 0.0j  # Σ_{l≥1} u*_l·gt[l]   (row-0 tail)
    Bn = 0.0 + 0.0j  # Σ_{k≥1} u_k·gt_neg[k] (col-0 tail)
    dt2 = dt * dt
    for j in range(1, n + 1):
        Uc = np.dot(u[0:j], gtrev[n - j : n])  # Σ_{k<j} u_k·gt[j−k]
        L = np.dot(uc[0:j], gnrev[n - j : n])  # Σ_{l<j} u*_l·gt_neg[j−l]
        S = S + u[j] * L + uc[j] * Uc + (u[j] * uc[j]) * g0n
        A = A + uc[j] * gt[j]
        Bn = Bn + u[j] * gt_neg[j]
        r0 = u[0] * (uc[0] * g0n + A)
        c0 = uc[0] * (u[0] * g0n + Bn)
        rj = u[j] * (L + uc[j] * g0n)
        cj = uc[j] * (Uc + u[j] * g0n)
        corner = (
            (u[0] * uc[0] + u[j] * uc[j]) * g0n
            + u[0] * uc[j] * gt[j]
            + u[j] * uc[0] * gt_neg[j]
        )
        out[j] = dt2 * (S - 0.5 * (r0 + c0 + rj + cj) + 0.25 * corner)
    return out
