# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_fallback`` for the reference numpy versions."""

from libc.math cimport asin, fabs, M_PI

import numpy as np


def grid_scan(const double[::1] eta, const double[::1] gamma, double tol, int branch):
    """Best feasible family point on the eta x gamma grid.

    branch: 0 = all points, 1 = nonlocal (gamma > 3 eta), 2 = local (gamma <= 3 eta).
    Ties keep the first point in (eta, gamma) lexicographic order.
    Returns (i, j, gain, n_feasible); i = j = -1 if nothing is feasible.
    """
    cdef Py_ssize_t ne = eta.shape[0], ng = gamma.shape[0]
    cdef Py_ssize_t i, j, bi = -1, bj = -1
    cdef long long n_feasible = 0
    cdef double e, g, a0, a1, s_main, s_other, val, best = 0.0
    cdef double limit = M_PI + tol
    cdef double[::1] agamma = np.empty(ng)
    cdef double[::1] ggain = np.empty(ng)

    for j in range(ng):
        g = gamma[j]
        agamma[j] = asin(1.0 - 2.0 * g)
        ggain[j] = 2.0 * g - 4.0 * g * g

    with nogil:
        for i in range(ne):
            e = eta[i]
            a0 = asin(1.0 - 2.0 * e)
            for j in range(ng):
                g = gamma[j]
                if branch == 1 and not (g > 3.0 * e):
                    continue
                if branch == 2 and not (g <= 3.0 * e):
                    continue
                a1 = agamma[j]
                s_main = fabs(3.0 * a0 - a1)
                s_other = fabs(a0 + a1)
                if s_main > limit or s_other > limit:
                    continue
                n_feasible += 1
                val = ggain[j] - 6.0 * e + 12.0 * e * e
                if bi < 0 or val > best:
                    best = val
                    bi = i
                    bj = j
    return bi, bj, best, n_feasible


def batch_chsh(const double[:, :, ::1] tables):
    """CHSH value of each 4x4 table in a stack."""
    cdef Py_ssize_t n = tables.shape[0], k, s
    cdef double c[4]
    cdef double total, term, best
    out = np.empty(n)
    cdef double[::1] res = out
    with nogil:
        for k in range(n):
            for s in range(4):
                c[s] = tables[k, s, 0] + tables[k, s, 3] - tables[k, s, 1] - tables[k, s, 2]
            total = c[0] + c[1] + c[2] + c[3]
            best = 0.0
            for s in range(4):
                term = fabs(total - 2.0 * c[3 - s])
                if term > best:
                    best = term
            res[k] = best
    return out
