# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics mirror starval._pykernels exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def ladder_argmax(const double[:, ::1] table, Py_ssize_t first_lo=0, Py_ssize_t first_hi=-1):
    """Enumerate every level vector and return (best, levels, count).

    ``table[i, k]`` is the contribution of node ``i`` at level ``k``; the
    score of a level vector is the left-to-right sum of its contributions.
    Node 0 is restricted to levels ``[first_lo, first_hi)``. Enumeration is
    odometer order with the last node fastest; ties keep the first hit.
    """
    cdef Py_ssize_t n = table.shape[0]
    cdef Py_ssize_t m = table.shape[1]
    if first_hi < 0:
        first_hi = m
    cdef cnp.ndarray[cnp.intp_t, ndim=1] lev = np.zeros(n, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] best_lev = np.zeros(n, dtype=np.intp)
    cdef cnp.ndarray[double, ndim=1] prefix = np.zeros(n + 1, dtype=np.float64)
    cdef Py_ssize_t[::1] lv = lev
    cdef Py_ssize_t[::1] bl = best_lev
    cdef double[::1] pf = prefix
    cdef double best = -INFINITY
    cdef double s
    cdef long long count = 0
    cdef Py_ssize_t i, j, k, last = n - 1
    cdef Py_ssize_t k_lo = 0, k_hi = m
    if first_lo >= first_hi or n == 0:
        return best, best_lev, 0
    if last == 0:
        k_lo = first_lo
        k_hi = first_hi
    with nogil:
        lv[0] = first_lo
        pf[0] = 0.0
        for i in range(n):
            pf[i + 1] = pf[i] + table[i, lv[i]]
        while True:
            # sweep the last node directly
            for k in range(k_lo, k_hi):
                s = pf[last] + table[last, k]
                count += 1
                if s > best:
                    best = s
                    for i in range(last):
                        bl[i] = lv[i]
                    bl[last] = k
            # odometer carry on nodes 0..last-1
            j = last - 1
            while j >= 0:
                lv[j] += 1
                if (j == 0 and lv[j] < first_hi) or (j > 0 and lv[j] < m):
                    break
                lv[j] = 0 if j > 0 else first_hi
                j -= 1
            if j < 0 or lv[0] >= first_hi:
                break
            for i in range(j, last):
                pf[i + 1] = pf[i] + table[i, lv[i]]
    return best, best_lev, count


def running_max_pl(const double[::1] x, const double[::1] y):
    """Running maximum of the piecewise-linear interpolant through (x, y).

    Returns new abscissae/ordinates; a node is inserted wherever a segment
    climbs back through the current record level.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[double, ndim=1] xo = np.empty(2 * n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] yo = np.empty(2 * n, dtype=np.float64)
    cdef double[::1] xv = xo
    cdef double[::1] yv = yo
    cdef Py_ssize_t i, c = 0
    cdef double rec, xc
    if n == 0:
        return xo[:0], yo[:0]
    with nogil:
        rec = y[0]
        xv[0] = x[0]
        yv[0] = rec
        c = 1
        for i in range(1, n):
            if y[i] > rec:
                if y[i - 1] < rec:
                    xc = x[i - 1] + (rec - y[i - 1]) / (y[i] - y[i - 1]) * (x[i] - x[i - 1])
                    if xc > xv[c - 1] and xc < x[i]:
                        xv[c] = xc
                        yv[c] = rec
                        c += 1
                rec = y[i]
            xv[c] = x[i]
            yv[c] = rec
            c += 1
    return xo[:c].copy(), yo[:c].copy()


def min_chordal_distance(const double[:, ::1] points, const double[:, ::1] targets):
    """For each row of ``points``, the Euclidean distance to the nearest target."""
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t ntg = targets.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(npts, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t p, q, d
    cdef double best, acc, diff
    with nogil:
        for p in range(npts):
            best = INFINITY
            for q in range(ntg):
                acc = 0.0
                for d in range(dim):
                    diff = points[p, d] - targets[q, d]
                    acc = acc + diff * diff
                if acc < best:
                    best = acc
            ov[p] = sqrt(best)
    return out
