# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel-evaluation core: pairwise values, cross vectors, Gram matrices.

Mirrors the API of ``okreg._pykern``; one of the two is selected at import
time by ``okreg.backend``.
"""

from libc.math cimport cosh, exp, fabs, sinh

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF SOB01 = 1
DEF FERMI = 2
DEF SOBR = 3
DEF TRIANGULAR = 4
DEF CONSTANT = 5
DEF ZERO = 6

cdef double SINH1 = sinh(1.0)


cdef inline double _k1(int code, double param, double s, double t) nogil:
    cdef double a, b
    if code == SOB01:
        a = s if s < t else t
        b = (1.0 - s) if s > t else (1.0 - t)
        return cosh(a) * cosh(b) / SINH1
    elif code == FERMI:
        a = s if s < t else t
        b = (1.0 - s) if s > t else (1.0 - t)
        return 0.5 * a * a + 0.5 * b * b + 5.0 / 6.0
    elif code == SOBR:
        return 0.5 * exp(-fabs(s - t))
    elif code == TRIANGULAR:
        a = 1.0 - fabs(s - t)
        if a <= 0.0:
            return 0.0
        return param * param * a
    elif code == CONSTANT:
        return param
    return 0.0


cdef inline double _kpoint(int code, double param, const double* x, const double* y,
                           Py_ssize_t m) nogil:
    cdef double v = 1.0
    cdef Py_ssize_t d
    for d in range(m):
        v *= _k1(code, param, x[d], y[d])
        if v == 0.0:
            return 0.0
    return v


def pair(int code, double param, double[::1] x, double[::1] y):
    """Kernel value at a single pair of m-vectors."""
    return _kpoint(code, param, &x[0], &y[0], x.shape[0])


def cross(int code, double param, double[::1] x, double[:, ::1] X):
    """Vector of kernel values k(x, X[i]) for every row of X."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t m = X.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _kpoint(code, param, &x[0], &X[i, 0], m)
    return out


def gram(int code, double param, double[:, ::1] X):
    """Gram matrix over the rows of X; upper triangle computed, then mirrored."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t m = X.shape[1]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(i, n):
                o[i, j] = _kpoint(code, param, &X[i, 0], &X[j, 0], m)
                o[j, i] = o[i, j]
    return out
