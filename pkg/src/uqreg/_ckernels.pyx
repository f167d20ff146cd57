# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops; same signatures as _pykernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma, INFINITY

cnp.import_array()

cdef double LOG_2PI = log(2.0 * 3.141592653589793)


def log_mean_density(int code, y, params):
    """log((1/K) sum_k p(y_i | theta_k)) for every outcome y_i."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0], k = pv.shape[0], i, j
    out = np.empty(n)
    cdef double[::1] ov = out
    # per-theta constants: a_j + b_j * f(y) form
    cdef double[::1] a = np.empty(k)
    cdef double[::1] b = np.empty(k)
    cdef double[::1] c = np.empty(k)
    cdef double[::1] buf = np.empty(k)
    cdef double m, s, t, yi, d, logk = log(<double>k)
    for j in range(k):
        if code == 0:
            a[j] = -0.5 * (LOG_2PI + log(pv[j, 1]))
            b[j] = 0.5 / pv[j, 1]
            c[j] = pv[j, 0]
        else:
            a[j] = log(pv[j, 0])
            b[j] = pv[j, 0]
    with nogil:
        for i in range(n):
            yi = yv[i]
            if code == 1 and yi < 0:
                ov[i] = -INFINITY
                continue
            m = -INFINITY
            for j in range(k):
                if code == 0:
                    d = yi - c[j]
                    t = a[j] - b[j] * d * d
                elif code == 1:
                    t = a[j] - b[j] * yi
                else:
                    t = yi * a[j] - b[j]
                buf[j] = t
                if t > m:
                    m = t
            if m == -INFINITY:
                ov[i] = -INFINITY
                continue
            s = 0.0
            for j in range(k):
                s += exp(buf[j] - m)
            # grouped so that K equal terms give exactly m
            ov[i] = m + (log(s) - logk)
            if code == 2:
                ov[i] -= lgamma(yi + 1.0)
    return out


def log_density_pairs(int code, y, params):
    """log p(y_i | theta_i), row by row."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0], i
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double d
    with nogil:
        for i in range(n):
            if code == 0:
                d = yv[i] - pv[i, 0]
                # same rounding as log_mean_density
                ov[i] = -0.5 * (LOG_2PI + log(pv[i, 1])) - (0.5 / pv[i, 1]) * d * d
            elif code == 1:
                ov[i] = log(pv[i, 0]) - pv[i, 0] * yv[i] if yv[i] >= 0 else -INFINITY
            else:
                ov[i] = yv[i] * log(pv[i, 0]) - pv[i, 0] - lgamma(yv[i] + 1.0)
    return out
