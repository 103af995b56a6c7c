# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels for the multiplicative-update inner loops.

Each function has a NumPy twin in ``cardiosep.kernels.fallback`` with the
same signature and semantics; ``cardiosep.kernels`` picks one pair at import
time. Keep the two implementations in lockstep.

The exponent fast paths (1, 2, -1, +/-0.5) matter: they cover the common
divergence orders and avoid a libm pow call per matrix entry.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, sqrt

cnp.import_array()

cdef inline double _fpow(double x, double e) noexcept nogil:
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 0.5:
        return sqrt(x)
    if e == -1.0:
        return 1.0 / x
    if e == -0.5:
        return 1.0 / sqrt(x)
    return pow(x, e)


def ratio_pow(double[:, ::1] y, double[:, ::1] yhat, double alpha, double floor):
    """Elementwise (y / max(yhat, floor)) ** alpha."""
    cdef Py_ssize_t m = y.shape[0], n = y.shape[1], i, j
    cdef double d
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                d = yhat[i, j]
                if d < floor:
                    d = floor
                o[i, j] = _fpow(y[i, j] / d, alpha)
    return out


def mul_pow(double[:, ::1] base, double[:, ::1] q, double exponent, double floor):
    """Elementwise max(base * q ** exponent, floor)."""
    cdef Py_ssize_t m = base.shape[0], n = base.shape[1], i, j
    cdef double v
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                v = base[i, j] * _fpow(q[i, j], exponent)
                if v < floor:
                    v = floor
                o[i, j] = v
    return out


def alpha_div_sum(double[:, ::1] y, double[:, ::1] yhat, double alpha, double floor):
    """Sum of y**a * yhat**(1-a) - a*y + (a-1)*yhat over all entries, / (a*(a-1)).

    Both inputs are floored before evaluation. Valid away from the a=0 and
    a=1 singularities; the caller handles those limits.
    """
    cdef Py_ssize_t m = y.shape[0], n = y.shape[1], i, j
    cdef double a = alpha, b = 1.0 - alpha, yv, zv, cross, total = 0.0
    cdef double acc0, acc1
    with nogil:
        for i in range(m):
            acc0 = 0.0
            acc1 = 0.0
            for j in range(n):
                yv = y[i, j]
                if yv < floor:
                    yv = floor
                zv = yhat[i, j]
                if zv < floor:
                    zv = floor
                if a == 0.5:
                    cross = sqrt(yv * zv)
                elif a == 2.0:
                    cross = yv * yv / zv
                elif a == -1.0:
                    cross = zv * zv / yv
                else:
                    cross = pow(yv, a) * pow(zv, b)
                if j & 1:
                    acc1 += cross - a * yv + (a - 1.0) * zv
                else:
                    acc0 += cross - a * yv + (a - 1.0) * zv
            total += acc0 + acc1
    return total / (a * (a - 1.0))


def acf_all_lags(double[::1] x):
    """Biased autocorrelation (1/T) * sum_t x[t] * x[t+p] for p = 0..T.

    The lag-T entry is an empty sum and therefore 0. No mean removal.
    Four accumulators break the dependency chain of the inner reduction.
    """
    cdef Py_ssize_t t_len = x.shape[0], p, t, span, tail
    cdef double s0, s1, s2, s3
    out = np.zeros(t_len + 1, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for p in range(t_len):
            span = t_len - p
            tail = span & 3
            s0 = s1 = s2 = s3 = 0.0
            for t in range(0, span - tail, 4):
                s0 += x[t] * x[t + p]
                s1 += x[t + 1] * x[t + 1 + p]
                s2 += x[t + 2] * x[t + 2 + p]
                s3 += x[t + 3] * x[t + 3 + p]
            for t in range(span - tail, span):
                s0 += x[t] * x[t + p]
            o[p] = (s0 + s1 + s2 + s3) / t_len
    return out
