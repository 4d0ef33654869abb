# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense Abel partial sums (Neumaier-compensated)."""

cimport cython
from libc.math cimport fabs


cdef inline void _neumaier(double x, double *s, double *c) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def block_abel_sum(const long long[:] bounds, int initial, double alpha, long long n_terms):
    """Sum of u_n * alpha**n for n < n_terms, u given by sorted toggle positions."""
    cdef double s = 0.0, c = 0.0, p = 1.0
    cdef long long n = 0, nb = bounds.shape[0], j = 0, stop
    cdef int value = initial
    with nogil:
        while n < n_terms:
            stop = bounds[j] if j < nb else n_terms
            if stop > n_terms:
                stop = n_terms
            if value:
                while n < stop:
                    _neumaier(p, &s, &c)
                    p *= alpha
                    n += 1
            else:
                while n < stop:
                    p *= alpha
                    n += 1
            value = 1 - value
            j += 1
    return s + c


def dense_abel_sum(const double[:] values, double alpha):
    """Sum of values[n] * alpha**n."""
    cdef double s = 0.0, c = 0.0, p = 1.0
    cdef Py_ssize_t n, m = values.shape[0]
    with nogil:
        for n in range(m):
            _neumaier(values[n] * p, &s, &c)
            p *= alpha
    return s + c
