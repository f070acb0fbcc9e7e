# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 loops: batch evaluation, grid maximisation, adaptive quadrature."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs

from ._gk import XGK, WGK, WG

cnp.import_array()

cdef double _xgk[8]
cdef double _wgk[8]
cdef double _wg[4]
for _i in range(8):
    _xgk[_i] = XGK[_i]
    _wgk[_i] = WGK[_i]
for _i in range(4):
    _wg[_i] = WG[_i]


cdef inline Py_ssize_t _locate(const double[:] breaks, double x) nogil:
    # number of breakpoints <= x (a breakpoint belongs to the right piece)
    cdef Py_ssize_t lo = 0, hi = breaks.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if breaks[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _f(const double[:] breaks, const double[:] slopes, const double[:] icpt, double x) nogil:
    cdef Py_ssize_t k = _locate(breaks, x)
    return slopes[k] * x + icpt[k]


def eval_pwl(const double[:] breaks, const double[:] slopes, const double[:] intercepts, const double[:] xs):
    cdef Py_ssize_t i, n = xs.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for i in range(n):
            o[i] = _f(breaks, slopes, intercepts, xs[i])
    return out


def grid_max_phi(const double[:] breaks, const double[:] slopes, const double[:] intercepts,
                 double a, const double[:] bs):
    """Max of ``f(b) - f(a + b)`` over the grid and the first index attaining it."""
    cdef Py_ssize_t i, best = 0, n = bs.shape[0]
    cdef double v, top
    if n == 0:
        raise ValueError("empty grid")
    with nogil:
        top = _f(breaks, slopes, intercepts, bs[0]) - _f(breaks, slopes, intercepts, a + bs[0])
        for i in range(1, n):
            v = _f(breaks, slopes, intercepts, bs[i]) - _f(breaks, slopes, intercepts, a + bs[i])
            if v > top:
                top = v
                best = i
    return top, best


cdef void _gk15(double m, double b, double lo, double hi, double* res, double* err) nogil:
    cdef double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo)
    cdef double fc = exp(m * c + b)
    cdef double rk = fc * _wgk[7], rg = fc * _wg[3]
    cdef double f1, f2
    cdef int j
    for j in range(7):
        f1 = exp(m * (c - h * _xgk[j]) + b)
        f2 = exp(m * (c + h * _xgk[j]) + b)
        rk += _wgk[j] * (f1 + f2)
        if j % 2 == 1:
            rg += _wg[j // 2] * (f1 + f2)
    res[0] = rk * h
    err[0] = fabs((rk - rg) * h)


def gk_quad_exp(double m, double b, double x1, double x2, double rtol=1e-13, int max_intervals=4096):
    """Adaptive G7-K15 integral of ``exp(m x + b)`` over a finite ``[x1, x2]``.

    Returns ``(value, error_estimate)``; the worst interval is bisected until
    the summed error falls below ``rtol * |value|``.
    """
    if not (x2 >= x1):
        raise ValueError("need x1 <= x2")
    los = np.empty(max_intervals, dtype=np.float64)
    his = np.empty(max_intervals, dtype=np.float64)
    vals = np.empty(max_intervals, dtype=np.float64)
    errs = np.empty(max_intervals, dtype=np.float64)
    cdef double[:] L = los, H = his, V = vals, E = errs
    cdef Py_ssize_t count = 1, i, worst
    cdef double total, etotal, mid, r1, e1, r2, e2
    with nogil:
        L[0] = x1
        H[0] = x2
        _gk15(m, b, x1, x2, &V[0], &E[0])
        while True:
            total = 0.0
            etotal = 0.0
            worst = 0
            for i in range(count):
                total += V[i]
                etotal += E[i]
                if E[i] > E[worst]:
                    worst = i
            if etotal <= rtol * fabs(total) or count >= max_intervals:
                break
            mid = 0.5 * (L[worst] + H[worst])
            _gk15(m, b, L[worst], mid, &r1, &e1)
            _gk15(m, b, mid, H[worst], &r2, &e2)
            L[count] = mid
            H[count] = H[worst]
            V[count] = r2
            E[count] = e2
            H[worst] = mid
            V[worst] = r1
            E[worst] = e1
            count += 1
    return total, etotal
