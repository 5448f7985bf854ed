# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled DES energy/force and centered-L2 discrepancy kernels.

Signatures mirror :mod:`despso._kernels_py` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt, INFINITY

cnp.import_array()


cdef inline double _pair_term(double delta, double q) nogil:
    cdef double om = 1.0 - delta
    cdef double s = pow(om, q) + pow(delta, q)
    return delta * delta * om * om / pow(s, 2.0 / q)


cdef inline double _pair_grad(double delta, double q) nogil:
    cdef double om = 1.0 - delta
    cdef double s = pow(om, q) + pow(delta, q)
    return delta * om * (pow(om, q + 1.0) - pow(delta, q + 1.0)) / pow(s, 1.0 + 2.0 / q)


cdef double _dmin(double[:, ::1] d) nogil:
    cdef Py_ssize_t n = d.shape[0], i, j
    cdef double best = INFINITY
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] < best:
                best = d[i, j]
    return best


def pair_distances(const double[:, ::1] x, double q):
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] d = out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                for k in range(dim):
                    acc = acc + _pair_term(fabs(x[i, k] - x[j, k]), q)
                d[i, j] = sqrt(acc / 2.0)
                d[j, i] = d[i, j]
    return out


def energy(const double[:, ::1] x, double q, double p):
    """Return ``(U, dmin)``; ``U`` is ``inf`` when two points coincide."""
    cdef Py_ssize_t n = x.shape[0]
    cdef double[:, ::1] d = pair_distances(x, q)
    cdef double dmin = INFINITY, s = 0.0
    cdef Py_ssize_t i, j
    dmin = _dmin(d)
    if dmin <= 0.0:
        return INFINITY, dmin
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                s = s + pow(dmin / d[i, j], p)
    return pow(s, 1.0 / p) / dmin, dmin


cdef inline double _ipow(double x, double q) nogil:
    if q == 1.0:
        return x
    if q == 2.0:
        return x * x
    return pow(x, q)


def energy_forces(const double[:, ::1] x, double q, double p, double big_g):
    """Return ``(U, F, dmin)`` for an (N, D) point array.

    Powers are taken relative to the closest pair so large ``p`` cannot
    overflow.  ``F`` is zero-filled when two points coincide.
    """
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    cdef Py_ssize_t i, j, k, m
    forces = np.zeros((n, dim), dtype=np.float64)
    dist_arr = np.empty(n * (n - 1) // 2, dtype=np.float64)
    grad_arr = np.empty((n * (n - 1) // 2, dim), dtype=np.float64)
    cdef double[:, ::1] f = forces
    cdef double[::1] d = dist_arr
    cdef double[:, ::1] g = grad_arr
    cdef double dmin = INFINITY, s = 0.0, pref, w, diff, delta, om, oq, dq, sq, s2q, acc, u
    with nogil:
        # pass 1: distances and per-dimension pair gradients, i < j
        m = 0
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                for k in range(dim):
                    diff = x[i, k] - x[j, k]
                    delta = fabs(diff)
                    om = 1.0 - delta
                    oq = _ipow(om, q)
                    dq = _ipow(delta, q)
                    sq = oq + dq
                    s2q = _ipow(sq, 2.0 / q)
                    acc = acc + delta * delta * om * om / s2q
                    if diff == 0.0:
                        g[m, k] = 0.0
                    else:
                        g[m, k] = delta * om * (om * oq - delta * dq) / (sq * s2q)
                        if diff < 0.0:
                            g[m, k] = -g[m, k]
                d[m] = sqrt(acc / 2.0)
                if d[m] < dmin:
                    dmin = d[m]
                m = m + 1
    if dmin <= 0.0:
        return INFINITY, forces, dmin
    with nogil:
        # pass 2: scaled p-sum, then forces accumulated in pair order
        for m in range(n * (n - 1) // 2):
            s = s + _ipow(dmin / d[m], p)
        pref = -big_g * pow(s, (1.0 - p) / p) / dmin
        m = 0
        for i in range(n):
            for j in range(i + 1, n):
                w = _ipow(dmin / d[m], p) / (d[m] * d[m])
                for k in range(dim):
                    f[i, k] = f[i, k] + w * g[m, k]
                    f[j, k] = f[j, k] - w * g[m, k]
                m = m + 1
        for i in range(n):
            for k in range(dim):
                f[i, k] = pref * f[i, k]
        u = big_g * pow(s, 1.0 / p) / dmin
    return u, forces, dmin


def centered_l2_sq(const double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double t1 = pow(13.0 / 12.0, <double>dim), t2 = 0.0, t3 = 0.0
    cdef double prod, zi, zj
    with nogil:
        for i in range(n):
            prod = 1.0
            for k in range(dim):
                zi = fabs(x[i, k] - 0.5)
                prod = prod * (1.0 + 0.5 * zi - 0.5 * zi * zi)
            t2 = t2 + prod
        for i in range(n):
            for j in range(n):
                prod = 1.0
                for k in range(dim):
                    zi = fabs(x[i, k] - 0.5)
                    zj = fabs(x[j, k] - 0.5)
                    prod = prod * (1.0 + 0.5 * zi + 0.5 * zj - 0.5 * fabs(x[i, k] - x[j, k]))
                t3 = t3 + prod
    return t1 - 2.0 * t2 / n + t3 / (<double>n * n)
