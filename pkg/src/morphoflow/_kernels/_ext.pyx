# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernel operations (hot loops of the velocity machinery).

Same contracts as ``numpy_backend``: Gram assembly, kernel-field evaluation
with Jacobians, and the gradient tensor feeding elastic/yank assembly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()


cdef inline double _kappa(double t) noexcept nogil:
    return (1.0 + t + 2.0 * t * t / 15.0 + t * t * t / 15.0) * exp(-t)


cdef inline double _dkappa_over_t(double t) noexcept nogil:
    # kappa'(t)/t = -exp(-t) (11 - t + t^2)/15, smooth through t = 0
    return -exp(-t) * (11.0 - t + t * t) / 15.0


def gram(points, double sigma):
    """Kernel Gram matrix G[i, j] = kappa(|x_i - x_j| / sigma)."""
    cdef double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] g = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, v
    with nogil:
        for i in range(n):
            g[i, i] = 1.0
            for j in range(i + 1, n):
                dx = x[i, 0] - x[j, 0]
                dy = x[i, 1] - x[j, 1]
                v = _kappa(sqrt(dx * dx + dy * dy) / sigma)
                g[i, j] = v
                g[j, i] = v
    return out


def eval_field(points, momenta, queries, double sigma):
    """Evaluate v(q) = sum_i kappa(|q - x_i|/sigma) a_i and its Jacobian."""
    cdef double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(momenta, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], m = q.shape[0]
    values = np.zeros((m, 2), dtype=np.float64)
    jac = np.zeros((m, 2, 2), dtype=np.float64)
    cdef double[:, ::1] val = values
    cdef double[:, :, ::1] jc = jac
    cdef Py_ssize_t k, i
    cdef double dx, dy, t, kap, gx, gy, h
    cdef double inv_s = 1.0 / sigma, inv_s2 = 1.0 / (sigma * sigma)
    with nogil:
        for k in range(m):
            for i in range(n):
                dx = q[k, 0] - x[i, 0]
                dy = q[k, 1] - x[i, 1]
                t = sqrt(dx * dx + dy * dy) * inv_s
                kap = _kappa(t)
                h = _dkappa_over_t(t) * inv_s2
                gx = dx * h
                gy = dy * h
                val[k, 0] += kap * a[i, 0]
                val[k, 1] += kap * a[i, 1]
                jc[k, 0, 0] += a[i, 0] * gx
                jc[k, 0, 1] += a[i, 0] * gy
                jc[k, 1, 0] += a[i, 1] * gx
                jc[k, 1, 1] += a[i, 1] * gy
    return values, jac


def grad_tensor(points, queries, double sigma):
    """g[d, q, i] = d-component of grad_q kappa(|q - x_i| / sigma).

    Shape (2, m, n); each component plane is C-contiguous so it can feed
    BLAS products directly.
    """
    cdef double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], m = q.shape[0]
    out = np.empty((2, m, n), dtype=np.float64)
    cdef double[:, :, ::1] g = out
    cdef Py_ssize_t k, i
    cdef double dx, dy, t, h
    cdef double inv_s = 1.0 / sigma, inv_s2 = 1.0 / (sigma * sigma)
    with nogil:
        for k in range(m):
            for i in range(n):
                dx = q[k, 0] - x[i, 0]
                dy = q[k, 1] - x[i, 1]
                t = sqrt(dx * dx + dy * dy) * inv_s
                h = _dkappa_over_t(t) * inv_s2
                g[0, k, i] = dx * h
                g[1, k, i] = dy * h
    return out
