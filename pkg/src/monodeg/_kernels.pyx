# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Same contract as ``monodeg._kernels_py``; the loops here avoid the numpy
call overhead that dominates when vectors are short (sections rarely
exceed a few dozen coefficients).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, fabs, fmod, hypot, pow, sqrt, M_PI

cnp.import_array()

COMPILED = True


cdef inline double _sgn(double v) nogil:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


cdef double _lp_norm(const double[::1] x, double p) nogil:
    cdef Py_ssize_t k, n = x.shape[0]
    cdef double acc = 0.0
    if p == 2.0:
        for k in range(n):
            acc += x[k] * x[k]
        return sqrt(acc)
    for k in range(n):
        acc += pow(fabs(x[k]), p)
    return pow(acc, 1.0 / p)


def lp_norm(x, double p):
    """l^p norm of a coefficient vector, p in (1, inf)."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] == 0:
        return 0.0
    return _lp_norm(xv, p)


def duality_map(x, double p):
    """Normalized duality map of l^p at x.

    Component k is ||x||_p^(2-p) * sign(x_k) * |x_k|^(p-1); the map sends 0
    to 0, satisfies <Jx, x> = ||x||^2 and ||Jx||_q = ||x||_p with q the
    conjugate exponent.  For p = 2 it is the identity.
    """
    cdef cnp.ndarray[double, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xa)
    cdef Py_ssize_t k, n = xa.shape[0]
    cdef double nrm, scale
    if p == 2.0:
        return xa.copy()
    nrm = _lp_norm(xa, p)
    if nrm == 0.0:
        out[:] = 0.0
        return out
    scale = pow(nrm, 2.0 - p)
    for k in range(n):
        out[k] = scale * _sgn(xa[k]) * pow(fabs(xa[k]), p - 1.0)
    return out


def embedded_duality(c, w, double p):
    """Coefficient image of the duality map through a diagonal embedding.

    For section coefficients c and weights w this is w * J(w * c, p); with
    p = 2 it reduces to w**2 * c.
    """
    cdef cnp.ndarray[double, ndim=1] ca = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(ca)
    cdef Py_ssize_t k, n = ca.shape[0]
    cdef double acc = 0.0, z, scale
    if p == 2.0:
        for k in range(n):
            out[k] = wa[k] * wa[k] * ca[k]
        return out
    for k in range(n):
        acc += pow(fabs(wa[k] * ca[k]), p)
    if acc == 0.0:
        out[:] = 0.0
        return out
    scale = pow(pow(acc, 1.0 / p), 2.0 - p)
    for k in range(n):
        z = wa[k] * ca[k]
        out[k] = wa[k] * scale * _sgn(z) * pow(fabs(z), p - 1.0)
    return out


def lp_norm_batch(C, double p):
    """Row-wise l^p norms of a (m, n) array."""
    cdef cnp.ndarray[double, ndim=2] Ca = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t i, k, m = Ca.shape[0], n = Ca.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double acc
    for i in range(m):
        acc = 0.0
        if p == 2.0:
            for k in range(n):
                acc += Ca[i, k] * Ca[i, k]
            out[i] = sqrt(acc)
        else:
            for k in range(n):
                acc += pow(fabs(Ca[i, k]), p)
            out[i] = pow(acc, 1.0 / p)
    return out


def embedded_duality_batch(C, w, double p):
    """Row-wise ``embedded_duality`` of a (m, n) array."""
    cdef cnp.ndarray[double, ndim=2] Ca = np.ascontiguousarray(C, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t i, k, m = Ca.shape[0], n = Ca.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((m, n), dtype=np.float64)
    cdef double acc, z, scale
    for i in range(m):
        if p == 2.0:
            for k in range(n):
                out[i, k] = wa[k] * wa[k] * Ca[i, k]
            continue
        acc = 0.0
        for k in range(n):
            acc += pow(fabs(wa[k] * Ca[i, k]), p)
        if acc == 0.0:
            for k in range(n):
                out[i, k] = 0.0
            continue
        scale = pow(pow(acc, 1.0 / p), 2.0 - p)
        for k in range(n):
            z = wa[k] * Ca[i, k]
            out[i, k] = wa[k] * scale * _sgn(z) * pow(fabs(z), p - 1.0)
    return out


def winding_total(gx, gy):
    """Accumulated angle around a closed loop of planar values.

    ``gx``/``gy`` are the map values at ordered boundary samples (the first
    point is not repeated).  Returns ``(total_angle, max_step, min_norm)``
    where ``total_angle`` sums the wrapped angle increments including the
    closing segment, ``max_step`` is the largest absolute increment and
    ``min_norm`` the smallest sample magnitude.
    """
    cdef double[::1] xv = np.ascontiguousarray(gx, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t i, m = xv.shape[0]
    cdef double total = 0.0, max_step = 0.0, min_norm = 1e300
    cdef double prev, cur, inc, nrm
    cdef double first = atan2(yv[0], xv[0])
    prev = first
    for i in range(m):
        nrm = hypot(xv[i], yv[i])
        if nrm < min_norm:
            min_norm = nrm
        if i + 1 < m:
            cur = atan2(yv[i + 1], xv[i + 1])
        else:
            cur = first
        # wrap to [-pi, pi) with python modulo semantics, matching the
        # numpy fallback bit for bit
        inc = fmod(cur - prev + M_PI, 2.0 * M_PI)
        if inc < 0.0:
            inc += 2.0 * M_PI
        inc -= M_PI
        total += inc
        if fabs(inc) > max_step:
            max_step = fabs(inc)
        prev = cur
    return total, max_step, min_norm
