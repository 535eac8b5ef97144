"""Pure numpy implementations of the hot kernels.

Mirrors the compiled extension ``monodeg._kernels`` exactly; the backend
module picks whichever is available.  All functions accept float64 arrays
and return fresh arrays.
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def lp_norm(x, p):
    """l^p norm of a coefficient vector, p in (1, inf)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    if p == 2.0:
        return float(np.sqrt(np.dot(x, x)))
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def duality_map(x, p):
    """Normalized duality map of l^p at x.

    Component k is ||x||_p^(2-p) * sign(x_k) * |x_k|^(p-1); the map sends 0
    to 0, satisfies <Jx, x> = ||x||^2 and ||Jx||_q = ||x||_p with q the
    conjugate exponent.  For p = 2 it is the identity.
    """
    x = np.asarray(x, dtype=np.float64)
    if p == 2.0:
        return x.copy()
    nrm = lp_norm(x, p)
    if nrm == 0.0:
        return np.zeros_like(x)
    return nrm ** (2.0 - p) * np.sign(x) * np.abs(x) ** (p - 1.0)


def embedded_duality(c, w, p):
    """Coefficient image of the duality map through a diagonal embedding.

    For section coefficients c and weights w this is w * J(w * c, p); with
    p = 2 it reduces to w**2 * c.
    """
    c = np.asarray(c, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if p == 2.0:
        return w * w * c
    return w * duality_map(w * c, p)


def lp_norm_batch(C, p):
    """Row-wise l^p norms of a (m, n) array."""
    C = np.asarray(C, dtype=np.float64)
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", C, C))
    return np.sum(np.abs(C) ** p, axis=1) ** (1.0 / p)


def embedded_duality_batch(C, w, p):
    """Row-wise ``embedded_duality`` of a (m, n) array."""
    C = np.asarray(C, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if p == 2.0:
        return (w * w)[None, :] * C
    Z = C * w[None, :]
    nrm = lp_norm_batch(Z, p)
    out = np.sign(Z) * np.abs(Z) ** (p - 1.0) * w[None, :]
    scale = np.zeros_like(nrm)
    pos = nrm > 0.0
    scale[pos] = nrm[pos] ** (2.0 - p)
    return out * scale[:, None]


def winding_total(gx, gy):
    """Accumulated angle around a closed loop of planar values.

    ``gx``/``gy`` are the map values at ordered boundary samples (the first
    point is not repeated).  Returns ``(total_angle, max_step, min_norm)``
    where ``total_angle`` sums the wrapped angle increments including the
    closing segment, ``max_step`` is the largest absolute increment and
    ``min_norm`` the smallest sample magnitude.
    """
    gx = np.asarray(gx, dtype=np.float64)
    gy = np.asarray(gy, dtype=np.float64)
    ang = np.arctan2(gy, gx)
    inc = np.diff(ang, append=ang[:1])
    inc = (inc + np.pi) % (2.0 * np.pi) - np.pi
    norms = np.hypot(gx, gy)
    return float(np.sum(inc)), float(np.max(np.abs(inc))), float(np.min(norms))
