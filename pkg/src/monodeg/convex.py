"""Closed convex sets used as operator values, with exact set calculus.

A value is one of five variants: a point, an axis-aligned box, a Euclidean
ball, a segment, or the convex hull of finitely many vertices.  Support
functions, projections and min-norm points are closed forms except for
the polytope, which uses Wolfe's min-norm-point algorithm (finitely
terminating on exact arithmetic, run here with a small tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DimensionMismatch

_MNP_TOL = 1e-13


def _arr(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class Point:
    at: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "at", tuple(float(v) for v in _arr(self.at)))


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo, hi = _arr(self.lo), _arr(self.hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds of different lengths")
        if np.any(hi < lo):
            raise BadParams("box upper bound below lower bound")
        object.__setattr__(self, "lo", tuple(map(float, lo)))
        object.__setattr__(self, "hi", tuple(map(float, hi)))


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise BadParams("ball radius must be non-negative")
        object.__setattr__(self, "center", tuple(map(float, _arr(self.center))))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class Segment:
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        a, b = _arr(self.a), _arr(self.b)
        if a.shape != b.shape:
            raise DimensionMismatch("segment endpoints of different lengths")
        object.__setattr__(self, "a", tuple(map(float, a)))
        object.__setattr__(self, "b", tuple(map(float, b)))


@dataclass(frozen=True)
class Polytope:
    vertices: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] == 0:
            raise BadParams("polytope needs a non-empty (m, d) vertex array")
        object.__setattr__(
            self, "vertices", tuple(tuple(map(float, row)) for row in V)
        )


ConvexValue = Point | Box | Ball | Segment | Polytope


def dim(v: ConvexValue) -> int:
    if isinstance(v, Point):
        return len(v.at)
    if isinstance(v, Box):
        return len(v.lo)
    if isinstance(v, Ball):
        return len(v.center)
    if isinstance(v, Segment):
        return len(v.a)
    return len(v.vertices[0])


def support(v: ConvexValue, d) -> float:
    """Support function max_{s in v} <s, d> (exact per variant)."""
    d = _arr(d)
    if isinstance(v, Point):
        return float(np.dot(v.at, d))
    if isinstance(v, Box):
        lo, hi = _arr(v.lo), _arr(v.hi)
        return float(np.sum(np.where(d >= 0, hi * d, lo * d)))
    if isinstance(v, Ball):
        return float(np.dot(v.center, d) + v.radius * np.linalg.norm(d))
    if isinstance(v, Segment):
        return float(max(np.dot(v.a, d), np.dot(v.b, d)))
    return float(np.max(np.asarray(v.vertices) @ d))


def _mnp_hull(V: np.ndarray) -> np.ndarray:
    """Min-norm point of conv(rows of V) by Wolfe's algorithm."""
    m = V.shape[0]
    sq = np.einsum("ij,ij->i", V, V)
    scale = max(1.0, float(np.max(sq)))
    idx = [int(np.argmin(sq))]
    alpha = np.array([1.0])
    x = V[idx[0]].astype(float)
    for _ in range(16 * m + 64):
        j = int(np.argmin(V @ x))
        if float(np.dot(x, x) - np.dot(V[j], x)) <= _MNP_TOL * scale:
            break
        if j in idx:
            break
        idx.append(j)
        alpha = np.append(alpha, 0.0)
        while True:
            B = V[idx]
            k = len(idx)
            # affine minimizer over the current corral via the KKT system
            M = np.zeros((k + 1, k + 1))
            M[:k, :k] = B @ B.T
            M[:k, k] = 1.0
            M[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            beta = np.linalg.lstsq(M, rhs, rcond=None)[0][:k]
            if np.all(beta > _MNP_TOL):
                alpha = beta
                break
            neg = beta <= _MNP_TOL
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, alpha / (alpha - beta), np.inf)
            theta = float(np.min(ratios))
            theta = min(max(theta, 0.0), 1.0)
            alpha = (1.0 - theta) * alpha + theta * beta
            keep = alpha > _MNP_TOL
            if not np.any(keep):
                keep[int(np.argmax(alpha))] = True
            idx = [idx[i] for i in range(k) if keep[i]]
            alpha = alpha[keep]
            alpha = alpha / np.sum(alpha)
            if np.all(keep):
                break
        x = alpha @ V[idx]
    return x


def project(v: ConvexValue, q) -> np.ndarray:
    """Euclidean projection of the point q onto the set."""
    q = _arr(q)
    if isinstance(v, Point):
        return _arr(v.at)
    if isinstance(v, Box):
        return np.clip(q, _arr(v.lo), _arr(v.hi))
    if isinstance(v, Ball):
        c = _arr(v.center)
        g = q - c
        nrm = float(np.linalg.norm(g))
        if nrm <= v.radius:
            return q.copy()
        return c + g * (v.radius / nrm)
    if isinstance(v, Segment):
        a, b = _arr(v.a), _arr(v.b)
        ab = b - a
        den = float(np.dot(ab, ab))
        t = 0.0 if den == 0.0 else float(np.clip(np.dot(q - a, ab) / den, 0.0, 1.0))
        return a + t * ab
    V = np.asarray(v.vertices, dtype=float)
    return q + _mnp_hull(V - q)


def distance(v: ConvexValue, q) -> float:
    """Euclidean distance from q to the set."""
    return float(np.linalg.norm(project(v, q) - _arr(q)))


def min_norm_point(v: ConvexValue) -> np.ndarray:
    """The (unique) element of minimal Euclidean norm."""
    return project(v, np.zeros(dim(v)))


def contains(v: ConvexValue, q, tol: float = 1e-12) -> bool:
    return distance(v, q) <= tol


def extreme_points(v: ConvexValue) -> np.ndarray:
    """A finite set of extreme points (box corners are enumerated).

    For a ball this returns axis extremes only, which is a strict subset;
    callers needing exact extent must use ``support``.
    """
    if isinstance(v, Point):
        return _arr(v.at)[None, :]
    if isinstance(v, Segment):
        return np.vstack([v.a, v.b])
    if isinstance(v, Polytope):
        return np.asarray(v.vertices, dtype=float)
    if isinstance(v, Box):
        lo, hi = _arr(v.lo), _arr(v.hi)
        n = lo.shape[0]
        if n > 16:
            raise BadParams("box corner enumeration limited to 16 dimensions")
        out = np.empty((2**n, n))
        for i in range(2**n):
            mask = np.array([(i >> k) & 1 for k in range(n)], dtype=bool)
            out[i] = np.where(mask, hi, lo)
        return out
    c = _arr(v.center)
    n = c.shape[0]
    eye = np.eye(n) * v.radius
    return np.vstack([c + eye, c - eye])


def translate(v: ConvexValue, t) -> ConvexValue:
    t = _arr(t)
    if isinstance(v, Point):
        return Point(_arr(v.at) + t)
    if isinstance(v, Box):
        return Box(_arr(v.lo) + t, _arr(v.hi) + t)
    if isinstance(v, Ball):
        return Ball(_arr(v.center) + t, v.radius)
    if isinstance(v, Segment):
        return Segment(_arr(v.a) + t, _arr(v.b) + t)
    return Polytope(np.asarray(v.vertices) + t)


def scale(v: ConvexValue, c: float) -> ConvexValue:
    c = float(c)
    if isinstance(v, Point):
        return Point(c * _arr(v.at))
    if isinstance(v, Box):
        lo, hi = c * _arr(v.lo), c * _arr(v.hi)
        return Box(np.minimum(lo, hi), np.maximum(lo, hi))
    if isinstance(v, Ball):
        return Ball(c * _arr(v.center), abs(c) * v.radius)
    if isinstance(v, Segment):
        return Segment(c * _arr(v.a), c * _arr(v.b))
    return Polytope(c * np.asarray(v.vertices))


def _as_vertices(v: ConvexValue) -> np.ndarray | None:
    if isinstance(v, Ball):
        return None
    return extreme_points(v)


def _simplify_vertices(V: np.ndarray) -> ConvexValue:
    uniq = np.unique(V, axis=0)
    if uniq.shape[0] == 1:
        return Point(uniq[0])
    if uniq.shape[0] == 2:
        return Segment(uniq[0], uniq[1])
    return Polytope(uniq)


def minkowski(a: ConvexValue, b: ConvexValue) -> ConvexValue:
    """Minkowski sum.  Exact on the polytopal variants; a ball may only be
    combined with a point (general ball sums are not representable here)."""
    if isinstance(a, Ball) and isinstance(b, Ball):
        return Ball(_arr(a.center) + _arr(b.center), a.radius + b.radius)
    if isinstance(a, Ball) or isinstance(b, Ball):
        ball, other = (a, b) if isinstance(a, Ball) else (b, a)
        if isinstance(other, Point):
            return translate(ball, other.at)
        raise BadParams("minkowski sum of a ball with a non-point set")
    if isinstance(a, Point):
        return translate(b, a.at)
    if isinstance(b, Point):
        return translate(a, b.at)
    if isinstance(a, Box) and isinstance(b, Box):
        return Box(_arr(a.lo) + _arr(b.lo), _arr(a.hi) + _arr(b.hi))
    Va, Vb = _as_vertices(a), _as_vertices(b)
    if Va.shape[0] * Vb.shape[0] > 4096:
        raise BadParams("minkowski sum vertex count too large")
    sums = (Va[:, None, :] + Vb[None, :, :]).reshape(-1, Va.shape[1])
    return _simplify_vertices(sums)


def drop_last_coord(v: ConvexValue) -> ConvexValue:
    """Image under the projection forgetting the last coordinate."""
    if dim(v) < 2:
        raise DimensionMismatch("cannot drop a coordinate of a 1-d value")
    if isinstance(v, Point):
        return Point(_arr(v.at)[:-1])
    if isinstance(v, Box):
        return Box(_arr(v.lo)[:-1], _arr(v.hi)[:-1])
    if isinstance(v, Ball):
        return Ball(_arr(v.center)[:-1], v.radius)
    if isinstance(v, Segment):
        return Segment(_arr(v.a)[:-1], _arr(v.b)[:-1])
    return _simplify_vertices(np.asarray(v.vertices)[:, :-1])
