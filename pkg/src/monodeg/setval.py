"""Set-valued monotone operators on rank-n sections.

An operator is represented by its coefficient image: for section
coefficients ``y`` of length n it returns the closed convex set
``{(w_k * x*_k)_k : x* in T(y)}``, so the monotonicity pairing
``<x* - x~*, i(y - y~)>`` becomes the Euclidean inner product of image
differences with coefficient differences.  Everything downstream (audits,
selections, the degree engine) works in this image space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import convex
from .convex import Ball, Box, ConvexValue, Point, Polytope, Segment
from .errors import BadParams, UnknownOperator
from .space import SpacePair, project_section


@dataclass
class MonotoneMultiMap:
    """Coefficient-image form of a set-valued operator.

    ``value_fn(c, n)`` receives exactly n coefficients and returns a
    :class:`ConvexValue` of dimension n.  ``resolvent_fn(c, lam, n)``, when
    present, solves ``z + lam * T(z) ∋ c`` exactly in image coordinates.
    ``lipschitz_fn(radius, n)`` optionally bounds the section Lipschitz
    constant on a ball of the given radius.
    """

    space: SpacePair
    label: str
    value_fn: Callable[[np.ndarray, int], ConvexValue]
    single_valued: bool = False
    resolvent_fn: Callable[[np.ndarray, float, int], np.ndarray] | None = None
    lipschitz_fn: Callable[[float, int], float | None] | None = None
    summands: tuple["MonotoneMultiMap", ...] = ()

    def value(self, y, n: int) -> ConvexValue:
        c = project_section(np.asarray(y, dtype=float), n)
        return self.value_fn(c, n)

    def point(self, y, n: int) -> np.ndarray:
        v = self.value(y, n)
        if not isinstance(v, Point):
            raise BadParams(f"operator {self.label!r} is set-valued at this point")
        return np.asarray(v.at, dtype=float)

    def lipschitz_bound(self, radius: float, n: int) -> float | None:
        if self.lipschitz_fn is None:
            return None
        return self.lipschitz_fn(radius, n)


def finite_rank(T: MonotoneMultiMap, y, n: int) -> ConvexValue:
    """Value of the rank-n section of T at y, in image coordinates."""
    return T.value(y, n)


def _coef_array(spec, n: int, what: str) -> np.ndarray:
    """Resolve a scalar / sequence / rule into n per-coordinate numbers."""
    if callable(spec):
        out = np.asarray(spec(n), dtype=float)
    elif np.isscalar(spec):
        out = np.full(n, float(spec))
    else:
        seq = np.asarray(spec, dtype=float)
        if seq.ndim != 1:
            raise BadParams(f"{what} must be a scalar or flat sequence")
        if n > seq.shape[0]:
            raise BadParams(f"{what} has {seq.shape[0]} entries, section {n} requested")
        out = seq[:n].copy()
    if not np.all(np.isfinite(out)):
        raise BadParams(f"{what} contains non-finite entries")
    return out


def duality_operator(sp: SpacePair) -> MonotoneMultiMap:
    """y -> J(i(y)), the duality map pulled through the embedding."""

    def val(c, n):
        return Point(sp.embedded_duality(c))

    def lip(radius, n):
        if sp.p_x == 2.0:
            w = sp.weight_array(n)
            return float(np.max(w * w)) if n else 0.0
        return None

    return MonotoneMultiMap(sp, "duality", val, single_valued=True, lipschitz_fn=lip)


def diag_operator(sp: SpacePair, lam) -> MonotoneMultiMap:
    """Coordinatewise linear map with image coefficients lam_k w_k^2 y_k."""

    def val(c, n):
        w = sp.weight_array(n)
        return Point(_coef_array(lam, n, "lam") * w * w * c)

    def lip(radius, n):
        if n == 0:
            return 0.0
        w = sp.weight_array(n)
        return float(np.max(np.abs(_coef_array(lam, n, "lam")) * w * w))

    def res(c, t, n):
        w = sp.weight_array(n)
        return c / (1.0 + t * _coef_array(lam, n, "lam") * w * w)

    return MonotoneMultiMap(
        sp, "diag", val, single_valued=True, resolvent_fn=res, lipschitz_fn=lip
    )


def cubic_operator(sp: SpacePair, cube=1.0, lin=0.0) -> MonotoneMultiMap:
    """Coordinatewise odd map with image w_k^2 (cube_k y_k^3 + lin_k y_k)."""

    def val(c, n):
        w = sp.weight_array(n)
        a = _coef_array(cube, n, "cube")
        b = _coef_array(lin, n, "lin")
        return Point(w * w * (a * c**3 + b * c))

    def lip(radius, n):
        if n == 0:
            return 0.0
        w = sp.weight_array(n)
        a = _coef_array(cube, n, "cube")
        b = _coef_array(lin, n, "lin")
        return float(np.max(w * w * (3.0 * np.abs(a) * radius**2 + np.abs(b))))

    return MonotoneMultiMap(sp, "cubic", val, single_valued=True, lipschitz_fn=lip)


def sign_operator(sp: SpacePair, mu=1.0) -> MonotoneMultiMap:
    """Coordinatewise sign multimap, the full interval at a zero coordinate.

    Image value per coordinate is w_k mu_k sign(y_k), widening to
    [-w_k mu_k, w_k mu_k] where y_k = 0.
    """

    def val(c, n):
        w = sp.weight_array(n)
        m = _coef_array(mu, n, "mu")
        if np.any(m < 0):
            raise BadParams("mu must be non-negative")
        amp = w * m
        lo = np.where(c > 0, amp, np.where(c < 0, -amp, -amp))
        hi = np.where(c > 0, amp, np.where(c < 0, -amp, amp))
        if np.all(lo == hi):
            return Point(lo)
        return Box(lo, hi)

    def res(c, t, n):
        # resolvent of the sign map is soft thresholding at t * w * mu
        w = sp.weight_array(n)
        m = _coef_array(mu, n, "mu")
        th = t * w * m
        return np.sign(c) * np.maximum(np.abs(c) - th, 0.0)

    return MonotoneMultiMap(sp, "sign", val, resolvent_fn=res)


def capped_normal_cone_operator(
    sp: SpacePair, radius: float, cap: float, band: float = 1e-9
) -> MonotoneMultiMap:
    """Subdifferential of y -> cap/2 * max(0, ||i(y)||^2 - radius^2).

    Zero inside the embedded ball, the segment [0, cap * Jn(y)] on the
    sphere (detected within ``band``), and the point cap * Jn(y) outside.
    A finite cap truncates the classical normal cone to the ball; results
    should be checked for cap sensitivity when used as a cone substitute.
    """
    if radius <= 0 or cap <= 0 or band < 0:
        raise BadParams("capped_normal_cone needs radius > 0, cap > 0, band >= 0")

    def val(c, n):
        s = sp.embed_norm(c)
        if s < radius - band:
            return Point(np.zeros(n))
        tip = cap * sp.embedded_duality(c)
        if s > radius + band:
            return Point(tip)
        return Segment(np.zeros(n), tip)

    res = None
    if sp.p_x == 2.0:

        def res(c, t, n):  # noqa: F811
            # solve z + t*cap*theta*w^2*z = c with theta in [0, 1] picked so
            # that the embedded norm of z sits on the correct side of radius
            w2 = sp.weight_array(n) ** 2

            def znorm(theta):
                return sp.embed_norm(c / (1.0 + t * cap * theta * w2))

            if znorm(0.0) <= radius:
                return np.asarray(c, dtype=float).copy()
            if znorm(1.0) >= radius:
                return c / (1.0 + t * cap * w2)
            lo_t, hi_t = 0.0, 1.0
            for _ in range(100):
                mid = 0.5 * (lo_t + hi_t)
                if znorm(mid) > radius:
                    lo_t = mid
                else:
                    hi_t = mid
            return c / (1.0 + t * cap * 0.5 * (lo_t + hi_t) * w2)

    return MonotoneMultiMap(sp, "capped_normal_cone", val, resolvent_fn=res)


def constant_operator(sp: SpacePair, value) -> MonotoneMultiMap:
    """Constant single-valued map (trivially monotone)."""
    v = np.asarray(value, dtype=float)

    def val(c, n):
        return Point(project_section(v, n))

    return MonotoneMultiMap(
        sp, "constant", val, single_valued=True,
        lipschitz_fn=lambda radius, n: 0.0,
    )


def shift_operator(T: MonotoneMultiMap, target) -> MonotoneMultiMap:
    """T - f0 in image coordinates, so zeros solve f0 in T(y)."""
    f0 = np.asarray(target, dtype=float)

    def val(c, n):
        return convex.translate(T.value_fn(c, n), -project_section(f0, n))

    res = None
    if T.resolvent_fn is not None:

        def res(c, t, n):  # noqa: F811
            return T.resolvent_fn(c + t * project_section(f0, n), t, n)

    parts = T.summands if T.summands else (T,)
    return MonotoneMultiMap(
        T.space,
        f"shifted({T.label})",
        val,
        single_valued=T.single_valued,
        resolvent_fn=res,
        lipschitz_fn=T.lipschitz_fn,
        summands=(*parts, constant_operator(T.space, -f0)),
    )


def scale_operator(T: MonotoneMultiMap, factor: float) -> MonotoneMultiMap:
    """factor * T; monotonicity is preserved for factor >= 0."""
    factor = float(factor)

    def val(c, n):
        return convex.scale(T.value_fn(c, n), factor)

    res = None
    if T.resolvent_fn is not None and factor > 0:

        def res(c, t, n):  # noqa: F811
            return T.resolvent_fn(c, t * factor, n)

    lip = None
    if T.lipschitz_fn is not None:

        def lip(radius, n):  # noqa: F811
            base = T.lipschitz_fn(radius, n)
            return None if base is None else abs(factor) * base

    if factor == 0.0:

        def val(c, n):  # noqa: F811
            return Point(np.zeros(n))

        return MonotoneMultiMap(T.space, "zero", val, single_valued=True,
                                lipschitz_fn=lambda radius, n: 0.0)
    return MonotoneMultiMap(
        T.space,
        f"scale({factor}, {T.label})",
        val,
        single_valued=T.single_valued,
        resolvent_fn=res,
        lipschitz_fn=lip,
        summands=tuple(scale_operator(S, factor) for S in T.summands),
    )


def sum_operators(*terms: MonotoneMultiMap) -> MonotoneMultiMap:
    """Pointwise Minkowski sum; the summand list is kept for selections."""
    if not terms:
        raise BadParams("sum needs at least one term")
    if len(terms) == 1:
        return terms[0]
    sp = terms[0].space
    flat: list[MonotoneMultiMap] = []
    for T in terms:
        if T.space is not sp and T.space != sp:
            raise BadParams("sum of operators over different spaces")
        flat.extend(T.summands if T.summands else (T,))

    def val(c, n):
        out = flat[0].value_fn(c, n)
        for T in flat[1:]:
            out = convex.minkowski(out, T.value_fn(c, n))
        return out

    single = all(T.single_valued for T in flat)

    lip = None
    if all(T.lipschitz_fn is not None for T in flat):

        def lip(radius, n):  # noqa: F811
            parts = [T.lipschitz_fn(radius, n) for T in flat]
            if any(b is None for b in parts):
                return None
            return float(sum(parts))

    return MonotoneMultiMap(
        sp,
        "sum(" + ", ".join(T.label for T in flat) + ")",
        val,
        single_valued=single,
        lipschitz_fn=lip,
        summands=tuple(flat),
    )


def convex_path(
    T0: MonotoneMultiMap, T1: MonotoneMultiMap
) -> Callable[[float], MonotoneMultiMap]:
    """t -> (1-t) T0 + t T1; each slice of a path between monotone maps is
    monotone, so the family is a homotopy candidate."""

    def at(t: float) -> MonotoneMultiMap:
        t = float(t)
        if t == 0.0:
            return T0
        if t == 1.0:
            return T1
        return sum_operators(scale_operator(T0, 1.0 - t), scale_operator(T1, t))

    return at


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    worst_gap: float
    worst_pair: tuple[tuple[float, ...], tuple[float, ...]] | None
    pairs_checked: int
    tol: float


def _audit_points(region, n: int, rng: np.random.Generator, count: int) -> np.ndarray:
    lo, hi = region.bounding_box()
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = [center]
    for k in range(n):
        for s in (-1.0, -0.5, 0.5, 1.0):
            q = center.copy()
            q[k] += s * half[k]
            pts.append(q)
    pts.append(lo.copy())
    pts.append(hi.copy())
    rnd = center + (rng.random((count, n)) * 2.0 - 1.0) * half
    pts = np.vstack([np.asarray(pts), rnd])
    keep = [q for q in pts if region.contains(q)]
    return np.asarray(keep) if keep else center[None, :]


def monotone_gap(T: MonotoneMultiMap, y1, y2, n: int) -> float:
    """min over selections of <s1 - s2, y1 - y2>; non-negative iff the pair
    cannot witness a monotonicity violation."""
    y1 = project_section(np.asarray(y1, dtype=float), n)
    y2 = project_section(np.asarray(y2, dtype=float), n)
    d = y1 - y2
    v1 = T.value(y1, n)
    v2 = T.value(y2, n)
    return float(-convex.support(v1, -d) - convex.support(v2, d))


def monotonicity_audit(
    T: MonotoneMultiMap,
    region,
    n: int,
    *,
    pairs: int = 300,
    rng: np.random.Generator | None = None,
    tol: float = 1e-9,
) -> AuditReport:
    """Sampled check of the graph monotonicity inequality on a region.

    Pairs mix structured points (center, axis points, corners, which hit
    the kinks of the gallery members) with uniform draws.  The gap of each
    pair is the worst case over both value sets, computed from support
    functions, so set-valuedness is handled exactly.
    """
    rng = rng or np.random.default_rng(0)
    pts = _audit_points(region, n, rng, max(16, pairs // 2))
    m = pts.shape[0]
    worst = np.inf
    worst_pair = None
    checked = 0
    pair_idx = [(i, j) for i in range(min(m, 12)) for j in range(min(m, 12)) if i < j]
    while len(pair_idx) < pairs and m > 1:
        i, j = rng.integers(0, m, size=2)
        if i != j:
            pair_idx.append((int(i), int(j)))
    for i, j in pair_idx[:pairs]:
        g = monotone_gap(T, pts[i], pts[j], n)
        d = pts[i] - pts[j]
        rel = g / (1.0 + float(np.dot(d, d)))
        checked += 1
        if rel < worst:
            worst = rel
            worst_pair = (tuple(map(float, pts[i])), tuple(map(float, pts[j])))
    return AuditReport(
        passed=bool(worst >= -tol),
        worst_gap=float(worst),
        worst_pair=worst_pair,
        pairs_checked=checked,
        tol=tol,
    )


def dual_gap_lower(sp: SpacePair, v: ConvexValue) -> float:
    """Safe lower bound for min over the set of the dual functional norm.

    Exact for points and boxes; segments use a fine convex line search;
    balls and polytopes fall back to norm-equivalence bounds.  Never
    exceeds the true minimum, so margins built on it are conservative.
    """
    q = sp.q_x
    d = convex.dim(v)
    w = sp.weight_array(d)
    if isinstance(v, Point):
        return sp.dual_norm_image(np.asarray(v.at))
    if isinstance(v, Box):
        lo, hi = np.asarray(v.lo), np.asarray(v.hi)
        m = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
        return sp.dual_norm_image(m * np.sign(lo + hi))
    if isinstance(v, Segment):
        a, b = np.asarray(v.a), np.asarray(v.b)

        def h(t):
            return sp.dual_norm_image(a + t * (b - a))

        lo_t, hi_t = 0.0, 1.0
        for _ in range(200):
            m1 = lo_t + (hi_t - lo_t) / 3.0
            m2 = hi_t - (hi_t - lo_t) / 3.0
            if h(m1) <= h(m2):
                hi_t = m2
            else:
                lo_t = m1
        return h(0.5 * (lo_t + hi_t))
    if isinstance(v, Ball):
        blow = float(d) ** max(0.0, 1.0 / q - 0.5)
        slack = v.radius * blow * float(np.max(1.0 / w))
        return max(0.0, sp.dual_norm_image(np.asarray(v.center)) - slack)
    shrink = float(d) ** min(0.0, 1.0 / q - 0.5)
    eu = float(np.linalg.norm(convex.min_norm_point(v)))
    return eu * shrink / float(np.max(w))


_GALLERY_DOC = {
    "duality": "duality map through the embedding; params: none",
    "diag": "coordinatewise linear map; params: lam (scalar or list)",
    "sign": "coordinatewise sign multimap; params: mu (scalar or list, >= 0)",
    "cubic": "coordinatewise cube plus linear term; params: cube, lin",
    "capped_normal_cone": "truncated normal cone of the embedded ball; "
    "params: radius, cap, band",
    "shifted": "base operator minus a constant target; params: base, target",
    "sum": "pointwise sum; params: terms (list of operator specs)",
    "scale": "non-negative multiple; params: base, factor",
}


def gallery_names() -> list[str]:
    return sorted(_GALLERY_DOC)


def gallery_doc(name: str) -> str:
    return _GALLERY_DOC[name]


def gallery(name: str, sp: SpacePair, params: dict | None = None) -> MonotoneMultiMap:
    """Build a registered operator by name; nested specs use dicts with
    ``name``/``params`` keys."""
    params = dict(params or {})

    def nested(spec, what):
        if not isinstance(spec, dict) or "name" not in spec:
            raise BadParams(f"{what} must be an operator spec with a 'name'")
        return gallery(spec["name"], sp, spec.get("params"))

    def take(key, default=_GALLERY_DOC):
        if key in params:
            return params.pop(key)
        if default is _GALLERY_DOC:
            raise BadParams(f"operator {name!r} requires parameter {key!r}")
        return default

    if name == "duality":
        T = duality_operator(sp)
    elif name == "diag":
        T = diag_operator(sp, take("lam"))
    elif name == "sign":
        T = sign_operator(sp, take("mu", 1.0))
    elif name == "cubic":
        T = cubic_operator(sp, take("cube", 1.0), take("lin", 0.0))
    elif name == "capped_normal_cone":
        T = capped_normal_cone_operator(
            sp, float(take("radius")), float(take("cap")), float(take("band", 1e-9))
        )
    elif name == "shifted":
        T = shift_operator(nested(take("base"), "base"), take("target"))
    elif name == "sum":
        terms = take("terms")
        if not isinstance(terms, (list, tuple)) or not terms:
            raise BadParams("sum requires a non-empty list of terms")
        T = sum_operators(*[nested(t, "term") for t in terms])
    elif name == "scale":
        T = scale_operator(nested(take("base"), "base"), float(take("factor")))
    else:
        raise UnknownOperator(f"unknown operator {name!r}; known: {gallery_names()}")
    if params:
        raise BadParams(f"unknown parameters for {name!r}: {sorted(params)}")
    return T
