"""Brouwer degree of continuous maps on bounded regions.

The engine locates the zeros of a map by adaptive bisection of the
bounding box (boxes are excluded when the centre value clears a local
Lipschitz estimate times the half-diagonal) followed by damped Newton
polishing, and returns the sum of Jacobian determinant signs.  Maps known
to have at most one zero (strictly monotone assemblies set
``unique_zero_hint``) skip the subdivision and go straight to Newton
multistart.  Degenerate zeros trigger deterministic target shifts inside
the certified boundary margin, which leave the degree unchanged; if the
shifts fail too the degree call raises instead of guessing.

A quadrature winding-number oracle and the two-endpoint sign rule provide
independent degree computations in dimensions two and one.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .backend import kernels as _k
from .errors import (
    BoundaryTooClose,
    BudgetExhausted,
    DegenerateZero,
    DimensionMismatch,
    ZeroOnBoundarySample,
)
from .regions import (
    BallRegion,
    BoxRegion,
    Region,
    boundary_samples,
    box_intersects,
    default_per_axis,
)


@dataclass
class FiniteMap:
    """Continuous map on a rank-n section, in coefficient coordinates."""

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    lipschitz_hint: float | None = None
    batch_fn: Callable[[np.ndarray], np.ndarray] | None = None
    unique_zero_hint: bool = False
    margin_floor: float | None = None
    fd_step: float | None = None
    label: str = ""

    def eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"map of dimension {self.dim} got shape {x.shape}")
        return np.asarray(self.fn(x), dtype=float)

    def eval_batch(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(P), dtype=float)
        return np.array([self.fn(row) for row in P], dtype=float)

    def shifted(self, delta) -> "FiniteMap":
        delta = np.asarray(delta, dtype=float)
        bf = None
        if self.batch_fn is not None:
            bf = lambda P: self.batch_fn(P) - delta[None, :]  # noqa: E731
        floor = self.margin_floor
        if floor is not None:
            floor = floor - float(np.linalg.norm(delta))
        return FiniteMap(
            fn=lambda x: self.fn(x) - delta,
            dim=self.dim,
            lipschitz_hint=self.lipschitz_hint,
            batch_fn=bf,
            unique_zero_hint=self.unique_zero_hint,
            margin_floor=floor,
            fd_step=self.fd_step,
            label=self.label,
        )


@dataclass(frozen=True)
class BoundaryReport:
    """Sampled distance of boundary values from the target."""

    min_norm: float
    margin: float
    mesh: float
    rigorous: bool
    samples: int


@dataclass(frozen=True)
class LocatedZero:
    point: tuple[float, ...]
    sign: int
    cond: float
    residual: float


@dataclass(frozen=True)
class ZeroSearch:
    zeros: tuple[LocatedZero, ...]
    nodes: int
    method: str

    @property
    def degree(self) -> int:
        return int(sum(z.sign for z in self.zeros))


def boundary_distance(
    fm: FiniteMap,
    region: Region,
    per_axis: int | None = None,
    *,
    refine_cap: int = 40000,
) -> BoundaryReport:
    """Smallest boundary value norm with a lower bound for the whole
    boundary when one is available: either the sampled minimum minus a
    global-Lipschitz mesh slack, or the map's analytic ``margin_floor``
    (whichever is larger).  An inconclusive certificate (every available
    bound non-positive) is not evidence of a boundary zero: the lattice is
    refined while the projected sample count stays under ``refine_cap``,
    and failing that the margin falls back to the raw sampled minimum,
    flagged non-rigorous -- same as for maps carrying no hints at all."""
    n = region.dim
    pa = per_axis or default_per_axis(n)
    while True:
        pts, mesh = boundary_samples(region, pa)
        vals = fm.eval_batch(pts)
        norms = np.linalg.norm(vals, axis=1)
        mn = float(np.min(norms))
        vscale = float(np.max(norms))
        if mn <= 1e-12 * (1.0 + vscale):
            raise ZeroOnBoundarySample(
                f"map vanishes at boundary sample {pts[int(np.argmin(norms))]}"
            )
        bounds = []
        if fm.lipschitz_hint is not None:
            bounds.append(mn - fm.lipschitz_hint * mesh / 2.0)
        if fm.margin_floor is not None:
            bounds.append(min(mn, fm.margin_floor))
        positive = [b for b in bounds if b > 0.0]
        if positive:
            return BoundaryReport(mn, float(max(positive)), mesh, True, len(pts))
        if not bounds:
            return BoundaryReport(mn, mn, mesh, False, len(pts))
        next_pa = 2 * pa - 1
        if n == 1 or 2 * n * next_pa ** (n - 1) > refine_cap:
            return BoundaryReport(mn, mn, mesh, False, len(pts))
        pa = next_pa


def _fd_jacobian(fm: FiniteMap, x: np.ndarray, h0: float = 1e-6) -> np.ndarray:
    n = fm.dim
    J = np.empty((n, n))
    for k in range(n):
        h = h0 * (1.0 + abs(x[k]))
        if fm.fd_step is not None:
            h = min(h, fm.fd_step)
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (fm.eval(x + e) - fm.eval(x - e)) / (2.0 * h)
    return J


def _newton(
    fm: FiniteMap,
    x0: np.ndarray,
    *,
    zero_tol: float,
    scale: float,
    maxit: int = 60,
    best_effort: bool = False,
) -> tuple[np.ndarray, float] | None:
    """Damped Newton iteration with backtracking.

    Returns the zero once the value norm drops below ``zero_tol``; with
    ``best_effort`` a stalled iteration that still made clear progress
    returns its final iterate instead of being discarded.
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = fm.eval(x)
    nf = float(np.linalg.norm(fx))
    nf0 = nf

    def settle():
        if nf <= zero_tol or (best_effort and nf < 0.5 * nf0):
            return x, nf
        return None

    for _ in range(maxit):
        if nf <= zero_tol:
            return x, nf
        J = _fd_jacobian(fm, x)
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -fx, rcond=None)[0]
        slen = float(np.linalg.norm(step))
        if not np.isfinite(slen) or slen == 0.0:
            return settle()
        if slen > 4.0 * scale:
            step *= 4.0 * scale / slen
        alpha = 1.0
        accepted = False
        while alpha >= 1e-7:
            xn = x + alpha * step
            fn = fm.eval(xn)
            nn = float(np.linalg.norm(fn))
            if nn < nf * (1.0 - 1e-4 * alpha):
                x, fx, nf = xn, fn, nn
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return settle()
    return settle()


def _dedupe(points: list[tuple[np.ndarray, float]], radius: float):
    """Cluster converged points, keeping the best residual per cluster."""
    reps: list[tuple[np.ndarray, float]] = []
    for z, r in sorted(points, key=lambda t: t[1]):
        if all(np.linalg.norm(z - rep) > radius for rep, _ in reps):
            reps.append((z, r))
    return reps


def _certify(fm: FiniteMap, z: np.ndarray, residual: float, cond_max: float) -> LocatedZero:
    J = _fd_jacobian(fm, z)
    if not np.all(np.isfinite(J)):
        raise DegenerateZero(f"jacobian not finite at {z}")
    cond = float(np.linalg.cond(J))
    if not np.isfinite(cond) or cond > cond_max:
        raise DegenerateZero(f"jacobian condition {cond:.3g} exceeds {cond_max:.3g}")
    sgn, _ = np.linalg.slogdet(J)
    if sgn == 0.0:
        raise DegenerateZero(f"jacobian singular at {z}")
    # A residual-tolerance iterate only localizes the zero up to
    # u = residual / sigma_min(J).  Near a multiple zero the Jacobian is
    # small *because* the point is close to the zero cluster, so it can be
    # perfectly conditioned (z^2 is conformal) yet meaningless: probing at
    # distance 16u along the weakest singular direction then shows the
    # Jacobian growing by a large factor, which a simple zero cannot do.
    svals = np.linalg.svd(J, compute_uv=False)
    smin = float(svals[-1])
    u = residual / smin
    if u > 256.0 * np.finfo(float).eps * (1.0 + float(np.linalg.norm(z))):
        vmin = np.linalg.svd(J)[2][-1]
        for s in (16.0, -16.0):
            Jp = _fd_jacobian(fm, z + s * u * vmin)
            if not np.all(np.isfinite(Jp)):
                raise DegenerateZero(f"jacobian not finite near {z}")
            sp = float(np.linalg.svd(Jp, compute_uv=False)[-1])
            if sp > 4.0 * smin:
                raise DegenerateZero(
                    f"jacobian grows {sp / smin:.2g}x across the newton "
                    f"uncertainty ball at {np.round(z, 8)}"
                )
    return LocatedZero(tuple(map(float, z)), int(sgn), cond, float(residual))


def _find_unique(fm, region, zero_tol, cond_max) -> ZeroSearch | None:
    """Newton multistart for maps promising at most one zero; returns None
    when the promise looks broken so the caller can fall back."""
    lo, hi = region.bounding_box()
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    scale = region.scale()
    starts = [center]
    if region.contains(np.zeros(fm.dim)):
        starts.append(np.zeros(fm.dim))
    for k in range(fm.dim):
        for s in (0.5, -0.5):
            q = center.copy()
            q[k] += s * half[k]
            starts.append(q)
    found: list[tuple[np.ndarray, float]] = []
    for s in starts:
        res = _newton(fm, s, zero_tol=zero_tol, scale=scale)
        if res is not None:
            found.append(res)
        if len(found) >= 3:
            break
    if not found:
        return None
    reps = _dedupe(found, radius=1e-4 * (1.0 + scale))
    if len(reps) > 1:
        return None
    z, resid = reps[0]
    if not region.contains(z, tol=1e-9):
        return ZeroSearch((), len(starts), "unique")
    return ZeroSearch((_certify(fm, z, resid, cond_max),), len(starts), "unique")


def _sweep(fm, region, seeds, floor, budget, zero_tol):
    """Bisection pass: returns (floor boxes, nodes used)."""
    queue = deque(seeds)
    floors = []
    nodes = 0
    n = fm.dim
    while queue:
        blo, bhi = queue.popleft()
        nodes += 1
        if nodes > budget:
            raise BudgetExhausted(f"subdivision budget {budget} exhausted")
        if not box_intersects(region, blo, bhi):
            continue
        c = 0.5 * (blo + bhi)
        h = 0.5 * (bhi - blo)
        gc = fm.eval(c)
        ngc = float(np.linalg.norm(gc))
        lloc = 0.0
        for k in range(n):
            e = np.zeros(n)
            e[k] = h[k]
            gp = fm.eval(c + e)
            gm = fm.eval(c - e)
            lloc = max(
                lloc,
                float(np.linalg.norm(gp - gm)) / (2.0 * h[k]),
                float(np.linalg.norm(gp - gc)) / h[k],
                float(np.linalg.norm(gm - gc)) / h[k],
            )
        leff = 2.0 * lloc
        if fm.lipschitz_hint is not None:
            leff = min(leff, fm.lipschitz_hint)
        halfdiag = float(np.linalg.norm(h))
        if ngc > leff * halfdiag + 10.0 * zero_tol:
            continue
        if float(np.max(h)) <= floor:
            floors.append((blo, bhi, c, h))
            continue
        k = int(np.argmax(h))
        mid = c[k]
        left_hi = bhi.copy()
        left_hi[k] = mid
        right_lo = blo.copy()
        right_lo[k] = mid
        queue.append((blo.copy(), left_hi))
        queue.append((right_lo, bhi.copy()))
    return floors, nodes


def _newton_from_box(fm, box, region, zero_tol, scale):
    blo, bhi, c, h = box
    starts = [c]
    for k in range(fm.dim):
        e = np.zeros(fm.dim)
        e[k] = 0.5 * h[k]
        starts.append(c + e)
        starts.append(c - e)
    for s in starts:
        res = _newton(fm, s, zero_tol=zero_tol, scale=scale)
        if res is not None:
            return res
    return None


def _find_by_subdivision(
    fm, region, budget, zero_tol, cond_max, floor_frac=1.0 / 32.0
) -> ZeroSearch:
    lo, hi = region.bounding_box()
    scale = region.scale()
    floor = scale * floor_frac
    floors, nodes = _sweep(fm, region, [(lo.copy(), hi.copy())], floor, budget, zero_tol)
    converged: list[tuple[np.ndarray, float]] = []
    unexplained = []
    for box in floors:
        res = _newton_from_box(fm, box, region, zero_tol, scale)
        if res is not None:
            converged.append(res)
        else:
            unexplained.append(box)
    # One refinement round: boxes where Newton stalled are re-bisected at a
    # quarter of the floor; survivors that still resist are an honest failure.
    for box in unexplained:
        blo, bhi = box[0], box[1]
        subfloors, extra = _sweep(
            fm, region, [(blo, bhi)], floor / 4.0, budget // 4 + 64, zero_tol
        )
        nodes += extra
        for sub in subfloors:
            res = _newton_from_box(fm, sub, region, zero_tol, scale)
            if res is None:
                raise BudgetExhausted(
                    f"cannot resolve floor box near {np.round(sub[2], 6)}"
                )
            converged.append(res)
    reps = _dedupe(converged, radius=1e-4 * (1.0 + scale))
    zeros = []
    for z, resid in reps:
        if region.contains(z, tol=1e-9):
            zeros.append(_certify(fm, z, resid, cond_max))
    return ZeroSearch(tuple(zeros), nodes, "subdivision")


def find_zeros(
    fm: FiniteMap,
    region: Region,
    *,
    budget: int = 60000,
    zero_tol: float = 1e-10,
    cond_max: float = 1e8,
) -> ZeroSearch:
    """Locate and certify the zeros of the map inside the region."""
    if fm.unique_zero_hint:
        search = _find_unique(fm, region, zero_tol, cond_max)
        if search is not None:
            return search
    return _find_by_subdivision(fm, region, budget, zero_tol, cond_max)


def _shift_directions(n: int) -> list[np.ndarray]:
    base = [
        1.0 / np.arange(1.0, n + 1.0),
        np.array([(-1.0) ** k / (k + 1.0) for k in range(n)]),
        np.sin(np.arange(1.0, n + 1.0)) + 2.0,
    ]
    return [d / np.linalg.norm(d) for d in base]


def degree(
    fm: FiniteMap,
    region: Region,
    *,
    per_axis: int | None = None,
    budget: int = 60000,
    zero_tol: float | None = None,
    cond_max: float = 1e8,
    min_margin: float = 1e-9,
) -> int:
    """Brouwer degree of the map over the region with respect to zero.

    The boundary margin is certified first (raising
    :class:`BoundaryTooClose` when too small).  If the located zeros are
    degenerate, the target is shifted by deterministic vectors shorter
    than half the margin, which cannot change the degree, before giving
    up with :class:`DegenerateZero`.
    """
    br = boundary_distance(fm, region, per_axis)
    if br.margin <= min_margin * (1.0 + br.min_norm):
        raise BoundaryTooClose(
            f"boundary margin {br.margin:.3g} below threshold {min_margin:.3g}"
        )
    zt = zero_tol if zero_tol is not None else max(1e-12, 1e-10 * (1.0 + br.min_norm))
    safe = br.margin if br.rigorous else br.margin / 2.0
    shifts: list[np.ndarray] = [np.zeros(fm.dim)]
    for mag in (safe / 4.0, safe / 2.0 * 0.95):
        for d in _shift_directions(fm.dim):
            shifts.append(mag * d)
    last: Exception | None = None
    for delta in shifts:
        probe = fm if not np.any(delta) else fm.shifted(delta)
        try:
            search = find_zeros(
                probe, region, budget=budget, zero_tol=zt, cond_max=cond_max
            )
            return int(sum(z.sign for z in search.zeros))
        except DegenerateZero as exc:
            last = exc
    raise DegenerateZero(
        f"all target shifts left a degenerate zero ({last})"
    )


def degree_1d(fm: FiniteMap, region: Region) -> int:
    """Two-endpoint oracle in one dimension."""
    lo, hi = region.bounding_box()
    ga = float(fm.eval(np.array([lo[0]]))[0])
    gb = float(fm.eval(np.array([hi[0]]))[0])
    if ga == 0.0 or gb == 0.0:
        raise ZeroOnBoundarySample("map vanishes at an interval endpoint")
    return int((np.sign(gb) - np.sign(ga)) / 2)


def _loop_points(region: Region, m: int) -> np.ndarray:
    if region.dim != 2:
        raise DimensionMismatch("winding oracle needs a planar region")
    t = np.arange(m) / m
    if isinstance(region, BallRegion):
        ang = 2.0 * np.pi * t
        u = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        nrm = _k.lp_norm_batch(u, region.p)
        return np.asarray(region.center) + region.radius * u / nrm[:, None]
    lo, hi = region.bounding_box()
    w, h = hi - lo
    per = 2.0 * (w + h)
    s = t * per
    pts = np.empty((m, 2))
    for i, si in enumerate(s):
        if si < w:
            pts[i] = (lo[0] + si, lo[1])
        elif si < w + h:
            pts[i] = (hi[0], lo[1] + si - w)
        elif si < 2 * w + h:
            pts[i] = (hi[0] - (si - w - h), hi[1])
        else:
            pts[i] = (lo[0], hi[1] - (si - 2 * w - h))
    return pts


def winding_degree(
    fm: FiniteMap, region: Region, *, samples: int = 512, max_doublings: int = 7
) -> int:
    """Degree of a planar map by accumulated-angle quadrature along the
    boundary loop, refined until every angle step is below pi/2."""
    m = samples
    for _ in range(max_doublings + 1):
        pts = _loop_points(region, m)
        vals = fm.eval_batch(pts)
        total, max_step, min_norm = _k.winding_total(vals[:, 0], vals[:, 1])
        if min_norm <= 1e-12 * (1.0 + float(np.max(np.abs(vals)))):
            raise ZeroOnBoundarySample("map vanishes on the quadrature loop")
        k = total / (2.0 * np.pi)
        if max_step < np.pi / 2.0 and abs(k - round(k)) < 0.05:
            return int(round(k))
        m *= 2
    raise BudgetExhausted("winding quadrature did not settle")
