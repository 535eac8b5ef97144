"""Bounded regions of a rank-n section and domains spanning all sections.

Regions know how to sample their boundary on a structured lattice (cube
faces, mapped to the p-sphere for balls) and report the mesh of that
lattice, so margin computations can subtract a Lipschitz slack.  Domains
produce the region cut out of each section; for a ball this shrinks the
radius by the mass of the centre coordinates beyond the section.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels as _k
from .errors import BadParams, RegionUnbounded


def _check_finite(arr, what: str):
    if not np.all(np.isfinite(arr)):
        raise RegionUnbounded(f"{what} must be finite")


@dataclass(frozen=True)
class BallRegion:
    """p-norm ball of a section, closed."""

    center: tuple[float, ...]
    radius: float
    p: float = 2.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        _check_finite(c, "ball center")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise RegionUnbounded("ball radius must be positive and finite")
        if not self.p > 1.0:
            raise BadParams("ball exponent must exceed 1")
        object.__setattr__(self, "center", tuple(map(float, c)))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def contains(self, x, tol: float = 1e-12) -> bool:
        g = np.asarray(x, dtype=float) - np.asarray(self.center)
        return _k.lp_norm(g, self.p) <= self.radius * (1.0 + tol) + tol

    def scale(self) -> float:
        return self.radius

    def interior_samples(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo, hi = self.bounding_box()
        out = np.empty((count, self.dim))
        got = 0
        while got < count:
            cand = lo + rng.random((max(count, 64), self.dim)) * (hi - lo)
            for q in cand:
                if self.contains(q):
                    out[got] = q
                    got += 1
                    if got == count:
                        break
        return out


@dataclass(frozen=True)
class BoxRegion:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        _check_finite(lo, "box bounds")
        _check_finite(hi, "box bounds")
        if lo.shape != hi.shape:
            raise BadParams("box bounds of different lengths")
        if np.any(hi <= lo):
            raise BadParams("box must have positive extent in every axis")
        object.__setattr__(self, "lo", tuple(map(float, lo)))
        object.__setattr__(self, "hi", tuple(map(float, hi)))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lo), np.asarray(self.hi)

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        lo, hi = self.bounding_box()
        pad = tol * (1.0 + np.abs(lo) + np.abs(hi))
        return bool(np.all(x >= lo - pad) and np.all(x <= hi + pad))

    def scale(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.max(hi - lo) / 2.0)

    def interior_samples(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo, hi = self.bounding_box()
        return lo + rng.random((count, self.dim)) * (hi - lo)


Region = BallRegion | BoxRegion


def default_per_axis(n: int) -> int:
    """Boundary lattice resolution per face axis, tapered with dimension.

    Odd counts keep the face centres (the axis extremes of a mapped ball)
    in the sample set, which is where the gallery operators attain their
    boundary extrema.
    """
    return {1: 1, 2: 65, 3: 9, 4: 7, 5: 5, 6: 5}.get(n, 3)


def _cube_faces(n: int, per_axis: int) -> np.ndarray:
    """Lattice on the boundary of [-1, 1]^n (duplicates removed)."""
    if n == 1:
        return np.array([[-1.0], [1.0]])
    ticks = np.linspace(-1.0, 1.0, per_axis)
    pts = []
    for axis in range(n):
        rest = np.meshgrid(*([ticks] * (n - 1)), indexing="ij")
        flat = np.stack([r.ravel() for r in rest], axis=1)
        for side in (-1.0, 1.0):
            face = np.insert(flat, axis, side, axis=1)
            pts.append(face)
    allpts = np.vstack(pts)
    return np.unique(allpts, axis=0)


def boundary_samples(region: Region, per_axis: int | None = None):
    """Boundary lattice and its mesh (max spacing between lattice
    neighbours; 0 in one dimension where the boundary is finite)."""
    n = region.dim
    per_axis = per_axis or default_per_axis(n)
    if n == 1:
        lo, hi = region.bounding_box()
        return np.array([[lo[0]], [hi[0]]]), 0.0
    cube = _cube_faces(n, per_axis)
    if isinstance(region, BoxRegion):
        lo, hi = region.bounding_box()
        pts = lo + 0.5 * (cube + 1.0) * (hi - lo)
    else:
        c = np.asarray(region.center)
        nrm = _k.lp_norm_batch(cube, region.p)
        pts = c + region.radius * cube / nrm[:, None]
    # mesh from nearest-neighbour spacing of the mapped lattice: the cube
    # spacing scaled by the largest local stretch observed between samples
    step = 2.0 / (per_axis - 1)
    probe = cube[: min(len(cube), 512)]
    mesh = 0.0
    for axis in range(n):
        shifted = probe.copy()
        inner = np.abs(shifted[:, axis]) < 1.0 - 1e-12
        if not np.any(inner):
            continue
        shifted[inner, axis] += step
        shifted[:, axis] = np.clip(shifted[:, axis], -1.0, 1.0)
        if isinstance(region, BoxRegion):
            lo, hi = region.bounding_box()
            a = lo + 0.5 * (probe[inner] + 1.0) * (hi - lo)
            b = lo + 0.5 * (shifted[inner] + 1.0) * (hi - lo)
        else:
            c = np.asarray(region.center)
            a = c + region.radius * probe[inner] / _k.lp_norm_batch(probe[inner], region.p)[:, None]
            b = c + region.radius * shifted[inner] / _k.lp_norm_batch(shifted[inner], region.p)[:, None]
        if len(a):
            mesh = max(mesh, float(np.max(np.linalg.norm(a - b, axis=1))))
    return pts, mesh


def box_intersects(region: Region, blo: np.ndarray, bhi: np.ndarray) -> bool:
    """Exact test whether an axis box meets the region."""
    if isinstance(region, BoxRegion):
        lo, hi = region.bounding_box()
        return bool(np.all(bhi >= lo) and np.all(blo <= hi))
    c = np.asarray(region.center)
    nearest = np.clip(c, blo, bhi)
    return _k.lp_norm(nearest - c, region.p) <= region.radius


@dataclass(frozen=True)
class BallDomain:
    """Ball in the source space; sections are balls of reduced radius."""

    center: tuple[float, ...]
    radius: float
    p: float = 2.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        _check_finite(c, "domain center")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise RegionUnbounded("domain radius must be positive and finite")
        if not self.p > 1.0:
            raise BadParams("domain exponent must exceed 1")
        object.__setattr__(self, "center", tuple(map(float, c)))
        object.__setattr__(self, "radius", float(self.radius))

    def section(self, n: int) -> BallRegion:
        if n < 1:
            raise BadParams("section index must be at least 1")
        c = np.asarray(self.center)
        head = np.zeros(n)
        head[: min(n, c.shape[0])] = c[:n]
        tail = c[n:] if c.shape[0] > n else np.zeros(0)
        leftover = self.radius**self.p - _k.lp_norm(tail, self.p) ** self.p
        if leftover <= 0:
            raise BadParams(f"section {n} of the domain is empty")
        return BallRegion(head, leftover ** (1.0 / self.p), self.p)

    def with_radius(self, radius: float) -> "BallDomain":
        return BallDomain(self.center, radius, self.p)


@dataclass(frozen=True)
class BoxDomain:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        _check_finite(lo, "domain bounds")
        _check_finite(hi, "domain bounds")
        if lo.shape != hi.shape:
            raise BadParams("domain bounds of different lengths")
        if np.any(hi <= lo):
            raise BadParams("domain must have positive extent in every axis")
        object.__setattr__(self, "lo", tuple(map(float, lo)))
        object.__setattr__(self, "hi", tuple(map(float, hi)))

    def section(self, n: int) -> BoxRegion:
        if n < 1:
            raise BadParams("section index must be at least 1")
        if n > len(self.lo):
            raise BadParams(
                f"box domain fixes {len(self.lo)} coordinates, section {n} requested"
            )
        return BoxRegion(self.lo[:n], self.hi[:n])


Domain = BallDomain | BoxDomain
