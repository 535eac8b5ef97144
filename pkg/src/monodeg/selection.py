"""Continuous eps-accurate selections of set-valued operators.

A selection is a continuous map whose graph stays within eps of the
operator graph (both coordinates measured in the Euclidean coefficient
metric, combined with max).  Three constructions are used:

* ``exact``: the operator is single-valued and is its own selection;
* ``resolvent``: set-valued parts are replaced by their Yosida
  approximations (y - R_lam(y)) / lam, which live exactly on the operator
  graph at the shifted base point R_lam(y);
* ``partition_of_unity``: multilinear hat weights on a lattice of cells,
  mixing minimal-norm representatives of the operator values at the
  lattice nodes; nodes are evaluated lazily so fine lattices stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import convex
from .errors import BadParams, GridTooFine
from .setval import MonotoneMultiMap

_MAX_CELLS_PER_AXIS = 1 << 16


@dataclass
class Selection:
    fn: Callable[[np.ndarray], np.ndarray]
    epsilon: float
    n: int
    method: str
    lipschitz: float | None = None
    meta: dict = field(default_factory=dict)

    def eval(self, y) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(y, dtype=float)), dtype=float)


def _structured_points(lo: np.ndarray, hi: np.ndarray, extra: int = 96) -> np.ndarray:
    """Deterministic probe set: centre, axis points, corners, fixed draws."""
    n = lo.shape[0]
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = [center, lo.copy(), hi.copy()]
    for k in range(n):
        for s in (-1.0, -0.5, 0.5, 1.0):
            q = center.copy()
            q[k] += s * half[k]
            pts.append(q)
    rng = np.random.default_rng(20240817)
    pts.append(center + (rng.random((extra, n)) * 2.0 - 1.0) * half)
    return np.vstack([np.atleast_2d(p) for p in pts])


def _sup_min_norm(T: MonotoneMultiMap, n: int, lo, hi) -> float:
    """Estimate of sup over the box of the minimal value norm."""
    best = 0.0
    for q in _structured_points(lo, hi):
        v = T.value(q, n)
        best = max(best, float(np.linalg.norm(convex.min_norm_point(v))))
    return best


def _yosida_part(T: MonotoneMultiMap, n: int, eps: float, lo, hi):
    sup = _sup_min_norm(T, n, lo, hi)
    lam = eps / max(sup, 1e-12)

    def fn(y):
        r = T.resolvent_fn(y, lam, n)
        return (y - r) / lam

    return fn, lam, 1.0 / lam


def _pou_selection(
    T: MonotoneMultiMap, n: int, eps: float, lo, hi
) -> Selection:
    pad = eps
    glo = np.asarray(lo, dtype=float) - pad
    ghi = np.asarray(hi, dtype=float) + pad
    h = eps / (2.0 * np.sqrt(n))
    cells = np.maximum(1, np.ceil((ghi - glo) / h).astype(int))
    if np.any(cells > _MAX_CELLS_PER_AXIS):
        raise GridTooFine(
            f"{int(np.max(cells))} cells per axis exceed {_MAX_CELLS_PER_AXIS}"
        )
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def node_value(idx: tuple[int, ...]) -> np.ndarray:
        val = cache.get(idx)
        if val is None:
            q = glo + h * np.asarray(idx, dtype=float)
            val = convex.min_norm_point(T.value(q, n))
            cache[idx] = val
        return val

    corners = [
        tuple((b >> k) & 1 for k in range(n)) for b in range(1 << n)
    ]

    def fn(y):
        u = (np.asarray(y, dtype=float) - glo) / h
        base = np.clip(np.floor(u).astype(int), 0, cells - 1)
        frac = np.clip(u - base, 0.0, 1.0)
        out = np.zeros(n)
        for bits in corners:
            wgt = 1.0
            for k in range(n):
                wgt *= frac[k] if bits[k] else (1.0 - frac[k])
            if wgt == 0.0:
                continue
            out += wgt * node_value(tuple(base[k] + bits[k] for k in range(n)))
        return out

    return Selection(
        fn,
        epsilon=eps,
        n=n,
        method="partition_of_unity",
        lipschitz=None,
        meta={"h": float(h), "cells": tuple(int(c) for c in cells), "pad": pad},
    )


def build_selection(
    T: MonotoneMultiMap,
    n: int,
    eps: float,
    region,
    *,
    prefer: str | None = None,
) -> Selection:
    """Continuous eps-selection of the rank-n section of T, valid on an
    eps-neighbourhood of the region's bounding box."""
    if eps <= 0:
        raise BadParams("selection accuracy must be positive")
    if prefer not in (None, "exact", "resolvent", "partition_of_unity"):
        raise BadParams(f"unknown selection method {prefer!r}")
    lo, hi = region.bounding_box()
    lo = np.asarray(lo, dtype=float) - eps
    hi = np.asarray(hi, dtype=float) + eps

    if prefer == "partition_of_unity":
        return _pou_selection(T, n, eps, lo, hi)

    if prefer == "resolvent" and T.resolvent_fn is not None and T.single_valued:
        fn, lam, lip = _yosida_part(T, n, eps, lo, hi)
        return Selection(fn, epsilon=eps, n=n, method="resolvent",
                         lipschitz=lip, meta={"lambda_0": lam})

    if T.single_valued and prefer in (None, "exact"):
        lip = T.lipschitz_bound(float(np.max(np.abs(np.stack([lo, hi])))), n)
        return Selection(
            lambda y: T.point(y, n),
            epsilon=eps,
            n=n,
            method="exact",
            lipschitz=lip,
            meta={},
        )

    if prefer == "exact":
        raise BadParams("exact selection requires a single-valued operator")

    parts = T.summands if T.summands else (T,)
    set_parts = [P for P in parts if not P.single_valued]
    if all(P.resolvent_fn is not None for P in set_parts) and set_parts:
        share = eps / len(set_parts)
        fns = []
        lams = {}
        lip_total = 0.0
        lip_known = True
        radius = float(np.max(np.abs(np.stack([lo, hi]))))
        for i, P in enumerate(parts):
            if P.single_valued:
                fns.append(lambda y, P=P: P.point(y, n))
                b = P.lipschitz_bound(radius, n)
                if b is None:
                    lip_known = False
                else:
                    lip_total += b
            else:
                fn, lam, lip = _yosida_part(P, n, share, lo, hi)
                fns.append(fn)
                lams[f"lambda_{i}"] = lam
                lip_total += lip
        total = (lambda y: np.sum([f(y) for f in fns], axis=0)) if len(fns) > 1 else fns[0]
        return Selection(
            total,
            epsilon=eps,
            n=n,
            method="resolvent",
            lipschitz=lip_total if lip_known else None,
            meta=lams,
        )
    if prefer == "resolvent":
        raise BadParams("resolvent selection requires resolvents on set-valued parts")
    return _pou_selection(T, n, eps, lo, hi)


@dataclass(frozen=True)
class SelectionAuditReport:
    epsilon: float
    samples: int
    fraction_ok: float
    worst_distance: float
    passed: bool


def _graph_distance(
    T: MonotoneMultiMap, sel_val: np.ndarray, y: np.ndarray, n: int,
    candidates: list[np.ndarray],
) -> float:
    best = np.inf
    for z in candidates:
        d1 = float(np.linalg.norm(y - z))
        if d1 >= best:
            continue
        d2 = convex.distance(T.value(z, n), sel_val)
        best = min(best, max(d1, d2))
    return best


def audit_selection(
    T: MonotoneMultiMap,
    sel,
    region,
    *,
    n: int | None = None,
    eps: float | None = None,
    samples: int = 2000,
    rng: np.random.Generator | None = None,
) -> SelectionAuditReport:
    """Sampled upper bound on the graph distance of a selection.

    For each sample y the audit measures max(|y - z|, dist(f(y), T(z)))
    over a candidate list of graph base points z: y itself, y with
    near-zero coordinates snapped to zero, resolvent base points when
    available, and the nearest lattice node for partition-of-unity
    selections.  The reported distances are upper bounds, so a passing
    audit is conservative.
    """
    rng = rng or np.random.default_rng(0)
    if isinstance(sel, Selection):
        fn = sel.eval
        n = n if n is not None else sel.n
        eps = eps if eps is not None else sel.epsilon
        meta = sel.meta
        method = sel.method
    else:
        fn = sel
        if n is None or eps is None:
            raise BadParams("raw selection callables need explicit n and eps")
        meta = {}
        method = "custom"
    pts = region.interior_samples(rng, samples)
    parts = T.summands if T.summands else (T,)
    lams = [v for k, v in meta.items() if k.startswith("lambda")]
    ok = 0
    worst = 0.0
    for y in pts:
        sv = np.asarray(fn(y), dtype=float)
        candidates = [y]
        snapped = np.where(np.abs(y) <= eps, 0.0, y)
        if np.any(snapped != y):
            candidates.append(snapped)
        li = 0
        for P in parts:
            if P.resolvent_fn is not None and not P.single_valued and li < len(lams):
                candidates.append(np.asarray(P.resolvent_fn(y, lams[li], n), dtype=float))
                li += 1
        if method == "partition_of_unity" and "h" in meta:
            lo, _ = region.bounding_box()
            glo = np.asarray(lo, dtype=float) - meta["pad"]
            h = meta["h"]
            candidates.append(glo + h * np.round((y - glo) / h))
        d = _graph_distance(T, sv, y, n, candidates)
        worst = max(worst, d)
        if d <= eps * (1.0 + 1e-9):
            ok += 1
    frac = ok / len(pts)
    return SelectionAuditReport(
        epsilon=float(eps),
        samples=len(pts),
        fraction_ok=float(frac),
        worst_distance=float(worst),
        passed=bool(frac == 1.0),
    )
