"""Stabilized degree of a monotone set-valued operator, and its uses.

``degree_limit`` runs the section pipeline over a schedule and reports
the full trace; the degree counts as stabilized when a window of
consecutive sections agrees and no later section disagrees.
``homotopy_check`` validates a family's uniform boundary margin before
comparing stabilized degrees along the parameter grid.  ``extract_zero``
turns a nonzero stabilized degree into an approximate solution by driving
both accuracy knobs to zero and polishing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import brouwer, convex
from .errors import (
    BadParams,
    BoundaryTooClose,
    BudgetExhausted,
    DegenerateZero,
    GridTooFine,
    InadmissibleHomotopy,
    NotStabilized,
    ResidualNotMet,
    ZeroOnBoundarySample,
)
from .galerkin import Schedule, assemble, choose_epsilon
from .regions import Domain, boundary_samples
from .setval import MonotoneMultiMap, dual_gap_lower
from .space import Vec

_SECTION_ERRORS = (
    BoundaryTooClose,
    DegenerateZero,
    BudgetExhausted,
    GridTooFine,
    ZeroOnBoundarySample,
)


@dataclass(frozen=True)
class SectionEntry:
    n: int
    eps_n: float
    degree: int | None
    margin: float | None
    error: str | None


@dataclass
class DegreeReport:
    entries: list[SectionEntry]
    window: int
    stabilized: bool
    value: int | None
    stabilized_at: int | None
    eps_reg: float
    eps_source: str
    label: str = ""

    def require_value(self) -> int:
        if not self.stabilized or self.value is None:
            raise NotStabilized(
                f"no run of {self.window} equal section degrees "
                f"(trace: {[(e.n, e.degree, e.error) for e in self.entries]})"
            )
        return self.value


def _scan_stabilization(entries: list[SectionEntry], window: int):
    degs = [e.degree for e in entries]
    for i in range(len(degs) - window + 1):
        run = degs[i : i + window]
        if any(d is None for d in run) or len(set(run)) != 1:
            continue
        tail = [d for d in degs[i + window :] if d is not None]
        if all(d == run[0] for d in tail):
            return True, run[0], entries[i].n
        return False, None, None
    return False, None, None


def degree_limit(
    T: MonotoneMultiMap,
    domain: Domain,
    schedule: Schedule,
    *,
    window: int = 3,
    per_axis: int | None = None,
    budget: int = 60000,
    prefer_selection: str | None = None,
    min_margin: float = 1e-9,
) -> DegreeReport:
    """Trace of section degrees with the stabilization verdict.

    Sections that fail with a named engine error are recorded in the
    trace (breaking any stabilization run) instead of aborting the whole
    pipeline.
    """
    if isinstance(schedule.eps_reg, str):
        eps_rep = choose_epsilon(T, domain, max(schedule.n_list), per_axis=per_axis)
        eps_reg = eps_rep.eps
        eps_source = "auto"
    else:
        eps_reg = float(schedule.eps_reg)
        eps_source = "given"
    entries: list[SectionEntry] = []
    for j, n in enumerate(schedule.n_list):
        eps_n = schedule.eps_n(j, eps_reg)
        try:
            asm = assemble(
                T, domain, n, eps_n, eps_reg, prefer_selection=prefer_selection
            )
            br = brouwer.boundary_distance(asm.fm, asm.region, per_axis)
            if br.margin <= min_margin * (1.0 + br.min_norm):
                raise BoundaryTooClose(
                    f"section {n} margin {br.margin:.3g} below {min_margin:.3g}"
                )
            deg = brouwer.degree(
                asm.fm,
                asm.region,
                per_axis=per_axis,
                budget=budget,
                min_margin=min_margin,
            )
            entries.append(SectionEntry(n, float(eps_n), int(deg), br.margin, None))
        except _SECTION_ERRORS as exc:
            entries.append(
                SectionEntry(n, float(eps_n), None, None, type(exc).__name__)
            )
    stabilized, value, at = _scan_stabilization(entries, window)
    return DegreeReport(
        entries=entries,
        window=window,
        stabilized=stabilized,
        value=value,
        stabilized_at=at,
        eps_reg=float(eps_reg),
        eps_source=eps_source,
        label=T.label,
    )


def inclusion_residual(T: MonotoneMultiMap, y, n: int) -> float:
    """Euclidean distance of the target (zero) from the section value."""
    return convex.distance(T.value(y, n), np.zeros(n))


def _polish(fm, y, region, search=True):
    res = brouwer._newton(
        fm, y, zero_tol=1e-13, scale=region.scale(), maxit=80, best_effort=True
    )
    if res is not None:
        return res[0]
    if search:
        try:
            zs = brouwer.find_zeros(fm, region, zero_tol=1e-10)
            if zs.zeros:
                pts = [np.asarray(z.point) for z in zs.zeros]
                dists = [np.linalg.norm(p - y) for p in pts]
                return pts[int(np.argmin(dists))]
        except (DegenerateZero, BudgetExhausted):
            pass
    return y


def _compass(T, y, n, budget=2000):
    """Direct pattern search on the inclusion residual."""
    best = np.asarray(y, dtype=float).copy()
    bres = inclusion_residual(T, best, n)
    step = max(1e-7, bres)
    evals = 0
    while step > 1e-14 and evals < budget:
        improved = False
        for k in range(n):
            for s in (step, -step):
                cand = best.copy()
                cand[k] += s
                r = inclusion_residual(T, cand, n)
                evals += 1
                if r < bres:
                    best, bres = cand, r
                    improved = True
        if not improved:
            step /= 4.0
    return best, bres


def extract_zero(
    T: MonotoneMultiMap,
    domain: Domain,
    report: DegreeReport,
    *,
    tol: float = 1e-6,
    max_halvings: int = 60,
    prefer_selection: str | None = None,
) -> Vec:
    """Approximate zero of the operator once the stabilized degree is
    nonzero: both accuracy knobs are halved until the inclusion residual
    of the polished section zero meets the tolerance."""
    value = report.require_value()
    if value == 0:
        raise BadParams("zero extraction needs a nonzero stabilized degree")
    matching = [e for e in report.entries if e.degree == value]
    entry = matching[-1]
    n = entry.n
    region = domain.section(n)
    eps_n = entry.eps_n
    eps_reg = report.eps_reg
    warm = 0.5 * (np.sum(region.bounding_box(), axis=0))
    best_y = None
    best_rho = np.inf
    eps_n_frozen = False
    for halving in range(max_halvings + 1):
        try:
            asm = assemble(
                T, domain, n, eps_n, eps_reg, prefer_selection=prefer_selection
            )
        except GridTooFine:
            eps_n_frozen = True
            eps_n *= 2.0
            asm = assemble(
                T, domain, n, eps_n, eps_reg, prefer_selection=prefer_selection
            )
        y = _polish(asm.fm, warm, region, search=(halving == 0))
        # the polished point is only eps_n-close to a graph point; snapping
        # near-zero coordinates recovers inclusions that hold exactly at a
        # set-valued kink (the residual is discontinuous there)
        snapped = np.where(np.abs(y) <= eps_n, 0.0, y)
        for cand in (y, snapped) if np.any(snapped != y) else (y,):
            rho = inclusion_residual(T, cand, n)
            if rho < best_rho:
                best_y, best_rho = cand, rho
        if best_rho <= tol:
            return Vec.of(best_y, n)
        warm = y
        eps_reg /= 2.0
        if not eps_n_frozen:
            eps_n /= 2.0
    y, rho = _compass(T, best_y, n)
    if rho < best_rho:
        best_y, best_rho = y, rho
    if best_rho <= tol:
        return Vec.of(best_y, n)
    raise ResidualNotMet(
        f"best inclusion residual {best_rho:.3g} above tolerance {tol:.3g}",
        best_residual=float(best_rho),
    )


@dataclass
class Homotopy:
    """Family of operators over [0, 1] with the parameter grid to audit."""

    family: Callable[[float], MonotoneMultiMap]
    t_samples: tuple[float, ...] = field(
        default_factory=lambda: tuple(np.linspace(0.0, 1.0, 11))
    )

    def __post_init__(self):
        ts = tuple(float(t) for t in self.t_samples)
        if len(ts) < 2 or any(t < 0.0 or t > 1.0 for t in ts):
            raise BadParams("t_samples must lie in [0, 1] with at least two entries")
        object.__setattr__(self, "t_samples", ts)


@dataclass
class HomotopyReport:
    ts: tuple[float, ...]
    margins: tuple[float, ...]
    reports: list[DegreeReport]
    value: int | None
    passed: bool
    eps_reg: float


def homotopy_check(
    h: Homotopy,
    domain: Domain,
    schedule: Schedule,
    *,
    theta: float = 1e-9,
    per_axis: int | None = None,
    budget: int = 60000,
    window: int = 3,
    prefer_selection: str | None = None,
) -> HomotopyReport:
    """Constancy of the stabilized degree along an admissible family.

    Admissibility is checked first: every sampled slice must keep a
    positive boundary gap on the largest section, otherwise
    :class:`InadmissibleHomotopy` reports the offending parameters.  A
    common regularization weight (from the worst slice) is then used for
    every per-slice pipeline run.
    """
    n_max = max(schedule.n_list)
    region = domain.section(n_max)
    pts, mesh = boundary_samples(region, per_axis)
    margins = []
    for t in h.t_samples:
        Tt = h.family(t)
        sp = Tt.space
        gap = min(dual_gap_lower(sp, Tt.value(z, n_max)) for z in pts)
        margins.append(float(gap))
    bad = [t for t, g in zip(h.t_samples, margins) if g <= theta]
    if bad:
        raise InadmissibleHomotopy(
            f"boundary gap vanishes at t = {bad} (threshold {theta:g})"
        )
    if isinstance(schedule.eps_reg, str):
        sp = h.family(h.t_samples[0]).space
        w = sp.weight_array(n_max)
        stretch = float(n_max) ** max(0.0, 1.0 / sp.p_x - 0.5)
        emax = max(sp.embed_norm(z) for z in pts) + float(np.max(w)) * mesh * stretch
        eps_reg = 0.5 * min(margins) / emax
    else:
        eps_reg = float(schedule.eps_reg)
    sched = Schedule(schedule.n_list, eps_reg, schedule.eps_list)
    reports = []
    values = []
    for t in h.t_samples:
        rep = degree_limit(
            h.family(t),
            domain,
            sched,
            window=window,
            per_axis=per_axis,
            budget=budget,
            prefer_selection=prefer_selection,
        )
        reports.append(rep)
        values.append(rep.value if rep.stabilized else None)
    passed = all(v is not None for v in values) and len(set(values)) == 1
    return HomotopyReport(
        ts=h.t_samples,
        margins=tuple(margins),
        reports=reports,
        value=values[0] if passed else None,
        passed=passed,
        eps_reg=float(eps_reg),
    )
