"""End-to-end reproductions of three solvability arguments.

Each runner checks the hypotheses it relies on (aborting with
:class:`HypothesisViolated` or another named error when they fail), runs
the degree pipeline along the argument's homotopy, and certifies
solvability by extracting an approximate zero with a small inclusion
residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degree import (
    Homotopy,
    HomotopyReport,
    degree_limit,
    extract_zero,
    homotopy_check,
    inclusion_residual,
)
from .errors import (
    CapSensitive,
    HypothesisViolated,
    RadiusSearchFailed,
)
from .galerkin import Schedule, choose_epsilon
from .regions import BallDomain, boundary_samples
from .setval import (
    AuditReport,
    MonotoneMultiMap,
    capped_normal_cone_operator,
    convex_path,
    dual_gap_lower,
    duality_operator,
    monotonicity_audit,
    scale_operator,
    shift_operator,
    sum_operators,
)
from .space import Vec, project_section
from . import convex


def _default_schedule(schedule: Schedule | None) -> Schedule:
    return schedule if schedule is not None else Schedule((1, 2, 3, 4))


def _audit_or_raise(T: MonotoneMultiMap, region, n: int, rng, what: str) -> AuditReport:
    audit = monotonicity_audit(T, region, n, rng=rng)
    if not audit.passed:
        raise HypothesisViolated(
            f"{what} is not monotone on the domain "
            f"(worst pair gap {audit.worst_gap:.3g} at {audit.worst_pair})"
        )
    return audit


@dataclass(frozen=True)
class DeFigueiredoReport:
    degree: int
    zero: Vec
    residual: float
    lam_margins: dict[float, float]
    audit: AuditReport
    homotopy: HomotopyReport

    @property
    def ok(self) -> bool:
        return self.degree == 1


def run_defigueiredo(
    T: MonotoneMultiMap,
    *,
    radius: float = 1.0,
    schedule: Schedule | None = None,
    tol: float = 1e-6,
    lam_grid: tuple[float, ...] = (0.25, 1.0, 4.0),
    theta: float = 1e-9,
    seed: int = 0,
    per_axis: int | None = None,
) -> DeFigueiredoReport:
    """Degree one on a ball for a monotone operator whose translates by
    positive multiples of the duality map avoid zero on the boundary,
    established by deforming onto the duality map; solvability follows.
    """
    schedule = _default_schedule(schedule)
    sp = T.space
    domain = BallDomain((0.0,), radius, sp.p_y)
    n_max = max(schedule.n_list)
    rng = np.random.default_rng(seed)
    region = domain.section(n_max)
    audit = _audit_or_raise(T, region, n_max, rng, "operator")
    pts, _ = boundary_samples(region, per_axis)
    lam_margins: dict[float, float] = {}
    for lam in lam_grid:
        worst = np.inf
        for z in pts:
            shifted_val = convex.translate(
                T.value(z, n_max), float(lam) * sp.embedded_duality(z)
            )
            worst = min(worst, dual_gap_lower(sp, shifted_val))
        lam_margins[float(lam)] = float(worst)
        if worst <= theta:
            raise HypothesisViolated(
                f"boundary margin of T + {lam} * J vanishes ({worst:.3g})"
            )
    J = duality_operator(sp)
    hom = homotopy_check(
        Homotopy(convex_path(T, J)), domain, schedule, theta=theta, per_axis=per_axis
    )
    if not hom.passed:
        raise HypothesisViolated(
            "degree not constant along the deformation onto the duality map"
        )
    zero = extract_zero(T, domain, hom.reports[0], tol=tol)
    residual = inclusion_residual(T, zero.array(), zero.n)
    return DeFigueiredoReport(
        degree=int(hom.value),
        zero=zero,
        residual=float(residual),
        lam_margins=lam_margins,
        audit=audit,
        homotopy=hom,
    )


@dataclass(frozen=True)
class RangeTargetResult:
    target: tuple[float, ...]
    degree: int
    degree_doubled_cap: int
    zero: Vec | None
    residual: float | None


@dataclass(frozen=True)
class RangeReport:
    radius: float
    cap: float
    collar: float
    results: tuple[RangeTargetResult, ...]

    @property
    def ok(self) -> bool:
        return all(
            r.degree == 1 and r.residual is not None and r.residual <= 1e-6
            for r in self.results
        )


def run_range_Nr(
    f: MonotoneMultiMap,
    targets,
    *,
    radius: float = 1.0,
    cap: float = 8.0,
    collar: float = 0.25,
    schedule: Schedule | None = None,
    tol: float = 1e-6,
    band: float = 1e-9,
    seed: int = 0,
    per_axis: int | None = None,
) -> RangeReport:
    """Every target is reached by the truncated-normal-cone perturbation
    of a continuous monotone map on a ball: the degree of the shifted sum
    is one on a slightly enlarged ball, and doubling the truncation cap
    must not change it (otherwise the truncation was active and the run
    aborts as cap-sensitive)."""
    schedule = _default_schedule(schedule)
    sp = f.space
    if not f.single_valued:
        raise HypothesisViolated("perturbation must be single-valued continuous")
    domain = BallDomain((0.0,), radius * (1.0 + collar), sp.p_y)
    n_max = max(schedule.n_list)
    rng = np.random.default_rng(seed)
    _audit_or_raise(f, domain.section(n_max), n_max, rng, "perturbation")
    results = []
    for raw in targets:
        f0 = np.asarray(raw, dtype=float)
        degs = {}
        reports = {}
        ops = {}
        for c in (cap, 2.0 * cap):
            cone = capped_normal_cone_operator(sp, radius, c, band)
            T = shift_operator(sum_operators(cone, f), f0)
            rep = degree_limit(T, domain, schedule, per_axis=per_axis)
            degs[c] = rep.require_value()
            reports[c] = rep
            ops[c] = T
        if degs[cap] != degs[2.0 * cap]:
            raise CapSensitive(
                f"degree changed from {degs[cap]} to {degs[2.0 * cap]} when the "
                f"cap doubled; target {raw} needs a larger cap"
            )
        zero = None
        residual = None
        if degs[cap] != 0:
            zero = extract_zero(ops[2.0 * cap], domain, reports[2.0 * cap], tol=tol)
            residual = float(
                inclusion_residual(ops[2.0 * cap], zero.array(), zero.n)
            )
        results.append(
            RangeTargetResult(
                target=tuple(map(float, f0)),
                degree=int(degs[cap]),
                degree_doubled_cap=int(degs[2.0 * cap]),
                zero=zero,
                residual=residual,
            )
        )
    return RangeReport(
        radius=float(radius), cap=float(cap), collar=float(collar),
        results=tuple(results),
    )


@dataclass(frozen=True)
class BrowderTargetResult:
    target: tuple[float, ...]
    radius: float
    outward_margin: float
    degree: int
    zero: Vec
    residual: float


@dataclass(frozen=True)
class BrowderReport:
    results: tuple[BrowderTargetResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.degree == 1 and r.residual <= 1e-6 for r in self.results)


def run_browder_surjectivity(
    A: MonotoneMultiMap,
    targets,
    *,
    schedule: Schedule | None = None,
    r0: float = 1.0,
    theta: float = 1e-6,
    tol: float = 1e-6,
    max_doublings: int = 12,
    seed: int = 0,
    per_axis: int | None = None,
) -> BrowderReport:
    """Surjectivity of a coercive continuous monotone map: for each target
    a ball radius with uniformly outward boundary values is found by
    doubling, the shifted map is deformed onto a small multiple of the
    duality map, and the solution is extracted from the nonzero degree."""
    schedule = _default_schedule(schedule)
    sp = A.space
    if not A.single_valued:
        raise HypothesisViolated("operator must be single-valued continuous")
    n_max = max(schedule.n_list)
    rng = np.random.default_rng(seed)
    probe = BallDomain((0.0,), max(r0, 1.0), sp.p_y)
    _audit_or_raise(A, probe.section(n_max), n_max, rng, "operator")
    results = []
    for raw in targets:
        f0 = np.asarray(raw, dtype=float)
        f0_norm = float(np.linalg.norm(f0))
        r = float(r0)
        margin = -np.inf
        found = False
        for _ in range(max_doublings + 1):
            region = BallDomain((0.0,), r, sp.p_y).section(n_max)
            pts, _ = boundary_samples(region, per_axis)
            worst = np.inf
            for z in pts:
                az = A.point(z, n_max) - project_section(f0, n_max)
                worst = min(worst, float(np.dot(az, z)) / float(np.linalg.norm(z)))
            margin = worst
            if margin > theta * (1.0 + f0_norm):
                found = True
                break
            r *= 2.0
        if not found:
            raise RadiusSearchFailed(
                f"no radius up to {r} gives outward boundary values for {raw}"
            )
        domain = BallDomain((0.0,), r, sp.p_y)
        shifted = shift_operator(A, f0)
        eps_h = choose_epsilon(shifted, domain, n_max, per_axis=per_axis).eps
        J = duality_operator(sp)

        def family(t, shifted=shifted, J=J, eps_h=eps_h):
            return sum_operators(scale_operator(shifted, t), scale_operator(J, eps_h))

        hom = homotopy_check(
            Homotopy(family), domain, schedule, per_axis=per_axis
        )
        if not hom.passed or hom.value != 1:
            raise HypothesisViolated(
                f"deformation onto the duality map gave degree {hom.value}"
            )
        rep = degree_limit(shifted, domain, schedule, per_axis=per_axis)
        zero = extract_zero(shifted, domain, rep, tol=tol)
        residual = float(inclusion_residual(shifted, zero.array(), zero.n))
        results.append(
            BrowderTargetResult(
                target=tuple(map(float, f0)),
                radius=r,
                outward_margin=float(margin),
                degree=int(rep.require_value()),
                zero=zero,
                residual=residual,
            )
        )
    return BrowderReport(results=tuple(results))
