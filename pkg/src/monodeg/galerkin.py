"""Assembly of regularized finite-rank sections.

Each section of the operator is replaced by an eps_n-accurate continuous
selection plus ``eps_reg`` times the embedded duality map, producing the
finite-dimensional maps whose Brouwer degrees the pipeline stabilizes.
``choose_epsilon`` computes the safe regularization weight: any value
below (boundary gap of the operator in the dual norm) divided by (largest
embedded norm of a boundary point) keeps boundary values away from zero
uniformly in the section index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .brouwer import FiniteMap
from .errors import BadParams, BoundaryHitsZero
from .regions import BallRegion, Domain, boundary_samples
from .selection import Selection, build_selection
from .setval import MonotoneMultiMap, dual_gap_lower


@dataclass(frozen=True)
class Schedule:
    """Section indices and accuracy sequence of a pipeline run.

    ``eps_reg`` is either a positive number or ``"auto"``; the selection
    accuracies default to eps_reg / 2**(j+1) along the list, so they
    decrease to zero while staying below the regularization weight.
    """

    n_list: tuple[int, ...]
    eps_reg: float | str = "auto"
    eps_list: tuple[float, ...] | None = None

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_list)
        if not ns or any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise BadParams("n_list must be strictly increasing positive integers")
        object.__setattr__(self, "n_list", ns)
        if isinstance(self.eps_reg, str):
            if self.eps_reg != "auto":
                raise BadParams("eps_reg must be a positive number or 'auto'")
        elif not (np.isfinite(self.eps_reg) and self.eps_reg > 0):
            raise BadParams("eps_reg must be a positive number or 'auto'")
        if self.eps_list is not None:
            es = tuple(float(e) for e in self.eps_list)
            if len(es) != len(ns) or any(e <= 0 for e in es):
                raise BadParams("eps_list must give one positive value per section")
            object.__setattr__(self, "eps_list", es)

    def eps_n(self, j: int, eps_reg: float) -> float:
        if self.eps_list is not None:
            return self.eps_list[j]
        return eps_reg / 2.0 ** (j + 1)

    def halved(self) -> "Schedule":
        """Same sections with both accuracy knobs halved."""
        eps_reg = self.eps_reg if self.eps_reg == "auto" else self.eps_reg / 2.0
        eps_list = None if self.eps_list is None else tuple(e / 2.0 for e in self.eps_list)
        return Schedule(self.n_list, eps_reg, eps_list)


@dataclass(frozen=True)
class EpsilonReport:
    eps: float
    bound: float
    boundary_gap: float
    max_embed_norm: float
    n: int
    samples: int


def choose_epsilon(
    T: MonotoneMultiMap,
    domain: Domain,
    n: int,
    *,
    per_axis: int | None = None,
    safety: float = 0.5,
) -> EpsilonReport:
    """Regularization weight from the boundary gap of the section.

    The gap is a conservative lower bound of the dual norm of the operator
    values on the sampled boundary; the embedded norms carry a mesh slack
    so their maximum is not undersampled.  The returned eps is ``safety``
    times the ratio.
    """
    sp = T.space
    region = domain.section(n)
    pts, mesh = boundary_samples(region, per_axis)
    gap = np.inf
    emax = 0.0
    for z in pts:
        gap = min(gap, dual_gap_lower(sp, T.value(z, n)))
        emax = max(emax, sp.embed_norm(z))
    if gap <= 0.0:
        raise BoundaryHitsZero("operator boundary values reach the target")
    w = sp.weight_array(n)
    stretch = float(n) ** max(0.0, 1.0 / sp.p_x - 0.5)
    emax += float(np.max(w)) * mesh * stretch
    bound = gap / emax
    return EpsilonReport(
        eps=float(safety * bound),
        bound=float(bound),
        boundary_gap=float(gap),
        max_embed_norm=float(emax),
        n=n,
        samples=len(pts),
    )


@dataclass
class AssembledSection:
    """Selection plus duality regularization on one section."""

    fm: FiniteMap
    selection: Selection
    region: object
    n: int
    eps_n: float
    eps_reg: float


def assemble(
    T: MonotoneMultiMap,
    domain: Domain,
    n: int,
    eps_n: float,
    eps_reg: float,
    *,
    prefer_selection: str | None = None,
) -> AssembledSection:
    """Build the regularized section map sel + eps_reg * Jn.

    The assembled map of a monotone operator is strictly monotone up to
    the selection accuracy, so the engine is told to try the unique-zero
    fast path first (it falls back to subdivision if that looks wrong).
    """
    if eps_reg <= 0:
        raise BadParams("eps_reg must be positive")
    sp = T.space
    region = domain.section(n)
    sel = build_selection(T, n, eps_n, region, prefer=prefer_selection)

    def fn(y):
        return sel.eval(y) + eps_reg * sp.embedded_duality(y)

    hint = None
    if sel.lipschitz is not None and sp.p_x == 2.0:
        w = sp.weight_array(n)
        hint = sel.lipschitz + eps_reg * float(np.max(w * w))
    lambdas = [v for k, v in sel.meta.items() if k.startswith("lambda")]
    fm = FiniteMap(
        fn,
        dim=n,
        lipschitz_hint=hint,
        unique_zero_hint=True,
        margin_floor=_monotone_floor(sp, sel, region, n, eps_reg),
        fd_step=min(lambdas) / 8.0 if lambdas else None,
        label=f"{T.label}+{eps_reg:.3g}*Jn",
    )
    return AssembledSection(fm, sel, region, n, float(eps_n), float(eps_reg))


def _monotone_floor(sp, sel, region, n: int, eps_reg: float) -> float | None:
    """Boundary lower bound for ||sel + eps_reg * Jn|| on an origin-centred
    ball: a monotone selection pairs non-negatively against y - 0, so
    <g(y), y> >= eps_reg * ||w y||_{p_x}^2 - ||sel(0)|| * ||y||_2, which is
    mesh-independent (exact and resolvent selections are monotone maps
    whenever the operator itself is)."""
    if sel.method == "partition_of_unity":
        return None
    if not isinstance(region, BallRegion) or float(
        np.max(np.abs(np.asarray(region.center)))
    ) > 1e-12 * (1.0 + region.radius):
        return None
    r = float(region.radius)
    w_min = float(np.min(sp.weight_array(n)))
    a = r * min(1.0, float(n) ** (1.0 / sp.p_x - 1.0 / region.p))
    b2 = r * max(1.0, float(n) ** (0.5 - 1.0 / region.p))
    v0 = float(np.linalg.norm(sel.eval(np.zeros(n))))
    floor = eps_reg * (w_min * a) ** 2 / b2 - v0
    return floor if floor > 0.0 else None


def pairing_identity_check(
    sp, n: int, *, trials: int = 64, rng: np.random.Generator | None = None
) -> float:
    """Max deviation between the duality pairing of a functional with an
    embedded section vector and the dot product of its rank-n image with
    the coefficients.  Zero up to rounding by construction."""
    rng = rng or np.random.default_rng(1)
    worst = 0.0
    w = sp.weight_array(n)
    for _ in range(trials):
        xstar = rng.standard_normal(n + 3)
        y = rng.standard_normal(n)
        direct = float(np.dot(xstar[:n], w * y))
        image = float(np.dot(sp.finite_rank_image(xstar, n), y))
        worst = max(worst, abs(direct - image))
    return worst
