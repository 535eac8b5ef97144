"""Weighted sequence-space pair with a diagonal compact embedding.

Both spaces are modelled by finite coefficient vectors against the unit
coordinate basis.  A point of the source space with coefficients ``y`` is
embedded as ``w * y``; dual functionals are stored through their
coefficient image ``s`` with ``s_k = w_k * x*_k``, so that the duality
pairing of a functional with an embedded source vector is the plain dot
product ``s . y``.  All norms below act on coefficient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels as _k
from .errors import BadParams, DimensionMismatch


def conjugate_exponent(p: float) -> float:
    return p / (p - 1.0)


@dataclass(frozen=True)
class WeightRule:
    """Rule generating the positive embedding weights w_1, w_2, ...

    kinds:
      ``ones``      w_k = 1
      ``constant``  w_k = value
      ``harmonic``  w_k = scale / (k + offset), k starting at 1
      ``list``      explicit finite prefix; asking beyond it is an error
    """

    kind: str = "ones"
    value: float = 1.0
    scale: float = 1.0
    offset: float = 0.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("ones", "constant", "harmonic", "list"):
            raise BadParams(f"unknown weight kind {self.kind!r}")
        if self.kind == "constant" and not (np.isfinite(self.value) and self.value > 0):
            raise BadParams("constant weight must be positive and finite")
        if self.kind == "harmonic":
            if not (np.isfinite(self.scale) and self.scale > 0):
                raise BadParams("harmonic scale must be positive and finite")
            if self.offset <= -1.0:
                raise BadParams("harmonic offset must exceed -1")
        if self.kind == "list":
            vals = np.asarray(self.values, dtype=float)
            if vals.size == 0 or not np.all(np.isfinite(vals)) or not np.all(vals > 0):
                raise BadParams("weight list must be non-empty, positive, finite")

    def array(self, n: int) -> np.ndarray:
        if n < 0:
            raise BadParams("section index must be non-negative")
        if self.kind == "ones":
            return np.ones(n)
        if self.kind == "constant":
            return np.full(n, float(self.value))
        if self.kind == "harmonic":
            k = np.arange(1, n + 1, dtype=float)
            return self.scale / (k + self.offset)
        if n > len(self.values):
            raise BadParams(
                f"weight list has {len(self.values)} entries, section {n} requested"
            )
        return np.asarray(self.values[:n], dtype=float)


@dataclass(frozen=True)
class SpacePair:
    """Exponents and weights fixing the two spaces and the embedding."""

    p_x: float = 2.0
    p_y: float = 2.0
    weights: WeightRule = field(default_factory=WeightRule)

    def __post_init__(self):
        for name, p in (("p_x", self.p_x), ("p_y", self.p_y)):
            if not (np.isfinite(p) and 1.0 < p):
                raise BadParams(f"{name} must lie in (1, inf), got {p}")

    @property
    def q_x(self) -> float:
        """Conjugate exponent of the target space."""
        return conjugate_exponent(self.p_x)

    def weight_array(self, n: int) -> np.ndarray:
        return self.weights.array(n)

    def norm_y(self, c) -> float:
        return _k.lp_norm(np.asarray(c, dtype=float), self.p_y)

    def norm_x(self, c) -> float:
        return _k.lp_norm(np.asarray(c, dtype=float), self.p_x)

    def embed(self, c) -> np.ndarray:
        """Coefficients of i(y) in the target space: w * c."""
        c = np.asarray(c, dtype=float)
        return self.weight_array(c.shape[0]) * c

    def embed_norm(self, c) -> float:
        """Target-space norm of the embedded vector, ||w*c||_{p_x}."""
        return self.norm_x(self.embed(c))

    def duality_x(self, x) -> np.ndarray:
        """Duality map of the target space applied to coefficients x."""
        return _k.duality_map(np.asarray(x, dtype=float), self.p_x)

    def embedded_duality(self, c) -> np.ndarray:
        """Coefficient image of J(i(y)): component k is w_k * J(w*c)_k."""
        c = np.asarray(c, dtype=float)
        return _k.embedded_duality(c, self.weight_array(c.shape[0]), self.p_x)

    def embedded_duality_batch(self, C) -> np.ndarray:
        C = np.asarray(C, dtype=float)
        return _k.embedded_duality_batch(C, self.weight_array(C.shape[1]), self.p_x)

    def pairing(self, s, c) -> float:
        """<x*, i(y)> from the coefficient image s and source coefficients c."""
        s = np.asarray(s, dtype=float)
        c = np.asarray(c, dtype=float)
        if s.shape != c.shape:
            raise DimensionMismatch(f"pairing of shapes {s.shape} and {c.shape}")
        return float(np.dot(s, c))

    def finite_rank_image(self, xstar, n: int) -> np.ndarray:
        """Coefficient image of the rank-n projection of a functional.

        The projection sends x* to sum_k <x*, i(e_k)> e_k; its coefficient
        image is w_k * x*_k for k < n.
        """
        xstar = np.asarray(xstar, dtype=float)
        out = np.zeros(n)
        m = min(n, xstar.shape[0])
        out[:m] = self.weight_array(n)[:m] * xstar[:m]
        return out

    def dual_norm_image(self, s) -> float:
        """Dual norm of the functional whose coefficient image is s."""
        s = np.asarray(s, dtype=float)
        w = self.weight_array(s.shape[0])
        return _k.lp_norm(s / w, self.q_x)


def make_space(p_x: float = 2.0, p_y: float = 2.0, weights: WeightRule | None = None) -> SpacePair:
    return SpacePair(p_x=p_x, p_y=p_y, weights=weights or WeightRule())


def basis(k: int, n: int) -> np.ndarray:
    """k-th coordinate basis vector of the rank-n section (0-based)."""
    if not 0 <= k < n:
        raise DimensionMismatch(f"basis index {k} outside section {n}")
    e = np.zeros(n)
    e[k] = 1.0
    return e


def project_section(c, n: int) -> np.ndarray:
    """First n coefficients, zero-padded when c is shorter."""
    c = np.asarray(c, dtype=float)
    out = np.zeros(n)
    m = min(n, c.shape[0])
    out[:m] = c[:m]
    return out


@dataclass(frozen=True)
class Vec:
    """A point of the source space given by section coefficients."""

    coeffs: tuple[float, ...]
    n: int

    @classmethod
    def of(cls, c, n: int | None = None) -> "Vec":
        c = np.asarray(c, dtype=float)
        return cls(tuple(float(v) for v in c), n if n is not None else c.shape[0])

    def array(self, n: int | None = None) -> np.ndarray:
        return project_section(np.asarray(self.coeffs), n if n is not None else self.n)
