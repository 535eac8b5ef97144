"""Stabilized degree pipeline, zero extraction, homotopy audit."""

import numpy as np
import pytest

from monodeg import (
    BadParams,
    BallDomain,
    DegreeReport,
    Homotopy,
    NotStabilized,
    Schedule,
    degree_limit,
    extract_zero,
    homotopy_check,
    inclusion_residual,
    make_space,
)
from monodeg.degree import SectionEntry
from monodeg.errors import InadmissibleHomotopy, ResidualNotMet
from monodeg.setval import (
    convex_path,
    diag_operator,
    duality_operator,
    shift_operator,
    sign_operator,
    sum_operators,
)

SP = make_space()
DOM2 = BallDomain((0.0, 0.0), 1.0)


# ---------------------------------------------------------------- pipeline
def test_degree_limit_stabilizes_immediately_for_linear_operator():
    rep = degree_limit(diag_operator(SP, 2.0), DOM2, Schedule((1, 2, 3, 4)))
    assert rep.stabilized and rep.value == 1
    assert rep.stabilized_at == 1
    assert rep.eps_source == "auto" and rep.eps_reg > 0
    assert [e.degree for e in rep.entries] == [1, 1, 1, 1]
    assert all(e.margin is not None and e.margin > 0 for e in rep.entries)
    assert all(e.error is None for e in rep.entries)
    assert rep.require_value() == 1


def test_degree_limit_with_explicit_eps_reg():
    rep = degree_limit(
        diag_operator(SP, 1.0), DOM2, Schedule((1, 2, 3), eps_reg=0.05)
    )
    assert rep.eps_source == "given" and rep.eps_reg == 0.05
    assert rep.value == 1
    # default per-section accuracies halve along the schedule
    assert [e.eps_n for e in rep.entries] == pytest.approx([0.025, 0.0125, 0.00625])


def test_degree_limit_set_valued_operator():
    T = sum_operators(sign_operator(SP, 1.0), diag_operator(SP, 1.0))
    rep = degree_limit(T, DOM2, Schedule((1, 2)), window=2)
    assert rep.value == 1


def test_flip_flopping_trace_is_not_stabilized():
    T = diag_operator(SP, [1.0, -1.0, 1.0, -1.0])
    rep = degree_limit(T, BallDomain((0.0,) * 4, 1.0), Schedule((1, 2, 3, 4)))
    assert [e.degree for e in rep.entries] == [1, -1, -1, 1]
    assert not rep.stabilized and rep.value is None
    with pytest.raises(NotStabilized) as exc:
        rep.require_value()
    assert "trace" in str(exc.value)


def test_late_disagreement_defeats_stabilization():
    # degrees 1,1,1 then -1: the window agrees but the tail disagrees
    T = diag_operator(SP, [1.0, 1.0, 1.0, -1.0])
    rep = degree_limit(T, BallDomain((0.0,) * 4, 1.0), Schedule((1, 2, 3, 4)))
    assert [e.degree for e in rep.entries] == [1, 1, 1, -1]
    assert not rep.stabilized


def test_window_parameter():
    T = diag_operator(SP, 1.0)
    rep = degree_limit(T, DOM2, Schedule((1, 2)), window=2)
    assert rep.stabilized and rep.window == 2
    short = degree_limit(T, DOM2, Schedule((1, 2)), window=3)
    assert not short.stabilized  # cannot certify a window longer than the trace


def test_inclusion_residual_hand_value():
    T = shift_operator(diag_operator(SP, 2.0), [1.0, 0.0])
    assert inclusion_residual(T, [0.5, 0.0], 2) == pytest.approx(0.0, abs=1e-15)
    assert inclusion_residual(T, [0.0, 0.0], 2) == pytest.approx(1.0)


# ---------------------------------------------------------------- extraction
def test_extract_zero_matches_closed_form():
    lam = 2.0
    f0 = np.array([0.5, -0.25, 0.125])
    T = shift_operator(diag_operator(SP, lam), f0)
    dom = BallDomain((0.0, 0.0, 0.0), 1.0)
    rep = degree_limit(T, dom, Schedule((1, 2, 3)))
    assert rep.value == 1
    y = extract_zero(T, dom, rep, tol=1e-9)
    np.testing.assert_allclose(y.array(), f0 / lam, atol=1e-8)
    assert inclusion_residual(T, y.array(), y.n) <= 1e-9


def test_extract_zero_set_valued_inclusion():
    # zero of sign + diag shifted by a target inside the sign interval:
    # at the origin the value box [-1,1]^2 - f0 contains 0
    T = shift_operator(
        sum_operators(sign_operator(SP, 1.0), diag_operator(SP, 1.0)), [0.5, -0.5]
    )
    rep = degree_limit(T, DOM2, Schedule((1, 2)), window=2)
    assert rep.value == 1
    y = extract_zero(T, DOM2, rep, tol=1e-8)
    assert inclusion_residual(T, y.array(), y.n) <= 1e-8
    np.testing.assert_allclose(y.array(), [0.0, 0.0], atol=1e-6)


def test_extract_zero_requires_nonzero_degree():
    entries = [SectionEntry(1, 0.1, 0, 0.5, None), SectionEntry(2, 0.05, 0, 0.5, None)]
    rep = DegreeReport(
        entries=entries, window=2, stabilized=True, value=0, stabilized_at=1,
        eps_reg=0.1, eps_source="given",
    )
    with pytest.raises(BadParams):
        extract_zero(diag_operator(SP, 1.0), DOM2, rep)


def test_extract_zero_requires_stabilized_report():
    rep = DegreeReport(
        entries=[], window=3, stabilized=False, value=None, stabilized_at=None,
        eps_reg=0.1, eps_source="given",
    )
    with pytest.raises(NotStabilized):
        extract_zero(diag_operator(SP, 1.0), DOM2, rep)


def test_extract_zero_unreachable_tolerance_reports_best_residual():
    T = shift_operator(diag_operator(SP, 2.0), [0.5, 0.0])
    rep = degree_limit(T, DOM2, Schedule((1, 2)), window=2)
    with pytest.raises(ResidualNotMet) as exc:
        extract_zero(T, DOM2, rep, tol=-1.0, max_halvings=3)
    assert exc.value.best_residual >= 0.0


# ---------------------------------------------------------------- homotopy
def test_homotopy_validation():
    T = diag_operator(SP, 1.0)
    with pytest.raises(BadParams):
        Homotopy(lambda t: T, t_samples=(0.0, 1.5))
    with pytest.raises(BadParams):
        Homotopy(lambda t: T, t_samples=(0.5,))
    assert len(Homotopy(lambda t: T).t_samples) == 11


def test_homotopy_constant_degree_along_convex_path():
    h = Homotopy(convex_path(duality_operator(SP), diag_operator(SP, 2.0)))
    rep = homotopy_check(h, DOM2, Schedule((1, 2)), window=2)
    assert rep.passed and rep.value == 1
    assert len(rep.reports) == len(rep.ts) == 11
    assert all(m > 0 for m in rep.margins)
    assert rep.eps_reg > 0


def test_homotopy_inadmissible_family_raises():
    # at t = 0.5 the slice maps the boundary point (1, 0) to the target
    path = convex_path(
        duality_operator(SP), shift_operator(diag_operator(SP, 1.0), [2.0, 0.0])
    )
    h = Homotopy(path, t_samples=(0.0, 0.5, 1.0))
    with pytest.raises(InadmissibleHomotopy) as exc:
        homotopy_check(h, DOM2, Schedule((1, 2)))
    assert "0.5" in str(exc.value)


def test_homotopy_degree_change_fails_without_margin_collapse():
    # the middle eigenvalue of diag(1, 1-2t, 1) crosses zero at t = 0.5; the
    # sampled grid avoids the crossing, so every slice keeps a healthy
    # margin and a stabilized section trace, yet the degree flips sign and
    # the constancy check reports failure rather than raising
    def family(t):
        return diag_operator(SP, [1.0, 1.0 - 2.0 * t, 1.0])

    h = Homotopy(family, t_samples=(0.0, 0.4, 0.6, 1.0))
    dom3 = BallDomain((0.0, 0.0, 0.0), 1.0)
    rep = homotopy_check(h, dom3, Schedule((2, 3)), window=2, theta=1e-12)
    assert not rep.passed and rep.value is None
    vals = [r.value for r in rep.reports]
    assert vals == [1, 1, -1, -1]


def test_homotopy_explicit_eps_reg_is_used():
    h = Homotopy(
        convex_path(duality_operator(SP), diag_operator(SP, 2.0)),
        t_samples=(0.0, 0.5, 1.0),
    )
    rep = homotopy_check(h, DOM2, Schedule((1, 2), eps_reg=0.05), window=2)
    assert rep.eps_reg == 0.05 and rep.passed
