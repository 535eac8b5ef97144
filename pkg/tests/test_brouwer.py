"""Finite-dimensional degree engine against classical oracles."""

import numpy as np
import pytest

from monodeg.brouwer import (
    FiniteMap,
    boundary_distance,
    degree,
    degree_1d,
    find_zeros,
    winding_degree,
)
from monodeg.errors import (
    BoundaryTooClose,
    BudgetExhausted,
    DegenerateZero,
    DimensionMismatch,
    ZeroOnBoundarySample,
)
from monodeg.regions import BallRegion, BoxRegion


def _fm(fn, dim, **kw):
    return FiniteMap(fn=fn, dim=dim, **kw)


def _ball(n, r=1.0):
    return BallRegion((0.0,) * n, r)


# ---------------------------------------------------------------- oracles
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_identity_has_degree_one(n):
    fm = _fm(lambda x: x, n, lipschitz_hint=1.0, unique_zero_hint=True)
    assert degree(fm, _ball(n)) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_antipode_has_degree_minus_one_to_the_n(n):
    fm = _fm(lambda x: -x, n, lipschitz_hint=1.0, unique_zero_hint=True)
    assert degree(fm, _ball(n)) == (-1) ** n


def test_1d_polynomial_with_two_opposing_zeros_has_degree_zero():
    fm = _fm(lambda x: x * x - 0.25, 1)
    region = BoxRegion((-1.0,), (1.0,))
    assert degree(fm, region) == 0
    assert degree_1d(fm, region) == 0


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_planar_powers_match_winding_oracle(k):
    def fn(x):
        z = complex(x[0], x[1])
        w = z**k if k >= 0 else np.conj(z) ** (-k)
        if k == 0:
            w = complex(1.0, 0.0)
        return np.array([w.real, w.imag])

    fm = _fm(fn, 2)
    region = _ball(2)
    assert winding_degree(fm, region) == k
    if k != 0:
        assert degree(fm, region) == k
    else:
        # no zero inside: the engine reports an empty zero set
        assert degree(fm, region) == 0


def test_orientation_preserving_linear_map():
    A = np.array([[2.0, 1.0], [0.5, 1.0]])  # det > 0
    fm = _fm(lambda x: A @ x, 2, unique_zero_hint=True)
    assert degree(fm, _ball(2)) == 1
    assert winding_degree(fm, _ball(2)) == 1
    B = np.array([[0.0, 1.0], [1.0, 0.0]])  # det < 0
    assert degree(_fm(lambda x: B @ x, 2), _ball(2)) == -1


def test_degenerate_zero_rescued_by_target_shift():
    # planar z^2 has a degenerate zero at the origin; inner shifts recover 2
    def fn(x):
        z = complex(x[0], x[1]) ** 2
        return np.array([z.real, z.imag])

    assert degree(_fm(fn, 2), _ball(2)) == 2


def test_1d_cubic_degree_one_despite_flat_origin():
    fm = _fm(lambda x: x**3, 1)
    assert degree(fm, BoxRegion((-1.0,), (1.0,))) == 1


def test_flat_zero_is_flagged_degenerate_before_rescue():
    # the raw zero finder must refuse the cubically flat zero of x^3: a
    # residual-tolerance iterate cannot localize it
    fm = _fm(lambda x: x**3, 1)
    with pytest.raises(DegenerateZero):
        find_zeros(fm, BoxRegion((-1.0,), (1.0,)))


def test_mixed_degenerate_coordinates_rescued():
    fm = _fm(lambda x: np.array([x[0] ** 3, x[1]]), 2)
    assert degree(fm, _ball(2)) == 1


# ---------------------------------------------------------------- zeros
def test_find_zeros_subdivision_locates_all_three():
    fm = _fm(lambda x: x**3 - 0.25 * x, 1)
    search = find_zeros(fm, BoxRegion((-0.8,), (0.8,)))
    assert search.method == "subdivision"
    assert len(search.zeros) == 3
    pts = sorted(z.point[0] for z in search.zeros)
    np.testing.assert_allclose(pts, [-0.5, 0.0, 0.5], atol=1e-8)
    assert search.degree == 1  # signs: +1, -1, +1


def test_find_zeros_unique_hint_skips_subdivision():
    fm = _fm(lambda x: 2.0 * x, 3, unique_zero_hint=True)
    search = find_zeros(fm, _ball(3))
    assert search.method == "unique"
    assert len(search.zeros) == 1
    assert search.zeros[0].sign == 1


def test_budget_exhaustion():
    fm = _fm(lambda x: x**3 - 0.25 * x, 1)
    with pytest.raises(BudgetExhausted):
        find_zeros(fm, BoxRegion((-0.8,), (0.8,)), budget=3)


def test_zero_outside_region_not_counted():
    fm = _fm(lambda x: x - 2.0, 1, unique_zero_hint=True)
    search = find_zeros(fm, BoxRegion((-1.0,), (1.0,)))
    assert search.zeros == ()
    # degree needs the boundary margin; here it is fine (values 1 and 3)
    assert degree(fm, BoxRegion((-1.0,), (1.0,))) == 0


# ---------------------------------------------------------------- margins
def test_boundary_distance_without_hints_is_non_rigorous():
    fm = _fm(lambda x: x, 2)
    br = boundary_distance(fm, _ball(2))
    assert not br.rigorous
    assert br.margin == br.min_norm == pytest.approx(1.0)


def test_boundary_distance_with_lipschitz_hint_is_rigorous():
    fm = _fm(lambda x: x, 3, lipschitz_hint=1.0)
    br = boundary_distance(fm, _ball(3))
    assert br.rigorous
    assert 0.0 < br.margin < br.min_norm
    assert br.margin == pytest.approx(br.min_norm - br.mesh / 2.0)


def test_boundary_distance_refines_inconclusive_certificate():
    # an over-conservative Lipschitz hint defeats the default lattice; the
    # margin loop refines until the certificate turns positive
    fm = _fm(lambda x: x, 3, lipschitz_hint=10.0)
    br = boundary_distance(fm, _ball(3))
    assert br.rigorous
    assert br.samples > 2 * 3 * 9 ** 2  # refined beyond the default lattice
    assert br.margin > 0


def test_boundary_distance_falls_back_when_refinement_capped():
    # a hopeless hint can never certify: the report degrades to the sampled
    # minimum and is flagged non-rigorous rather than failing
    fm = _fm(lambda x: x, 3, lipschitz_hint=1e9)
    br = boundary_distance(fm, _ball(3))
    assert not br.rigorous
    assert br.margin == br.min_norm


def test_boundary_distance_uses_margin_floor():
    fm = _fm(lambda x: x, 2, margin_floor=0.25)
    br = boundary_distance(fm, _ball(2))
    assert br.rigorous
    assert br.margin == pytest.approx(0.25)


def test_zero_on_boundary_sample_raises():
    fm = _fm(lambda x: x - np.array([1.0, 0.0]), 2)
    with pytest.raises(ZeroOnBoundarySample):
        boundary_distance(fm, _ball(2))
    with pytest.raises(ZeroOnBoundarySample):
        degree_1d(_fm(lambda x: x - 1.0, 1), BoxRegion((-1.0,), (1.0,)))


def test_tiny_margin_raises_boundary_too_close():
    fm = _fm(lambda x: 1e-10 * x, 2)
    with pytest.raises(BoundaryTooClose):
        degree(fm, _ball(2))


# ---------------------------------------------------------------- mechanics
def test_eval_shape_checks():
    fm = _fm(lambda x: x, 2)
    with pytest.raises(DimensionMismatch):
        fm.eval([1.0, 2.0, 3.0])


def test_eval_batch_matches_batch_fn():
    fm = _fm(lambda x: 2.0 * x, 2, batch_fn=lambda P: 2.0 * P)
    P = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(fm.eval_batch(P), _fm(lambda x: 2.0 * x, 2).eval_batch(P))


def test_shifted_map_adjusts_floor_and_values():
    fm = _fm(lambda x: x, 2, margin_floor=0.5, lipschitz_hint=1.0,
             batch_fn=lambda P: P.copy())
    sh = fm.shifted([0.1, 0.0])
    np.testing.assert_allclose(sh.eval([0.0, 0.0]), [-0.1, 0.0])
    np.testing.assert_allclose(sh.eval_batch([[0.0, 0.0]]), [[-0.1, 0.0]])
    assert sh.margin_floor == pytest.approx(0.4)
    assert sh.lipschitz_hint == 1.0


def test_winding_needs_planar_region():
    with pytest.raises(DimensionMismatch):
        winding_degree(_fm(lambda x: x, 3), _ball(3))


def test_winding_on_box_loop():
    fm = _fm(lambda x: x, 2)
    assert winding_degree(fm, BoxRegion((-1.0, -1.0), (1.0, 1.0))) == 1


def test_winding_zero_on_loop_raises():
    fm = _fm(lambda x: x - np.array([1.0, 0.0]), 2)
    with pytest.raises(ZeroOnBoundarySample):
        winding_degree(fm, _ball(2))
