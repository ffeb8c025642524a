import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weilbench import dynamics as dyn
from weilbench.errors import BudgetExceeded, Degenerate
from weilbench.exactlin import RatPoly


def test_chebyshev_examples():
    assert dyn.chebyshev_poly(0) == RatPoly([2])
    assert dyn.chebyshev_poly(1) == RatPoly([0, 1])
    assert dyn.chebyshev_poly(2) == RatPoly([-2, 0, 1])
    assert dyn.chebyshev_poly(3) == RatPoly([0, -3, 0, 1])


def test_chebyshev_rejects_negative():
    with pytest.raises(ValueError):
        dyn.chebyshev_poly(-1)


@pytest.mark.parametrize("a,b", [(2, 3), (1, 5), (2, 2), (8, 8), (0, 3), (4, 0)])
def test_semigroup_examples(a, b):
    assert dyn.cheb_semigroup_check(a, b)


@given(st.floats(0, 6.28), st.integers(0, 12))
@settings(max_examples=100, deadline=None)
def test_chebyshev_on_circle(theta, a):
    x = 2 * np.cos(theta)
    assert float(dyn.chebyshev_poly(a)(x)) == pytest.approx(2 * np.cos(a * theta), abs=1e-6)


def test_fixed_points_q2():
    r = dyn.cheb_fixed_points(2, 1)
    assert r.count_1d == 2 and r.values == pytest.approx([-1, 2])
    assert r.count_3d == 8 and r.count_3d_interior == 1
    assert dyn.cheb_fixed_points(2, 2).count_1d == 4
    r3 = dyn.cheb_fixed_points(3, 1)
    assert r3.count_1d == 3 and r3.agree


@pytest.mark.parametrize("q,n", [(2, 5), (3, 4), (5, 3), (7, 2), (9, 2)])
def test_fixed_points_agree_with_numeric_roots(q, n):
    r = dyn.cheb_fixed_points(q, n)
    assert r.agree and r.count_1d == r.numeric_count == q**n


def test_fixed_point_budget():
    with pytest.raises(BudgetExceeded):
        dyn.cheb_fixed_points(10, 6)


def test_torus_block_from_elliptic_poly():
    e = dyn.torus_from_weil_poly(RatPoly([2, -1, 1]))
    assert e.A.tolist() == [[0, -2], [1, 1]]
    assert not e.symplectic_unverified
    assert dyn.symplectic_scaling_check(e, 2)
    assert dyn.torus_fixed_count(e, 1) == 2 == 2 + 1 - 1


def test_torus_companion_fallback():
    # x^4 + x + 1 has no x^2 - a x + q factor
    e = dyn.torus_from_weil_poly(RatPoly([1, 1, 0, 0, 1]))
    assert e.symplectic_unverified
    assert e.A.shape == (4, 4)


@pytest.mark.parametrize("coeffs", [[1, 0, 2], [2, 1, 1, 1], [3, 0, 0, 1]])
def test_torus_rejects_bad_polys(coeffs):
    with pytest.raises(ValueError):
        dyn.torus_from_weil_poly(RatPoly(coeffs))


def test_identity_is_degenerate():
    with pytest.raises(Degenerate):
        dyn.torus_fixed_count(dyn.TorusEndo(np.eye(2, dtype=np.int64)), 1)


def test_symplectic_examples():
    assert dyn.symplectic_scaling_check(np.diag([2, 2]), 4)
    assert dyn.symplectic_scaling_check(np.array([[1, 1], [0, 1]]), 1)
    assert not dyn.symplectic_scaling_check(np.diag([2, 3]), 4)


weil_blocks = st.integers(2, 9).flatmap(
    lambda q: st.tuples(st.just(q), st.lists(st.integers(-int((4 * q) ** 0.5), int((4 * q) ** 0.5)),
                                             min_size=1, max_size=3))
)


@given(weil_blocks)
@settings(max_examples=40, deadline=None)
def test_block_construction_properties(data):
    q, traces = data
    p = RatPoly([1])
    for a in traces:
        p = p * RatPoly([q, -a, 1])
    e = dyn.torus_from_weil_poly(p)
    assert sorted(e.traces) == sorted(traces)
    assert dyn.symplectic_scaling_check(e, q)
    for n in range(1, 4):
        count = dyn.torus_fixed_count(e, n)
        assert count == dyn.weil_block_count(q, traces, n) == dyn.resultant_count(e, n)


def test_fixed_count_is_multiplicative():
    a = dyn.torus_from_weil_poly(RatPoly([3, -1, 1]))
    b = dyn.torus_from_weil_poly(RatPoly([3, 2, 1]))
    ab = dyn.torus_from_weil_poly(RatPoly([3, -1, 1]) * RatPoly([3, 2, 1]))
    for n in range(1, 6):
        assert dyn.torus_fixed_count(ab, n) == dyn.torus_fixed_count(a, n) * dyn.torus_fixed_count(b, n)
