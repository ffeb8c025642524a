from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weilbench import exactlin as el
from weilbench.errors import SingularMatrix
from weilbench.exactlin import PowerSeries, RatPoly


def test_charpoly_identity():
    assert el.charpoly(el.identity(2)) == RatPoly([1, -2, 1])


@pytest.mark.parametrize("q,a", [(5, 2), (7, -3), (2, 1)])
def test_charpoly_weil_block(q, a):
    assert el.charpoly([[0, -q], [1, a]]) == RatPoly([q, -a, 1])


def test_charpoly_rational_entries():
    M = [[Fraction(1, 2), 1], [0, Fraction(-1, 3)]]
    assert el.charpoly(M) == RatPoly([Fraction(-1, 6), Fraction(-1, 6), 1])


def test_charpoly_modular_path_agrees():
    rng = np.random.default_rng(3)
    M = rng.integers(-4, 5, size=(45, 45))
    cp = el.charpoly(M)  # above the Berkowitz cutoff
    direct = list(reversed(el.berkowitz(el.to_object(M))))
    assert [int(c) for c in cp.coeffs] == direct


int_matrices = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(int_matrices)
@settings(max_examples=60, deadline=None)
def test_cayley_hamilton(rows):
    M = el.to_object(rows)
    P = el.charpoly(M).eval_matrix(M)
    assert not np.any(P != 0)


def test_inverse_examples():
    assert np.array_equal(el.rat_inverse(el.identity(3)), el.identity(3))
    assert el.rat_inverse([[1, 1], [0, 1]]).tolist() == [[1, -1], [0, 1]]


def test_inverse_random_rational():
    rng = np.random.default_rng(11)
    while True:
        M = np.array([[Fraction(int(a), int(b)) for a, b in zip(r1, r2)]
                      for r1, r2 in zip(rng.integers(-5, 6, (6, 6)), rng.integers(1, 5, (6, 6)))], dtype=object)
        if el.charpoly(M).coeffs[0] != 0:
            break
    assert np.array_equal(M.dot(el.rat_inverse(M)), el.identity(6))


def test_singular_inverse_raises():
    with pytest.raises(SingularMatrix):
        el.rat_inverse([[1, 2], [2, 4]])


@pytest.mark.parametrize("n", [5, 80])
def test_solve_exact(n):
    rng = np.random.default_rng(n)
    A = el.to_object(rng.integers(-9, 10, (n, n)) + 40 * np.eye(n, dtype=np.int64))
    b = list(rng.integers(-9, 10, n))
    x = el.solve_exact(A, b)
    assert [sum(A[i, j] * x[j] for j in range(n)) for i in range(n)] == b


@pytest.mark.parametrize("poly,expected", [([-4, 0, 1], [-2, 2]), ([-2, -1, 1], [-1, 2])])
def test_numeric_roots(poly, expected):
    rep = el.numeric_roots(RatPoly(poly))
    assert sorted(r.real for r in rep.all_roots()) == pytest.approx(expected, abs=1e-12)


def test_numeric_roots_residual():
    p = RatPoly.from_roots([Fraction(1, 3), 2, 2, -5])
    for r in el.numeric_roots(p).all_roots():
        assert abs(complex(p(r))) / max(abs(float(c)) for c in p.coeffs) < 1e-9


def test_berlekamp_massey_examples():
    r = el.berlekamp_massey([1, 2, 4, 8, 16])
    assert r.order == 1 and r.coeffs == (2,)
    r = el.berlekamp_massey([2, 8, 26, 80, 242])
    assert r.order == 2 and r.coeffs == (4, -3)
    assert el.berlekamp_massey([0, 0, 0, 0]).order == 0


def test_berlekamp_massey_too_short():
    assert el.berlekamp_massey([1, 0, 0, 5]) is None


def test_exp_sum_decompositions():
    twos = el.berlekamp_massey([2**n + 1 for n in range(1, 8)])
    dec = el.exp_sum_decompose(twos, start=1)
    assert dec.ok
    assert sorted((round(l.real), m) for l, m in dec.terms) == [(1, 1), (2, 1)]
    threes = el.berlekamp_massey([3**n - 1 for n in range(1, 8)])
    dec = el.exp_sum_decompose(threes, start=1)
    assert sorted((round(l.real), m) for l, m in dec.terms) == [(1, -1), (3, 1)]
    assert el.exp_sum_decompose(el.berlekamp_massey([0] * 6)).terms == []


exp_sums = st.lists(st.tuples(st.integers(-4, 4).filter(bool), st.integers(-3, 3).filter(bool)),
                    min_size=1, max_size=3, unique_by=lambda t: t[0])


@given(exp_sums)
@settings(max_examples=60, deadline=None)
def test_withheld_prediction_on_exponential_sums(terms):
    seq = [sum(m * lam**n for lam, m in terms) for n in range(1, 2 * len(terms) + 3)]
    res = el.withheld_check(seq, order_bound=len(terms))
    assert res["rigorous"] and res["status"] == "match"


def test_withheld_check_statuses():
    assert el.withheld_check([1, 0, 0, 0, 1])["status"] == "undetermined"
    bad = el.withheld_check([1, 1, 1, 1, 1, 2], order_bound=1)
    assert bad["rigorous"] and bad["status"] == "mismatch"


def test_trace_powers():
    M = [[Fraction(1, 2), 1], [0, 3]]
    assert el.trace_powers(M, 3) == [Fraction(7, 2), Fraction(37, 4), Fraction(217, 8)]


def test_series_examples():
    N = 10
    one_plus_t = PowerSeries([1, 1], N)
    assert one_plus_t.log().exp() == one_plus_t
    assert PowerSeries([1, 1], 4) * PowerSeries([1, -1], 4) == PowerSeries([1, 0, -1], 4)
    lg = PowerSeries([0] + [-Fraction(2**n, n) for n in range(1, 13)])
    assert lg.exp() == PowerSeries([1, -2], 12)
    assert el.series_op("add", one_plus_t, one_plus_t) == PowerSeries([2, 2], N)


def test_pade_examples():
    inv_sq = PowerSeries([n + 1 for n in range(8)])
    P, Q = el.pade(inv_sq, 0, 2)
    assert P == RatPoly([1]) and Q == RatPoly([1, -2, 1])
    P, Q = el.pade(PowerSeries([1, -2], 6), 1, 0)
    assert P == RatPoly([1, -2]) and Q == RatPoly([1])


def test_pade_rejects_finite_product_tail():
    # prod_{m<=3} (1 - 5^-m t)^m has degree 6, so a degree-5 numerator cannot match its tail
    s = PowerSeries([1], 8)
    for m in range(1, 4):
        for _ in range(m):
            s = s * PowerSeries([1, -Fraction(1, 5**m)], 8)
    assert el.pade(s, 5, 0) is None
    P, Q = el.pade(s, 6, 0)
    assert Q == RatPoly([1]) and P.degree == 6


def test_zeta_from_traces_examples():
    assert el.zeta_from_traces([2**n for n in range(1, 9)]) == PowerSeries([1, -2], 8)
    assert el.zeta_from_traces([0] * 5) == PowerSeries([1], 5)
    N = 9
    z = el.zeta_from_traces([2 * 3**n - 1 for n in range(1, N + 1)])
    expected = PowerSeries([1, -6, 9], N) * PowerSeries([1] * (N + 1))
    assert z == expected


@given(exp_sums, exp_sums)
@settings(max_examples=40, deadline=None)
def test_zeta_is_multiplicative(a, b):
    N = 8
    sa = [sum(m * lam**n for lam, m in a) for n in range(1, N + 1)]
    sb = [sum(m * lam**n for lam, m in b) for n in range(1, N + 1)]
    both = el.zeta_from_traces([x + y for x, y in zip(sa, sb)])
    assert both == el.zeta_from_traces(sa) * el.zeta_from_traces(sb)


def test_ratpoly_json_round_trip():
    p = RatPoly([Fraction(1, 3), 0, -2])
    assert RatPoly.from_json(p.to_json()) == p
    assert el.matrix_from_json(el.matrix_to_json([[Fraction(1, 2), 3]])).tolist() == [[Fraction(1, 2), 3]]
