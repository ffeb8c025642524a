import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weilbench import exactlin, hecke
from weilbench.errors import BudgetExceeded
from weilbench.ff import make_field


@pytest.fixture(scope="module")
def fam52():
    return hecke.hecke_family(hecke.make_params(5, 2))


def test_f_t_examples():
    F = make_field(5)
    assert hecke.f_t_eval(F(2), F(1), F(1), F(1)) == 1
    assert hecke.f_t_eval(F(2), F(0), F(0), F(0)) == 4
    G = make_field(7)
    assert hecke.f_t_eval(G(3), G(1), G(2), G(3)) == hecke.f_t_eval(G(3), G(3), G(1), G(2))


@given(st.sampled_from([5, 7, 9]), st.data())
@settings(max_examples=60, deadline=None)
def test_f_t_symmetric(q, data):
    F = hecke.field_for_q(q)
    t, x, y, z = (F.element(data.draw(st.integers(0, q - 1))) for _ in range(4))
    v = hecke.f_t_eval(t, x, y, z)
    assert v == hecke.f_t_eval(t, y, z, x) == hecke.f_t_eval(t, z, y, x)


def test_params_reject_bad_t():
    with pytest.raises(ValueError):
        hecke.make_params(5, 1)
    with pytest.raises(ValueError):
        hecke.make_params(5, 0)
    with pytest.raises(ValueError):
        hecke.make_params(4, 2)


def test_three_correction_pairs_for_generic_x(fam52):
    params = fam52.params
    main = np.array([[hecke.sqrt_count(hecke.f_t_eval(params.t_embedded, params.field(3), params.field(y),
                                                        params.field(z))) - 2 for z in range(5)]
                     for y in range(5)])
    off = fam52.T[3] - main
    off[3, :] -= 6  # the q+1 correction on the row y = x
    assert sorted(map(tuple, np.argwhere(off))) == sorted(map(tuple, np.argwhere(off == -5)))
    assert len(np.argwhere(off)) == 3


def test_vectorised_family_matches_scalar_entries(fam52):
    p = fam52.params
    for x in range(5):
        for y in range(5):
            for z in range(5):
                assert fam52.T[x, y, z] == hecke.hecke_entry(p, x, y, z)


def test_literal_reading_diagonal_correction():
    p = hecke.make_params(5, 2)
    # the verbatim formula subtracts q+1 at x = y = 0
    assert hecke.literal_entry(p, 0, 0, 0) == -6


def test_literal_reading_fails_sum_identity():
    p = hecke.make_params(5, 2)
    lit = np.array([[[hecke.literal_entry(p, x, y, z) for z in range(5)] for y in range(5)] for x in range(5)])
    assert not np.array_equal(lit.sum(axis=0), np.eye(5, dtype=np.int64))


def test_exact_properties_q5(fam52):
    rep = hecke.verify_properties(fam52)
    assert rep.passed
    klein = next(c for c in rep.checks if c.name == "klein_group")
    assert klein.detail["sign"] == -1
    T = fam52.T
    assert np.array_equal(T[2] @ T[3], T[3] @ T[2])
    assert np.array_equal(T[0] @ T[1], -T[2])


def test_negated_family_realises_plain_klein_product(fam52):
    neg = fam52.negated()
    T = neg.T
    assert np.array_equal(T[0] @ T[1], T[2])
    assert np.array_equal(T.sum(axis=0), -np.eye(5, dtype=np.int64))
    assert hecke.check_klein_group(neg).detail["sign"] == 1


def test_q7_suite():
    assert hecke.verify_properties(hecke.hecke_family(hecke.make_params(7, 3))).passed


def test_sum_identity_detects_corruption(fam52):
    bad = hecke.HeckeFamily(fam52.params, fam52.T.copy())
    bad.T[3, 1, 1] += 1
    c = hecke.check_sum_identity(bad)
    assert c.status == "fail" and c.witness == {"y": 1, "z": 1, "value": 2}
    assert hecke.check_closure(bad).status == "fail"


def test_spectrum_bounds_x3(fam52):
    roots = hecke.spectrum(fam52.T[3])
    assert all(abs(r.imag) <= 1e-9 and abs(r.real) <= 2 * math.sqrt(5) + 1e-9 for r in roots)


def test_level_two_lift(fam52):
    # eigenvalue xi = -(l + conj l); the lift is -s_2(-xi) = 2q - xi^2
    assert hecke.check_weil_lift(fam52, 2).status == "pass"
    ext = hecke.hecke_family(hecke.make_params(5, 2, 2))
    spec2 = hecke.spectrum(ext.T[3])
    for xi in hecke.spectrum(fam52.T[3]):
        assert min(abs(v - (10 - xi**2)) for v in spec2) < 1e-6


def test_literal_lift_on_negated_family(fam52):
    neg = fam52.negated()
    ext = hecke.hecke_family(hecke.make_params(5, 2, 2)).negated()
    spec2 = hecke.spectrum(ext.T[3])
    for xi in hecke.spectrum(neg.T[3]):
        assert min(abs(v - (xi**2 - 10)) for v in spec2) < 1e-6
    assert hecke.check_weil_lift(neg, 2, ext_family=ext).status == "pass"


def test_weil_lift_recurrence():
    assert hecke.weil_lift(3.0, 2, 5) == 3.0**2 - 10
    assert hecke.weil_lift(3.0, 3, 5) == pytest.approx(27 - 45)


def test_t_tan_properties(fam52):
    Tt = hecke.t_tan(fam52)
    scaled = hecke.t_tan_scaled(fam52)
    assert np.array_equal(Tt * 5, scaled.astype(object))
    for x in range(5):
        A = fam52.T[x].astype(object)
        assert np.array_equal(Tt.dot(A), A.dot(Tt))
    roots = exactlin.numeric_roots(exactlin.charpoly(Tt)).all_roots()
    assert all(abs(r.imag) < 1e-9 and abs(r.real) <= 2 * math.sqrt(5) + 1e-9 for r in roots)


def test_d_values_q5(fam52):
    assert hecke.trace_d(fam52) == Fraction(25, 32) == Fraction(75, 96)
    assert hecke.trace_with_d(fam52, [3]) == Fraction(5, 16)
    assert hecke.check_trace_identities(fam52).status == "pass"


def test_d_value_q7():
    fam = hecke.hecke_family(hecke.make_params(7, 3))
    assert hecke.trace_with_d(fam, [2]) == Fraction(7, 36)


@pytest.mark.parametrize("q,t", [(5, 2), (5, 3), (7, 3)])
def test_d_coordinates_match_dense_inverse(q, t):
    fam = hecke.hecke_family(hecke.make_params(q, t))
    D = hecke.d_operator(hecke.t_tan(fam), q)
    d = hecke.d_coordinates(fam)
    combo = sum((fam.T[y].astype(object) * dy for y, dy in enumerate(d)), np.zeros((q, q), dtype=object))
    assert np.array_equal(combo, D)
    assert exactlin.exact_trace(D) == hecke.expected_trace_d(q)
    assert exactlin.exact_trace(fam.T[q - 1].astype(object).dot(D)) == hecke.expected_trace_td(q)


def test_negated_family_flips_trace_sign(fam52):
    assert hecke.trace_with_d(fam52.negated(), [3]) == -Fraction(5, 16)


def test_product_coordinates_follow_closure(fam52):
    a = hecke.product_coordinates(fam52, [2, 3, 4])
    prod = fam52.T[2] @ fam52.T[3] @ fam52.T[4]
    assert np.array_equal(sum(c * fam52.T[z] for z, c in enumerate(a)), prod)


def test_degeneracy_report(fam52):
    hist = hecke.degeneracy_histogram(fam52.T[3])
    assert sum(k * v for k, v in hist.items()) == 5
    pattern = hecke.charpoly_degree_pattern(fam52.T[3])
    assert sum(d * m for d, m in pattern) == 5


def test_family_budget():
    with pytest.raises(BudgetExceeded):
        hecke.hecke_family(hecke.make_params(5, 2, 4), budget=400)
