import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weilbench import lattice as L
from weilbench.errors import BudgetExceeded
from weilbench.exactlin import exact_trace


def rand(dims, seed):
    return L.random_boltzmann(np.random.default_rng(seed), dims)


def matpow_trace(A, k):
    P = np.array([[Fraction(int(i == j)) for j in range(A.shape[0])] for i in range(A.shape[0])], dtype=object)
    for _ in range(k):
        P = P.dot(A)
    return exact_trace(P)


def test_identity_weights():
    B = L.BoltzmannData.plain([2, 3], np.eye(6, dtype=object))
    for n, m in itertools.product(range(1, 4), repeat=2):
        assert L.partition_lattice(B, L.SublatticeD.nmk(n, m, 0)) == 2**m * 3**n


def test_product_weights():
    A = np.array([[Fraction(1), Fraction(2)], [Fraction(-1, 2), Fraction(3)]], dtype=object)
    Bm = np.array([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(1, 3)]], dtype=object)
    B = L.product_data([A, Bm])
    for n, m in itertools.product(range(1, 4), repeat=2):
        expected = matpow_trace(A, n) ** m * matpow_trace(Bm, m) ** n
        assert L.partition_lattice(B, L.SublatticeD.nmk(n, m, 0)) == expected
        assert L.partition_transfer(B, n, m) == expected


def test_single_vertex_is_full_trace():
    B = rand([2, 3], 0)
    assert L.partition_lattice(B, L.SublatticeD.rect(1, 1)) == exact_trace(B.R)


def test_sublattice_graphs():
    G = L.sublattice_graph(L.SublatticeD.nmk(2, 3, 0))
    assert G.size == 6 and G.commuting()
    sheared = L.sublattice_graph(L.SublatticeD.nmk(2, 2, 1))
    assert sheared.size == 4 and sheared.commuting()
    assert sheared.perms != L.sublattice_graph(L.SublatticeD.nmk(2, 2, 0)).perms


@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_hermite_form_preserves_index(rows):
    det = round(np.linalg.det(np.array(rows, dtype=float)))
    if det == 0:
        return
    lam = L.SublatticeD.from_columns(rows)
    assert lam.index == abs(det)
    # every generator reduces to zero
    for col in np.array(rows).T:
        assert lam.reduce(col) == (0, 0, 0)


def test_partition_is_basis_independent():
    B = rand([2, 2], 4)
    a = L.partition_lattice(B, L.SublatticeD.from_columns([[2, 1], [0, 2]]))
    b = L.partition_lattice(B, L.SublatticeD.from_columns([[2, 3], [0, 2]]))  # (3,2) = (1,2) + (2,0)
    c = L.partition_lattice(B, L.SublatticeD.from_columns([[3, 4], [2, 4]]))  # unimodular change
    assert a == b == c


def test_transfer_n1_is_partial_trace():
    B = rand([2, 3], 1)
    T4 = B.R.reshape(2, 3, 2, 3)
    partial = np.array([[sum(T4[a, i, a, j] for a in range(2)) for j in range(3)] for i in range(3)], dtype=object)
    assert np.array_equal(L.transfer_matrix(B, 1), partial)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_transfer_agrees_with_contraction(dims):
    B = rand(dims, sum(dims))
    for n, m in itertools.product(range(1, 4), repeat=2):
        g = L.partition_lattice(B, L.SublatticeD.nmk(n, m, 0))
        assert g == L.partition_transfer(B, n, m) == L.partition_transfer_vertical(B, n, m)
        for k in range(1, n):
            assert L.partition_sheared(B, n, m, k) == L.partition_lattice(B, L.SublatticeD.nmk(n, m, k))


def test_sheared_periodic_in_k():
    B = rand([2, 2], 9)
    for k in range(3):
        assert L.partition_sheared(B, 3, 2, k) == L.partition_sheared(B, 3, 2, k + 3)


def test_complex_weights():
    B0 = rand([2, 2], 2)
    B = L.BoltzmannData.plain([2, 2], np.vectorize(lambda v: complex(v) * 1j, otypes=[object])(B0.R))
    g = L.partition_lattice(B, L.SublatticeD.nmk(2, 2, 1))
    t = L.partition_transfer(B, 2, 2, 1)
    assert isinstance(g, complex) and abs(g - t) < 1e-9
    # four vertices each scaled by i, and i^4 = 1
    assert abs(g - complex(L.partition_lattice(B0, L.SublatticeD.nmk(2, 2, 1)))) < 1e-9


def test_json_round_trip():
    B = rand([2, 3], 3)
    back = L.BoltzmannData.from_json(B.to_json())
    assert back.dims == B.dims and np.array_equal(back.R, B.R)


def test_bad_shape():
    with pytest.raises(ValueError):
        L.BoltzmannData.plain([2, 2], np.eye(3, dtype=object))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reduction_d2(n):
    B = rand([2, 2], 10 + n)
    for m in (1, 2, 3):
        assert L.reduction_check(B, n, L.SublatticeD.rect(m))["equal"]
    R1 = L.dimensional_reduction(B, n)
    assert R1.d == 1
    for m in (1, 2, 3):
        assert matpow_trace(R1.R, m) == L.partition_lattice(B, L.SublatticeD.rect(m, n))


def test_reduction_n1_is_partial_trace():
    B = rand([2, 3], 5)
    R1 = L.dimensional_reduction(B, 1)
    T4 = B.R.reshape(2, 3, 2, 3)
    partial = np.array([[sum(T4[a, c, b, c] for c in range(3)) for b in range(2)] for a in range(2)], dtype=object)
    assert np.array_equal(R1.R, partial)


def test_reduction_d3():
    B = rand([2, 2, 2], 21)
    assert L.reduction_check(B, 2, L.SublatticeD.rect(2, 2))["equal"]
    assert L.reduction_check(B, 1, L.SublatticeD.from_columns([[2, 1], [0, 2]]))["equal"]


def test_reduction_twice():
    B = rand([2, 2, 2], 22)
    R2 = L.dimensional_reduction(B, 2)
    R1 = L.dimensional_reduction(R2, 2)
    assert R1.d == 1
    for m in (1, 2):
        assert matpow_trace(R1.R, m) == L.partition_lattice(B, L.SublatticeD.rect(m, 2, 2))


def test_observations():
    obs = L.observation_check(rand([2, 2], 30), 3, 3)
    assert obs["orientations_agree"] and obs["mismatches"] == 0
    assert all(c["rigorous"] and c["status"] == "match" for c in obs["rows"] + obs["columns"])


def test_super_even_data_matches_plain():
    B = rand([2, 2], 40)
    for n in (1, 2):
        T, P = L.supertrace_transfer(B, n)
        assert np.array_equal(T, L.transfer_matrix(B, n))
        assert np.array_equal(P, np.eye(P.shape[0], dtype=P.dtype))


def test_super_diagonal_sign_pattern():
    R = np.diag([Fraction(3), Fraction(2)])
    B = L.BoltzmannData(2, ((1, 1), (1, 0)), R)
    assert L.supertrace_sequence(B, 4) == [1, 5, 19, 65]
    assert L.supertrace_sequence(B, 4) == [3**n - 2**n for n in range(1, 5)]


def test_super_path_rejects_parity_mixing():
    R = np.array([[Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)]], dtype=object)
    with pytest.raises(ValueError):
        L.supertrace_transfer(L.BoltzmannData(2, ((1, 1), (1, 0)), R), 1)


def test_contraction_budget():
    with pytest.raises(BudgetExceeded):
        L.sublattice_graph(L.SublatticeD.rect(100, 100))
