import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weilbench.errors import BudgetExceeded, FieldMismatch
from weilbench.ff import (
    FieldDesc,
    build_dlog,
    embed,
    enumerate_field,
    extend_field,
    field_op,
    frobenius,
    make_field,
    quadratic_character,
    sqrt_count,
)

SMALL_FIELDS = [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (3, 2), (2, 3), (5, 2)]


def test_prime_field_basics():
    F = make_field(5)
    assert F.size == 5 and F.is_prime_field
    assert field_op(F(2), F(4), "add") == F(1)
    assert field_op(F(1), F(2), "div") == F(3)
    assert F(2).inverse() == F(3)


def test_f9_defining_relation():
    F = make_field(3, 2)
    assert F.size == 9
    assert F.modulus == (1, 0, 1)  # u^2 + 1
    u = F([0, 1])
    assert u * u == F(-1)


@pytest.mark.parametrize("p", [4, 6, 1, 9])
def test_non_prime_rejected(p):
    with pytest.raises(ValueError):
        make_field(p)


def test_budget_enforced():
    with pytest.raises(BudgetExceeded):
        make_field(2, 40)


def test_mismatched_fields():
    with pytest.raises(FieldMismatch):
        field_op(make_field(5)(1), make_field(7)(1), "add")


def test_division_by_zero():
    F = make_field(7)
    with pytest.raises(ZeroDivisionError):
        F(3) / F(0)


def test_sqrt_count_f5():
    F = make_field(5)
    assert [sqrt_count(F(a)) for a in (4, 0, 2)] == [2, 1, 0]


def test_quadratic_character_rejects_char_two():
    with pytest.raises(ValueError):
        quadratic_character(make_field(2)(1))


def test_dlog_generator_f7():
    dl = build_dlog(make_field(7))
    assert dl.generator == 3
    assert len(dl) == 6
    assert dl.table()[make_field(7)(3)] == 1


def test_second_generator_differs():
    F = make_field(7)
    assert build_dlog(F, 1).generator != build_dlog(F).generator


@pytest.mark.parametrize("p,e", SMALL_FIELDS)
def test_dlog_table_inverts_powers(p, e):
    F = make_field(p, e)
    dl = build_dlog(F)
    for x, k in dl.table().items():
        assert dl.generator**k == x
    assert len(dl.table()) == F.size - 1


@pytest.mark.parametrize("p,e", SMALL_FIELDS)
def test_enumeration_is_canonical(p, e):
    F = make_field(p, e)
    els = enumerate_field(F)
    assert len(els) == F.size == len(set(els))
    assert els[0] == F.zero and els[1] == F.one
    # prime-field constants come first
    assert [x.index for x in els[:p]] == list(range(p))


def test_tower_sizes_and_embedding():
    base = make_field(3)
    F9 = extend_field(base, 2)
    F81 = extend_field(F9, 2)
    assert F81.size == 81 and F81.prime_field == base and F81.root == F9
    x = F9([1, 2])
    y = embed(x, F81)
    assert y**9 == y  # fixed by the F_9 Frobenius
    assert embed(x * x, F81) == y * y


def test_frobenius_fixes_base():
    base = make_field(5)
    E = extend_field(base, 3)
    for i in range(5):
        assert frobenius(E(i)) == E(i)
    assert sum(1 for z in enumerate_field(E) if frobenius(z) == z) == 5


def test_frobenius_has_order_n():
    E = extend_field(make_field(2), 4)
    for z in enumerate_field(E):
        w = z
        for _ in range(4):
            w = frobenius(w)
        assert w == z


@pytest.mark.parametrize("p,e", [(3, 2), (2, 3)])
def test_json_round_trip(p, e):
    F = make_field(p, e)
    assert FieldDesc.from_json(F.to_json()) == F
    T = extend_field(F, 2)
    assert FieldDesc.from_json(T.to_json()) == T


field_and_elements = st.sampled_from(SMALL_FIELDS).flatmap(
    lambda pe: st.tuples(
        st.just(make_field(*pe)),
        st.integers(0, pe[0] ** pe[1] - 1),
        st.integers(0, pe[0] ** pe[1] - 1),
        st.integers(0, pe[0] ** pe[1] - 1),
    )
)


@given(field_and_elements)
@settings(max_examples=200, deadline=None)
def test_field_axioms(data):
    F, a, b, c = data
    x, y, z = F.element(a), F.element(b), F.element(c)
    assert x + y == y + x and x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == F.zero and x + (-x) == F.zero
    if y:
        assert (x / y) * y == x
        assert y ** (F.size - 1) == F.one


@given(st.sampled_from([(3, 1), (5, 1), (7, 1), (3, 2), (5, 2)]), st.data())
@settings(max_examples=100, deadline=None)
def test_sqrt_count_matches_enumeration(pe, data):
    F = make_field(*pe)
    a = F.element(data.draw(st.integers(0, F.size - 1)))
    assert sqrt_count(a) == sum(1 for w in enumerate_field(F) if w * w == a)
