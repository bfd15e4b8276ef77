import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abzeta.groupalg import NkElement, nk_mul_t, nk_pow_t
from abzeta.membership import GoodBasis, in_Bt, in_Bt_by_closure, is_good_basis, sift


def test_good_basis_condition():
    assert is_good_basis(GoodBasis(2, 0, 0, 0, 5))
    assert not is_good_basis(GoodBasis(2, 2, 0, 0, 2))
    assert is_good_basis(GoodBasis(2, 2, 1, 0, 2))


def test_trivial_memberships():
    ident = GoodBasis(3, 1, 0, 0, 0)
    assert all(in_Bt(ident, e) for e in [(0, 0, 0), (5, -2, 7), (1, 1, 1)])
    diag = GoodBasis(3, 0, 1, 1, 1)
    assert not in_Bt(diag, (1, 0, 0))
    assert in_Bt(diag, (3, 0, 0))


def test_sift_third_step():
    t = GoodBasis(2, 2, 1, 0, 1)
    assert not in_Bt(t, (2, 0, 1))
    assert sift(t, (2, 0, 2)) == (1, 0, 1)


def test_element_and_triple_agree():
    t = GoodBasis(2, 2, 1, 1, 2, t12=1, t13=3, t23=1)
    assert in_Bt(t, NkElement(2, (2, 3, 5))) == in_Bt(t, (2, 3, 5))
    with pytest.raises(ValueError):
        in_Bt(t, NkElement(1, (0, 0, 0)))


@st.composite
def bases(draw):
    p = draw(st.sampled_from([2, 3]))
    k = draw(st.sampled_from([0, 1, 2, 3, 4]))
    a, b, c = (draw(st.integers(0, 2)) for _ in range(3))
    if a + b + c > (4 if p == 2 else 2):  # keep the closure quotient small
        a, b, c = min(a, 1), min(b, 1), 0
    t = GoodBasis(
        p, k, a, b, c,
        draw(st.integers(0, p**b - 1)),
        draw(st.integers(0, p**c - 1)),
        draw(st.integers(0, p**c - 1)),
    )
    return t


@settings(max_examples=80, deadline=None)
@given(bases(), st.tuples(*(st.integers(-9, 9),) * 3))
def test_sift_matches_closure(t, e):
    if not is_good_basis(t):
        return
    assert in_Bt(t, e) == in_Bt_by_closure(t, e)


@settings(max_examples=80, deadline=None)
@given(bases(), st.lists(st.tuples(st.integers(0, 2), st.integers(-3, 3)), max_size=5))
def test_products_of_rows_are_members(t, word):
    if not is_good_basis(t):
        return
    rows = t.rows()
    e = (0, 0, 0)
    for i, n in word:
        e = nk_mul_t(e, nk_pow_t(rows[i], n, t.k), t.k)
    assert in_Bt(t, e)
    l1, l2, l3 = sift(t, e)
    rebuilt = nk_mul_t(
        nk_mul_t(nk_pow_t(rows[0], l1, t.k), nk_pow_t(rows[1], l2, t.k), t.k),
        nk_pow_t(rows[2], l3, t.k),
        t.k,
    )
    assert rebuilt == e


def test_exhaustive_small_cases():
    for k, (a, b, c) in itertools.product([1, 2], itertools.product(range(2), repeat=3)):
        t = GoodBasis(2, k, a, b, c, t12=b, t13=c, t23=0)
        if not is_good_basis(t):
            continue
        for e in itertools.product(range(-2, 3), repeat=3):
            assert in_Bt(t, e) == in_Bt_by_closure(t, e), (t, e)
