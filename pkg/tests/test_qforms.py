from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st
from sympy import factorint

from hypglue import qforms
from hypglue.qforms import INF, RationalQuadraticForm, hilbert_symbol

nonzero_int = st.integers(-400, 400).filter(bool)
nonzero_q = st.builds(Fraction, nonzero_int, st.integers(1, 60))


def places_for(*xs: Fraction) -> list:
    return sorted(qforms.prime_support(list(xs) + [2])) + [INF]


def squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorint(abs(n)).values())


# ---------------------------------------------------------------- Hilbert symbol

@settings(max_examples=1000)
@given(nonzero_q, nonzero_q, nonzero_q)
def test_hilbert_symbol_laws(a, b, c):
    for p in places_for(a, b, c):
        assert hilbert_symbol(a, b, p) == hilbert_symbol(b, a, p)
        assert hilbert_symbol(a * c, b, p) == hilbert_symbol(a, b, p) * hilbert_symbol(c, b, p)
        assert hilbert_symbol(a, -a, p) == 1
        assert hilbert_symbol(a, b * b, p) == 1
        if a != 1:
            assert hilbert_symbol(a, 1 - a, p) == 1


@settings(max_examples=1000)
@given(nonzero_q, nonzero_q)
def test_product_formula(a, b):
    assert math.prod(hilbert_symbol(a, b, p) for p in places_for(a, b)) == 1


def _solvable(a: int, b: int) -> bool:
    """Nontrivial integer solution of a x^2 + b y^2 = z^2 within Holzer's bound."""
    bx, by, bz = math.isqrt(abs(b)), math.isqrt(abs(a)), math.isqrt(abs(a * b))
    for x in range(bx + 1):
        for y in range(-by, by + 1):
            v = a * x * x + b * y * y
            if v < 0:
                continue
            z = math.isqrt(v)
            if z * z == v and (x, y, z) != (0, 0, 0) and z <= bz:
                return True
    return False


def test_hilbert_symbol_against_global_solvability():
    checked = 0
    for a in range(-30, 31):
        for b in range(-30, 31):
            if not (squarefree(a) and squarefree(b)) or math.gcd(a, b) != 1:
                continue
            local = all(hilbert_symbol(a, b, p) == 1 for p in places_for(Fraction(a), Fraction(b)))
            assert local == _solvable(a, b), (a, b)
            checked += 1
    assert checked > 500


@pytest.mark.parametrize("a,b,p,want", [
    (-1, -1, 2, -1), (-1, -1, INF, -1), (-1, -1, 3, 1),
    (2, 3, 3, -1), (3, 3, 3, -1), (2, 5, 5, -1), (5, 5, 5, 1),
    (7, 2, 7, 1), (3, 7, 7, -1), (Fraction(1, 2), 3, 3, -1),
])
def test_hilbert_symbol_values(a, b, p, want):
    assert hilbert_symbol(a, b, p) == want


def test_hilbert_symbol_of_zero():
    with pytest.raises(qforms.FormError):
        hilbert_symbol(0, 3, 3)


# ---------------------------------------------------------------- the shipped form

def test_shipped_form(form):
    assert form.signature() == (4, 1)
    assert qforms.ramification_set(form) == frozenset({2, 7})


def test_hasse_invariant_independent_of_pivot_order(form):
    orders = list(permutations(range(5)))[::7][:24]
    assert len(orders) >= 10
    ref_diag, _ = qforms.diagonalize(form)
    places = places_for(*ref_diag, form.det(), Fraction(7), Fraction(3))
    ref = qforms.local_invariants(ref_diag, places)
    for order in orders:
        diag, t = qforms.diagonalize(form, order)
        assert qforms.check_congruence(form, diag, t)
        assert qforms.square_class_equal(math.prod(diag), form.det())
        assert qforms.local_invariants(diag, places) == ref


def test_published_diagonal_is_half_the_form(form):
    diag, _ = qforms.diagonalize(form)
    published = [Fraction(7, 2), Fraction(1, 2), Fraction(1, 6), Fraction(-3, 8), Fraction(1, 8)]
    # same Hasse invariants, different determinant class: it is q/2, not q
    assert not qforms.square_class_equal(math.prod(diag), math.prod(published))
    assert qforms.congruence_equivalent([x / 2 for x in diag], published)
    places = places_for(*diag, *published)
    assert qforms.local_invariants(diag, places) == qforms.local_invariants(published, places)
    assert qforms.ramification_set(RationalQuadraticForm.diagonal(published)) == frozenset({2, 7})


def test_trivial_form():
    q = RationalQuadraticForm.diagonal([1, 1, 1, 1, -1])
    assert qforms.ramification_set(q) == frozenset()


def test_classes_distinct(form, data_dir):
    refs = qforms.load_references(data_dir / "reference_classes.json")
    sep = qforms.separate_classes(form, refs)
    assert sep["distinct"] and sep["verdict"] == "5 classes distinct"
    assert sep["table"]["class 4"] == "non-arithmetic"
    # a class equal to ours would clash
    refs["twin"] = frozenset({2, 7})
    assert not qforms.separate_classes(form, refs)["distinct"]


# ---------------------------------------------------------------- ramification properties

@st.composite
def lorentzian_forms(draw):
    n = draw(st.sampled_from([3, 5]))
    diag = [draw(st.builds(Fraction, st.integers(1, 40), st.integers(1, 12))) for _ in range(n)]
    diag[draw(st.integers(0, n - 1))] *= -1
    # mix the variables by a random unipotent integer matrix
    t = [[1 if i == j else (draw(st.integers(-2, 2)) if j > i else 0) for j in range(n)] for i in range(n)]
    rows = [[sum(t[k][i] * diag[k] * t[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return RationalQuadraticForm(rows)


@settings(max_examples=200)
@given(lorentzian_forms())
def test_ramification_set_has_even_size(q):
    ram = qforms.ramification_set(q)
    assert len(ram) % 2 == 0


@settings(max_examples=25)
@given(lorentzian_forms(), st.lists(nonzero_q, min_size=20, max_size=20))
def test_ramification_similarity_invariant(q, scalings):
    ram = qforms.ramification_set(q)
    for lam in scalings:
        assert qforms.ramification_set(q.scaled(lam)) == ram


@settings(max_examples=40)
@given(nonzero_q)
def test_shipped_form_scalings(lam):
    from hypglue.cli import default_data_dir
    q = qforms.load_form(default_data_dir() / "qform.txt")
    assert qforms.ramification_set(q.scaled(lam)) == frozenset({2, 7})


def test_form_errors(tmp_path):
    with pytest.raises(qforms.FormError):
        qforms.ramification_set(RationalQuadraticForm.diagonal([1, 1, -1, -1, 1]))
    with pytest.raises(qforms.FormError):
        qforms.ramification_set(RationalQuadraticForm.diagonal([1, 1, 1, -1]))
    with pytest.raises((qforms.FormError, ValueError)):
        RationalQuadraticForm([[1, 2], [3, 4]])
    f = tmp_path / "q.txt"
    f.write_text("2\n1 0\n0\n")
    with pytest.raises((qforms.FormError, ValueError)):
        qforms.load_form(f)


def test_form_text_roundtrip(form):
    assert qforms.parse_form(form.to_text()).matrix == form.matrix
