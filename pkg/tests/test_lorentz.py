from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from hypglue import lorentz
from hypglue.exactnum import FieldElement
from hypglue.lorentz import LorentzVector, classify_pair, minkowski_inner, reflection_in

ints = st.integers(-4, 4)
vecs = st.lists(ints, min_size=5, max_size=5).map(lambda xs: LorentzVector(FieldElement(x) for x in xs))
spacelike = vecs.filter(lambda v: v.norm().sign() > 0)


def sympy_vector(v: LorentzVector):
    s2, s7 = sympy.sqrt(2), sympy.sqrt(7)
    out = []
    for x in v:
        a, b, c, d = (sympy.Rational(q.numerator, q.denominator) for q in x.coords)
        out.append(a + b * s2 + c * s7 + d * s2 * s7)
    return out


def sympy_gram_entry(u, v):
    u, v = sympy_vector(u), sympy_vector(v)
    ip = -u[0] * v[0] + sum(u[i] * v[i] for i in range(1, 5))
    nu = -u[0] ** 2 + sum(x ** 2 for x in u[1:])
    nv = -v[0] ** 2 + sum(x ** 2 for x in v[1:])
    return sympy.nsimplify(sympy.radsimp(ip / sympy.sqrt(nu * nv)))


def test_shipped_vectors_are_spacelike(vectors):
    assert sorted(vectors) == sorted(["t", "b", "u", "l", "c", "i0", "i1", "i2"])
    assert all(v.kind() == "spacelike" for v in vectors.values())


def test_gram_against_sympy(vectors):
    order = list(vectors)
    gram = lorentz.gram_matrix([vectors[n] for n in order])
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            ref = sympy_gram_entry(vectors[a], vectors[b])
            entry = gram[i][j]
            assert entry.sign == sympy.sign(ref)
            sq = sympy.nsimplify(ref ** 2)
            assert entry.square == FieldElement(Fraction(int(sq.p), int(sq.q)))


def test_gram_reference_magnitudes(vectors, data_dir):
    order, ref = lorentz.load_gram_reference(data_dir / "gram_reference.txt")
    gram = lorentz.gram_matrix([vectors[n] for n in order])
    assert all(gram[i][j].magnitude_equals(ref[i][j]) for i in range(8) for j in range(8))
    flips = {(order[i], order[j]) for i in range(8) for j in range(i + 1, 8)
             if gram[i][j].sign != ref[i][j].sign}
    # the outward normals give -√7/2 where +√7/2 is printed
    assert flips == {("u", "i1"), ("l", "i2")}


def test_sign_flips_reproduced_by_negating_u_and_l(vectors, data_dir):
    order, ref = lorentz.load_gram_reference(data_dir / "gram_reference.txt")
    flipped = dict(vectors)
    for n in ("u", "l"):
        flipped[n] = -flipped[n]
    gram = lorentz.gram_matrix([flipped[n] for n in order])
    assert all(gram[i][j].sign == ref[i][j].sign for i in range(8) for j in range(8))


def test_parse_gram_entry():
    e = lorentz.parse_gram_entry("√7/2")
    assert (e.sign, e.square) == (1, FieldElement(Fraction(7, 4)))
    assert lorentz.parse_gram_entry("-1/2").render() == "-1/2"
    assert lorentz.parse_gram_entry("sqrt7").render() == "√7"
    assert lorentz.parse_gram_entry("0").sign == 0


@given(spacelike, vecs)
def test_reflection_properties(v, x):
    r = reflection_in(v)
    assert (r @ r).is_identity()
    assert r(v) == -v
    assert minkowski_inner(r(x), r(x)) == minkowski_inner(x, x)
    assert r.det() == -1


def test_classify_pair(vectors):
    assert classify_pair(vectors["t"], vectors["i1"]).dihedral() == Fraction(1, 3)
    assert classify_pair(vectors["t"], vectors["b"]).kind == "tangent"
    uc = classify_pair(vectors["u"], vectors["i1"])
    assert uc.kind == "ultraparallel" and uc.value == FieldElement(Fraction(7, 4))
    assert classify_pair(vectors["c"], vectors["t"]).dihedral() == Fraction(1, 2)


def test_not_spacelike_rejected():
    timelike = LorentzVector([FieldElement(1)] + [FieldElement(0)] * 4)
    with pytest.raises(lorentz.NotSpacelikeError):
        reflection_in(timelike)


def test_load_vectors_errors(tmp_path):
    bad = tmp_path / "v.txt"
    bad.write_text("t 1 2 3\n")
    with pytest.raises(ValueError, match="v.txt:1"):
        lorentz.load_vectors(bad)
    bad.write_text("t" + " 0 0 0 0" * 5 + "\n" + "t" + " 0 0 0 0" * 5 + "\n")
    with pytest.raises(ValueError, match="duplicate"):
        lorentz.load_vectors(bad)


def test_vectors_roundtrip(vectors, tmp_path):
    f = tmp_path / "v.txt"
    f.write_text(lorentz.dump_vectors(vectors))
    assert lorentz.load_vectors(f) == vectors
