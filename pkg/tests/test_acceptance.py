"""The nine acceptance criteria, each checked exactly.

Every test records a PASS/FAIL line, printed in the terminal summary.  Three
criteria do not hold for the shipped data; they are computed in full and
marked as expected failures (strict, so an unexpected pass is reported).
The reasons are given in the markers.
"""

from __future__ import annotations

import math
import random
import shutil
from fractions import Fraction
from itertools import permutations
from pathlib import Path

import pytest

from hypglue import cli, polytope, qforms
from hypglue.qforms import INF, RationalQuadraticForm, hilbert_symbol

from conftest import ACCEPTANCE

DATA = cli.default_data_dir()


def record(n: int, what: str, checks: dict[str, bool]) -> None:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    ACCEPTANCE[n] = (ok, what + ("" if ok else f" (failed: {', '.join(failed)})"))
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {what}")
    assert ok, f"criterion {n} failed checks: {failed}"


def checks_of(cert, stage: str, names) -> dict[str, bool]:
    st = cert.stages[stage]
    out = {f"{stage}:{n}": st.checks.get(n, False) for n in names}
    if st.error:
        out[f"{stage}:error"] = False
    return out


def test_1_gram_and_diagram(cert):
    st = cert.stages["q-diagram"]
    record(1, "Gram matrix magnitudes and Coxeter diagram", {
        **checks_of(cert, "q-diagram", ["gram_magnitudes_match", "diagram_matches_file"]),
        "8 vectors": len(st.values["gram_order"]) == 8,
        "no mismatched pair": not st.values.get("gram_mismatches"),
    })


def test_2_euler_and_groups(cert):
    v = cert.stages["q-euler"].values
    record(2, "chi_orb(Q) = 1/60, |G_I| = 24, |G_V| = 120", {
        "chi_orb": v["chi_orb"] == Fraction(1, 60),
        "G_I": v["order_G_I"] == 24,
        "G_V": v["order_G_V"] == 120,
        **checks_of(cert, "q-euler", ["orders_match_diagram"]),
    })


@pytest.mark.xfail(strict=True, reason=(
    "the published diagonal has determinant class -14 while q has -7: it is congruent "
    "to q/2, not to q (Hasse invariants agree everywhere, ramification {2,7} is unaffected)"))
def test_3_quadratic_form(cert, form):
    st = cert.stages["q-arithmetic"]
    diag, _ = qforms.diagonalize(form)
    published = [Fraction(x) for x in ("7/2", "1/2", "1/6", "-3/8", "1/8")]
    places = sorted(set(qforms.candidate_places(diag)) | set(qforms.candidate_places(published)),
                    key=qforms.place_key)
    record(3, "form: signature, diagonal congruence, ramification {2,7}, classes distinct", {
        "signature (4,1)": form.signature() == (4, 1),
        "same det square class": qforms.square_class_equal(math.prod(diag), math.prod(published)),
        "same Hasse invariants": qforms.local_invariants(diag, places)
        == qforms.local_invariants(published, places),
        "ramification {2,7}": qforms.ramification_set(form) == frozenset({2, 7}),
        "trivial form unramified": qforms.ramification_set(
            RationalQuadraticForm.diagonal([1, 1, 1, 1, -1])) == frozenset(),
        "five classes distinct": st.values["verdict"] == "5 classes distinct",
        **checks_of(cert, "q-arithmetic", ["diagonalization_exact", "classes_distinct"]),
    })


def test_4_number_theory_suite(form):
    rng = random.Random(20260418)

    def rand_q() -> Fraction:
        return Fraction(rng.choice([-1, 1]) * rng.randint(1, 500), rng.randint(1, 80))

    failures = 0
    pairs = 0
    for _ in range(1200):
        a, b, c = rand_q(), rand_q(), rand_q()
        places = sorted(qforms.prime_support([a, b, c, 2])) + [INF]
        for p in places:
            failures += hilbert_symbol(a, b, p) != hilbert_symbol(b, a, p)
            failures += hilbert_symbol(a * c, b, p) != hilbert_symbol(a, b, p) * hilbert_symbol(c, b, p)
            failures += hilbert_symbol(a, -a, p) != 1
        failures += math.prod(hilbert_symbol(a, b, p) for p in places) != 1
        pairs += 1

    orders = rng.sample(list(permutations(range(5))), 12)
    ref, _ = qforms.diagonalize(form)
    places = qforms.candidate_places(ref)
    for order in orders:
        diag, _ = qforms.diagonalize(form, order)
        places_o = sorted(set(places) | set(qforms.candidate_places(diag)), key=qforms.place_key)
        failures += qforms.local_invariants(diag, places_o) != qforms.local_invariants(ref, places_o)
        failures += not qforms.square_class_equal(math.prod(diag), math.prod(ref))

    scalings = [rand_q() for _ in range(25)]
    forms = [form] + [RationalQuadraticForm.diagonal([abs(rand_q()) for _ in range(4)] + [-abs(rand_q())])
                      for _ in range(10)]
    for q in forms:
        ram = qforms.ramification_set(q)
        failures += len(ram) % 2
        for lam in scalings:
            failures += qforms.ramification_set(q.scaled(lam)) != ram

    record(4, f"Hilbert symbol laws on {pairs} pairs, Hasse over {len(orders)} pivot orders, "
              f"ramification parity and {len(scalings)} scalings", {
        "at least 1000 pairs": pairs >= 1000,
        "at least 10 pivot orders": len(orders) >= 10,
        "at least 20 scalings": len(scalings) >= 20,
        "zero failures": failures == 0,
    })


def test_5_polytope(cert, P):
    sym = cert.stages["p-symmetry"].values["isom"]
    a = P.antipodal
    lab = polytope.FacetLabel.parse
    record(5, "P: facets, Isom(P), antipodal map on C, dihedrals, vertices", {
        "22 facets": len(P.labels) == 22,
        "orbits 4,4,4,4,6": sorted(P.orbit_sizes.values()) == [4, 4, 4, 4, 6],
        "|Isom| = 48": sym["order"] == 48,
        "|Isom+| = 24": sym["orientation_preserving"] == 24,
        "a(Cij) = Ckl": all(a(lab(x)) == lab(y) for x, y in
                            (("C12", "C34"), ("C13", "C24"), ("C14", "C23"))),
        **checks_of(cert, "p-symmetry", ["E_E_dihedral_2pi_3", "H_and_C_families_disjoint",
                                         "mixed_right_angled", "antipodal_central"]),
        "2 type-1 vertices": polytope.vertex_census(P)["1"] == 2,
        **checks_of(cert, "p-vertices", ["ideal_vertices_on_one_hyperplane"]),
    })


def test_6_x(cert):
    st = cert.stages["x-manifold"]
    record(6, "X: 20 pairings, ridge sums, two K5 links, orientable, chi(X) = 2 twice", {
        **checks_of(cert, "x-build", ["pairing_count"]),
        **checks_of(cert, "x-manifold", ["ridge_angles_in_2pi_pi_halfpi", "corners_bicoloured",
                                         "type1_links", "orientable", "chi_X",
                                         "manifold_with_corners"]),
        "chi by tiles": st.values["euler"]["primary"] == 2,
        "chi by cell classes": st.values["euler"]["cell_sum"] == 2,
    })


@pytest.mark.xfail(strict=True, reason=(
    "h*c = r12*r34 fixes a point of X on the corner edges C12 & E2 & H'2 (copy 1) and "
    "C34 & E4 & H'4 (copy 3); those corner cycles have length 2, M is singular there and "
    "its plain cell count gives 1 instead of 2"))
def test_7_m(cert):
    b = cert.stages["m-build"]
    m = cert.stages["m-manifold"]
    record(7, "M: free commuting involutions, corner cycles of length 4, closed orientable, chi = 2", {
        **checks_of(cert, "m-build", ["h_free_involution", "c_free_involution", "distinct",
                                      "commute", "h_fixed_line", "c_fixed_line", "closed",
                                      "gluing_maps_in_isom_P"]),
        **checks_of(cert, "m-manifold", ["corner_cycles_length_4", "corner_return_maps_trivial",
                                         "manifold", "orientable", "chi_M", "q_tiles"]),
        "boundary empty": b.values["pairings"] == 55,
        "cover via 120 Q-tiles": "120 Q-tiles" in m.values["cover"],
    })


@pytest.mark.xfail(strict=True, reason=(
    "each pair's product h*c is r12, r34 or r12*r34, which fixes corner edges of X; "
    "all six spaces are closed with chi = 2 but none is a manifold"))
def test_8_variants(cert):
    rows = cert.stages["variants"].values["table"]
    record(8, "variants: six closed manifolds with chi = 2, exactly one orientable", {
        "six pairs": len(rows) == 6,
        "all closed, chi = 2": all(r["closed"] and r["euler"] == "2" for r in rows),
        "all manifolds": all(r.get("valid") for r in rows),
        "exactly one orientable": sum(1 for r in rows if r["orientable"]) == 1,
        "the orientable one is (a*r12, a*r34)": [r["pair"] for r in rows if r["orientable"]]
        == [["a*r12", "a*r34"]],
    })


CONTROLS = [
    ("vector coordinate", "q_vectors.txt",
     "i0  0 0 0 0  -1 0 0 0   1 0 0 0", "i0  0 0 0 0  -1 0 0 0   2 0 0 0", "build-x"),
    ("pairing", "x_gluing.txt", "pair 0:E2 2:E2 id", "pair 0:E2 2:E2 a", "build-x"),
    ("form entry", "qform.txt", "7    0    0    7/2", "5    0    0    7/2", "verify-q"),
    ("diagram edge", "q.cox", "edge b i2 3\n", "", "build-x"),
]


def _passing_checks(cert) -> set:
    return {(s, c) for s, st in cert.stages.items() if not st.error
            for c, ok in st.checks.items() if ok}


def test_9_negative_controls(tmp_path):
    flipped = {}
    for name, fname, old, new, command in CONTROLS:
        clean = cli.run(command)
        d = tmp_path / name.replace(" ", "_")
        shutil.copytree(DATA, d)
        text = (d / fname).read_text()
        assert old in text
        (d / fname).write_text(text.replace(old, new, 1))
        bad = cli.run(command, d)
        lost = _passing_checks(clean) - _passing_checks(bad)
        errored = {s for s, st in bad.stages.items() if st.error and not clean.stages[s].error}
        flipped[name] = not bad.passed and bool(lost or errored)
    record(9, f"negative controls: {sum(flipped.values())}/4 flip a passing stage", {
        f"control {k}": v for k, v in flipped.items()})


if __name__ == "__main__":
    raise SystemExit(pytest.main([str(Path(__file__)), "-q"]))
