from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest

from hypglue import gluing, lorentz, polytope
from hypglue.gluing import GluingError, Pairing, induce_isometry

lab = polytope.FacetLabel.parse
CHI_Q = Fraction(1, 60)


def test_x_rules_roundtrip(data_dir):
    rules = gluing.x_rules()
    assert len(rules) == 20
    assert gluing.load_gluing(data_dir / "x_gluing.txt") == rules
    text = "".join(f"pair {gluing.instance_text(a)} {gluing.instance_text(b)} {w}\n" for a, b, w in rules)
    assert gluing.parse_gluing(text) == rules


@pytest.mark.parametrize("text,lineno", [
    ("pair 0:E1 1:E1\n", 1),
    ("# header\npair 0:E1 1:Q1 id\n", 2),
    ("pair 0:E1 1:E1 id\npair x:E1 1:E1 id\n", 2),
])
def test_parse_errors(text, lineno):
    with pytest.raises(gluing.GluingParseError) as info:
        gluing.parse_gluing(text)
    assert info.value.lineno == lineno


def test_pairing_is_fixed_point_free_involution(X):
    assert X.pairing_is_involution()
    for inst in X.instances():
        pr = X.partner(inst)
        if pr is None:
            continue
        assert pr.target != inst
        back = X.partner(pr.target)
        assert back.target == inst and back.symmetry == pr.symmetry.inverse()


def test_gluing_matrix_maps_facet_onto_facet(X):
    p = X.p
    for pr in X.pairings:
        g = X.gluing_matrix(pr)
        # target chart -> source chart: the glued facet is common, the copies lie on opposite sides
        n_src = p.normals[pr.source[1]]
        n_tgt = p.normals[pr.target[1]]
        assert g(n_tgt) == -n_src


def test_conflicting_pairing_rejected(P):
    rules = gluing.x_rules() + [((0, lab("E1")), (2, lab("E2")), "r12")]
    with pytest.raises(GluingError):
        gluing.build_complex(P, rules, "bad")


def test_pairing_symmetry_must_match_facets(P):
    with pytest.raises(GluingError):
        gluing.build_complex(P, [((0, lab("E1")), (1, lab("E1")), "r12")], "bad")


def test_x_structure(X):
    assert X.n_copies == 5 and len(X.pairings) == 20
    assert len(X.boundary) == 70
    assert {i[1].kind for i in X.boundary} == {"H", "C"}
    assert gluing.is_connected(X)
    assert gluing.boundary_components(X) == {"C": 1, "H": 2}


def test_x_ridges(X):
    rcs = gluing.ridge_classes(X)
    assert gluing.ridge_census(rcs) == {
        "corner 1/2pi x1": 120, "facet-interior 1pi x2": 140, "interior 2pi x3": 20}
    for r in rcs:
        if r.verdict == "corner":
            assert sorted(i[1].kind for i in r.end_instances) == ["C", "H"]
        assert r.verdict in {"interior", "facet-interior", "corner"}


def test_x_links(X):
    links = gluing.vertex_links(X)
    census = Counter((l.vertex_type, l.verdict) for l in links)
    assert census == {("1", "sphere"): 2, ("2", "half-sphere"): 10, ("3", "corner"): 40,
                      ("ideal", "cusp"): 10}
    for l in links:
        if l.vertex_type == "1":
            assert l.detail["tetrahedra"] == 5 and l.detail["dual_graph_complete"]
            assert l.detail["closed_3_complex"]


def test_x_cusps(X):
    cusps = gluing.cusp_reports(X)
    assert len(cusps) == 10
    assert all(c.cycle_length == 6 and c.preserves_corners for c in cusps)


def test_x_orientation_and_euler(X):
    ok, eps = gluing.orientability(X)
    assert ok and eps == {0: 1, 1: -1, 2: -1, 3: -1, 4: -1}
    chi = gluing.euler_characteristic(X, CHI_Q)
    assert chi["primary"] == chi["cell_sum"] == 2 and chi["agree"]
    assert chi["open_cell_sum"] == -3


def test_x_is_manifold_with_corners(X):
    rep = gluing.verify_manifold_with_corners(X)
    assert rep["ok"] and rep["corners_bicoloured"]
    assert not rep["bad_ridges"] and not rep["bad_links"] and not rep["bad_cells"]


def test_induced_isometries_form_a_homomorphism(X):
    p = X.p
    words = ["id", "a", "r12", "r34", "a*r12", "r12*r34", "a*r12*r34", "r13"]
    iso = {w: induce_isometry(X, p.word(w), w) for w in words}
    assert iso["id"].is_identity()
    assert (iso["a"] @ iso["r12"]).same_as(iso["a*r12"])
    assert (iso["r12"] @ iso["r34"]).same_as(iso["r12*r34"])
    assert (iso["a"] @ iso["r12*r34"]).same_as(iso["a*r12*r34"])
    assert iso["r12"].copy_map() == (0, 2, 1, 3, 4)
    assert iso["r13"].copy_map() == (0, 3, 2, 1, 4)
    assert iso["a"].copy_map() == (0, 1, 2, 3, 4)
    for w in words[1:]:
        assert (iso[w] @ iso[w]).is_identity()


def test_induced_isometries_respect_pairings(X):
    g = induce_isometry(X, X.p.word("a*r12"), "h")
    for pr in X.pairings:
        img = X.partner(g.on_instance(pr.source))
        assert img is not None and img.target == g.on_instance(pr.target)


def test_a_r12_r34_is_not_free_on_c(X):
    phi = induce_isometry(X, X.p.word("a*r12*r34"), "a*r12*r34")
    rep = gluing.verify_free_boundary_involution(X, phi, "C")
    assert rep["involution"] and not rep["ok"] and rep["fixed_boundary_cells"]
    assert gluing.verify_free_boundary_involution(X, phi, "H")["ok"]


def test_free_involution_part_checked():
    with pytest.raises(ValueError):
        gluing.verify_free_boundary_involution(None, None, "E")


# ---------------------------------------------------------------- M

def test_m_involutions(M):
    assert M.h_report["ok"] and M.c_report["ok"]
    assert M.commute and not M.h.same_as(M.c)
    h_line = next(l for l in M.h_report["fixed_loci"] if l["copy"] == 0)
    c_line = next(l for l in M.c_report["fixed_loci"] if l["copy"] == 0)
    assert h_line["kind"] == c_line["kind"] == "line"
    assert h_line["endpoints"] == [["E1", "E'2", "H2", "H'1", "C13", "C14"],
                                   ["E2", "E'1", "H1", "H'2", "C23", "C24"]]
    assert c_line["endpoints"] == [["E3", "E'4", "H4", "H'3", "C13", "C23"],
                                   ["E4", "E'3", "H3", "H'4", "C14", "C24"]]
    assert h_line["misses_boundary"] and c_line["misses_boundary"]


def test_m_closed_orientable(M, P):
    m = M.complex
    assert m.is_closed() and len(m.pairings) == 20 + 35
    assert M.orientable
    assert M.euler["q_tiles"] == 120 and M.euler["primary"] == 2
    isom = set(P.isom)
    assert all(pr.symmetry in isom for pr in m.pairings)


def test_m_two_dimensional_corners_close_up(M):
    # the ridge corners of X close up in cycles of four with trivial return map
    assert M.corners["ridge_cycles"] == 30
    assert M.corners["ridge_lengths"] == [4]
    assert M.corners["return_maps_trivial"] and M.corners["covers_all_corners"]


def test_m_edge_corners_have_short_cycles(M):
    """h*c maps the corner edge C12 & E2 & H'2 of copy 1 to the class it lies in.

    The edge runs between two ideal vertices; the midpoint q of those
    vertices is a point of X fixed by h*c, so four corner cells meet there
    in a cycle of two and the quotient is not a manifold at q.
    """
    assert M.corners["lengths"]["dim 1, length 2"] == 4
    assert not M.corners["all_length_4"]
    x = M.complex
    p = x.p
    key = {lab("C12"), lab("H'2"), lab("E2")}
    ends = [v for v in p.vertices if key <= v.facets]
    assert len(ends) == 2 and all(v.ideal for v in ends)
    q = ends[0].point + ends[1].point
    assert q.norm() == -2
    assert all(lorentz.minkowski_inner(q, p.normals[f]) == 0 for f in key)
    hc = M.h @ M.c
    target, chart = hc.images[1]
    # copy 1 goes to copy 2, and 1:E2 is glued to 2:E1 by r12
    assert target == 2
    assert chart.matrix(q) == p.word("r12").matrix(q)
    assert not M.manifold["ok"]
    assert len(M.manifold["bad_cells"]) == 2
    assert M.euler["open_cell_sum"] == 1 and not M.euler["agree"]


def test_variants(X):
    rows = gluing.variant_manifolds(X, CHI_Q)
    assert len(rows) == 6
    assert all(r["closed"] and r["euler"] == "2" for r in rows)
    orientable = [r["pair"] for r in rows if r["orientable"]]
    assert orientable == [["a*r12", "a*r34"]]
    # every pair has h*c in {r12, r34, r12*r34}, which fixes a corner edge
    assert all(not r["valid"] and r["short_corner_cycles"] > 0 for r in rows)
    swapped = next(r for r in rows if r["pair"] == ["a*r12*r34", "a"] or
                   r["pair"] == ["a", "a*r12*r34"])
    assert swapped["h"] == "a*r12*r34"


def test_close_up_rejects_non_free(X):
    with pytest.raises(GluingError):
        gluing.close_up(X, "a", "a*r12*r34", CHI_Q)


def test_build_m_rejects_equal_involutions(X):
    h = induce_isometry(X, X.p.word("a*r12"), "h")
    with pytest.raises(GluingError):
        gluing.build_M(X, h, h)


def test_pairing_text():
    pr = Pairing((0, lab("E1")), (1, lab("E1")), None, "id")
    assert pr.to_text() == "pair 0:E1 1:E1 id"
