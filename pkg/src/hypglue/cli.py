"""Command-line driver: runs the verification stages and writes a certificate."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from . import coxeter, gluing, lorentz, polytope, qforms

STAGES = (
    "q-diagram", "q-euler", "q-arithmetic",
    "p-build", "p-symmetry", "p-vertices",
    "x-build", "x-manifold",
    "m-build", "m-manifold",
    "variants",
)

COMMANDS = {
    "verify-q": STAGES[:3],
    "build-p": STAGES[:6],
    "build-x": STAGES[:8],
    "build-m": STAGES[:10],
    "variants": STAGES[:8] + ("variants",),
    "all": STAGES,
}

DATA_FILES = ("q_vectors.txt", "q.cox", "qform.txt", "reference_classes.json",
              "gram_reference.txt", "x_gluing.txt", "expected.json")

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def default_data_dir() -> Path:
    return Path(str(resources.files("hypglue") / "data"))


def jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((jsonable(v) for v in x), key=str)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    return str(x)


@dataclass
class StageResult:
    name: str
    checks: dict[str, bool] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.checks.values())

    def check(self, name: str, ok: bool) -> bool:
        self.checks[name] = bool(ok)
        return bool(ok)

    def to_json(self) -> dict:
        out = {"pass": self.passed, "checks": self.checks, "values": jsonable(self.values),
               "notes": self.notes}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class Certificate:
    command: str
    stages: dict[str, StageResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages.values())

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "pass": self.passed,
            "stages": {k: v.to_json() for k, v in self.stages.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def summary(self) -> str:
        lines = []
        for name, st in self.stages.items():
            mark = "PASS" if st.passed else "FAIL"
            lines.append(f"{mark}  {name}")
            if st.error:
                lines.append(f"      error: {st.error}")
            for check, ok in st.checks.items():
                if not ok:
                    lines.append(f"      failed: {check}")
            for note in st.notes:
                lines.append(f"      note: {note}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


class Pipeline:
    """Holds loaded inputs and intermediate products shared between stages."""

    def __init__(self, data_dir: Path, pair: tuple[str, str] | None = None) -> None:
        self.data_dir = Path(data_dir)
        self.pair = pair
        self.load()
        self.q_diagram: coxeter.CoxeterDiagram | None = None
        self.chi_q: Fraction | None = None
        self.p: polytope.PolytopeP | None = None
        self.x: gluing.GluedComplex | None = None
        self.m: gluing.ManifoldResult | None = None

    def path(self, name: str) -> Path:
        return self.data_dir / name

    def load(self) -> None:
        missing = [n for n in DATA_FILES if not self.path(n).is_file()]
        if missing:
            raise InputError(f"missing input files in {self.data_dir}: {', '.join(missing)}")
        try:
            self.vectors = lorentz.load_vectors(self.path("q_vectors.txt"))
            self.diagram_file = coxeter.load_diagram(self.path("q.cox"))
            self.form = qforms.load_form(self.path("qform.txt"))
            self.references = qforms.load_references(self.path("reference_classes.json"))
            self.ref_json = json.loads(self.path("reference_classes.json").read_text())
            self.gram_order, self.gram_ref = lorentz.load_gram_reference(self.path("gram_reference.txt"))
            self.x_rules = gluing.load_gluing(self.path("x_gluing.txt"))
            self.expected = json.loads(self.path("expected.json").read_text())
        except (ValueError, KeyError, OSError) as exc:
            raise InputError(str(exc)) from None

    # ------------------------------------------------------------ Q

    def stage_q_diagram(self, st: StageResult) -> None:
        names = self.gram_order
        if set(names) != set(self.vectors):
            raise InputError("Gram reference order does not name the shipped vectors")
        gram = lorentz.gram_matrix([self.vectors[n] for n in names])
        mismatches, sign_flips = [], []
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                if j <= i:
                    continue
                ours, ref = gram[i][j], self.gram_ref[i][j]
                if not ours.magnitude_equals(ref):
                    mismatches.append(f"{a}-{b}: {ours.render()} vs {ref.render()}")
                elif ours.sign != ref.sign:
                    sign_flips.append(f"{a}-{b}")
        st.values["gram"] = [[e.render() for e in row] for row in gram]
        st.values["gram_order"] = names
        st.values["sign_differences"] = sign_flips
        st.check("gram_magnitudes_match", not mismatches)
        if mismatches:
            st.values["gram_mismatches"] = mismatches
        if sign_flips:
            st.notes.append("entries equal in absolute value but opposite in sign: "
                            + ", ".join(sign_flips))
        try:
            derived = coxeter.diagram_from_vectors(self.vectors)
        except coxeter.DiagramError as exc:
            st.check("diagram_from_vectors", False)
            st.values["diagram_error"] = str(exc)
            return
        diffs = derived.differences(self.diagram_file)
        st.values["diagram"] = derived.to_text().splitlines()
        st.values["diagram_differences"] = diffs
        st.check("diagram_matches_file", not diffs)
        self.q_diagram = derived if not diffs else None

    def stage_q_euler(self, st: StageResult) -> None:
        d = self.diagram_file
        chi = coxeter.orbifold_euler_characteristic(d)
        self.chi_q = chi
        st.values["chi_orb"] = chi
        st.check("chi_orb", chi == Fraction(self.expected["chi_orb_Q"]))
        refl = {n: lorentz.reflection_in(self.vectors[n]) for n in ("i0", "i1", "i2", "t")}
        g_i = polytope.enumerate_group([refl[n] for n in ("i0", "i1", "i2")], bound=1000)
        g_v = polytope.enumerate_group([refl[n] for n in ("i0", "i1", "i2", "t")], bound=1000)
        t_i = coxeter.finite_type(d, ["i0", "i1", "i2"])
        t_v = coxeter.finite_type(d, ["i0", "i1", "i2", "t"])
        st.values.update({
            "order_G_I": len(g_i), "order_G_V": len(g_v),
            "type_G_I": t_i.type if t_i else None, "type_G_V": t_v.type if t_v else None,
        })
        st.check("order_G_I", len(g_i) == self.expected["order_G_I"])
        st.check("order_G_V", len(g_v) == self.expected["order_G_V"])
        st.check("orders_match_diagram", bool(t_i and t_v) and t_i.order == len(g_i)
                 and t_v.order == len(g_v))

    def stage_q_arithmetic(self, st: StageResult) -> None:
        q = self.form
        sig = q.signature()
        st.values["signature"] = list(sig)
        st.check("signature_4_1", tuple(sig) == (4, 1))
        diag, t = qforms.diagonalize(q)
        st.values["diagonal"] = [str(x) for x in diag]
        st.check("diagonalization_exact", qforms.check_congruence(q, diag, t))
        ram = qforms.ramification_set(q)
        st.values["ramification"] = qforms.format_places(ram)
        want = qforms.parse_place_set(self.expected["ramification"])
        st.check("ramification", ram == want)
        trivial = qforms.RationalQuadraticForm.diagonal(
            [Fraction(x) for x in self.expected["trivial_form"]])
        tram = qforms.ramification_set(trivial)
        st.values["trivial_form_ramification"] = qforms.format_places(tram)
        st.check("trivial_form_ramification", tram == qforms.parse_place_set(self.expected["trivial_ramification"]))
        sep = qforms.separate_classes(q, self.references)
        st.values["classes"] = sep["table"]
        st.values["verdict"] = sep["verdict"]
        st.check("classes_distinct", sep["distinct"])
        ref_diag = [Fraction(x) for x in self.ref_json["expected_diagonal"]]
        places = sorted(set(qforms.candidate_places(list(diag)) + qforms.candidate_places(ref_diag)),
                        key=qforms.place_key)
        det_same = qforms.square_class_equal(q.det(), _prod(ref_diag))
        hasse_same = qforms.local_invariants(list(diag), places) == qforms.local_invariants(ref_diag, places)
        st.values["published_diagonal"] = [str(x) for x in ref_diag]
        st.values["published_diagonal_det_class_equal"] = det_same
        st.values["published_diagonal_hasse_equal"] = hasse_same
        st.check("published_diagonal_congruent", det_same and hasse_same)
        similar = [str(lam) for lam in (Fraction(1, 2), Fraction(2), Fraction(1, 7), Fraction(7))
                   if qforms.congruence_equivalent([lam * x for x in diag], ref_diag)]
        st.values["published_diagonal_similar_by"] = similar
        if not det_same and similar:
            st.notes.append(f"the published diagonal is congruent to {similar[0]}·q, not to q; "
                            "the ramification set is unaffected")

    # ------------------------------------------------------------ P

    def stage_p_build(self, st: StageResult) -> None:
        p = polytope.build_P(self.vectors)
        self.p = p
        st.values["facets"] = [str(x) for x in p.labels]
        st.values["orbit_sizes"] = p.orbit_sizes
        st.values["stabilizer_sizes"] = p.stabilizer_sizes
        st.check("facet_count", len(p.labels) == self.expected["facets"])
        st.check("orbit_sizes", sorted(p.orbit_sizes.values()) == [4, 4, 4, 4, 6])
        st.check("orbit_stabilizer", all(p.orbit_sizes[f] * p.stabilizer_sizes[f] == 24
                                         for f in p.orbit_sizes))
        st.check("G_I_order", len(p.group_I) == 24)

    def stage_p_symmetry(self, st: StageResult) -> None:
        p = self._need_p()
        rep = polytope.isom_group(p)
        st.values["isom"] = rep
        st.check("isom_order", rep["order"] == self.expected["isom_order"])
        st.check("antipodal_central", rep["antipodal_central"])
        st.check("isom_plus_order", rep["orientation_preserving"] == self.expected["isom_plus_order"])
        st.check("isom_plus_G_I_part_A4", rep["orientation_preserving_G_I_part_is_A4"])
        a = p.antipodal
        lab = polytope.FacetLabel.parse
        c_ok = all(a(lab(x)) == lab(y) and a(lab(y)) == lab(x) for x, y in self.expected["antipodal_C"])
        st.check("antipodal_on_C", c_ok)
        st.check("antipodal_E_H", all(a(polytope.FacetLabel(f, (i,))) == polytope.FacetLabel(f + "'", (i,))
                                      for f in ("E", "H") for i in range(1, 5)))
        st.check("antipodal_fixes_no_facet", all(a(x) != x for x in p.labels))
        cert = polytope.antipodal_certificate(p)
        st.values["antipodal"] = cert
        st.check("antipodal_is_central_inversion", cert["centre_on_edge_VV'"] and cert["involution"]
                 and cert["fixed_dim"] == 1)
        adj = polytope.facet_adjacency(p)
        ee, disjoint, mixed = [], [], []
        for (f, g), info in adj.items():
            same_kind = f.kind == g.kind
            if f.kind == "E" and g.kind == "E" and info["adjacent"]:
                ee.append(info["dihedral"])
            elif same_kind and f.kind in "HC":
                disjoint.append(not info["adjacent"])
            elif not same_kind and info["adjacent"]:
                mixed.append(info["dihedral"])
        st.values["adjacency"] = {
            "E_E_ridges": len(ee), "E_E_dihedrals": sorted({str(x) for x in ee}),
            "mixed_ridges": len(mixed), "mixed_dihedrals": sorted({str(x) for x in mixed}),
        }
        st.check("E_E_dihedral_2pi_3", bool(ee) and all(x == Fraction(2, 3) for x in ee))
        st.check("H_and_C_families_disjoint", all(disjoint))
        st.check("mixed_right_angled", bool(mixed) and all(x == Fraction(1, 2) for x in mixed))

    def stage_p_vertices(self, st: StageResult) -> None:
        p = self._need_p()
        census = polytope.vertex_census(p)
        st.values["census"] = census
        st.values["faces"] = p.faces.counts()
        st.check("type1_count", census.get("1") == 2)
        example = frozenset(polytope.FacetLabel.parse(x) for x in self.expected["ideal_vertex_example"])
        st.check("ideal_vertex_example", any(v.facets == example and v.ideal for v in p.vertices))
        w = polytope.ideal_hyperplane(p)
        st.values["ideal_hyperplane_normal"] = None if w is None else list(w)
        st.check("ideal_vertices_on_one_hyperplane", w is not None)
        st.check("census_invariant", polytope.vertex_census_invariant(p))
        chi = polytope.angle_sum_euler(p)
        st.values["chi_P_angle_sum"] = chi
        st.values["chi_P_tiles"] = 24 * (self.chi_q or coxeter.orbifold_euler_characteristic(self.diagram_file))
        st.check("chi_P", chi == Fraction(self.expected["chi_P"]) == st.values["chi_P_tiles"])
        st.values["volume"] = f"{chi}·4π²/3"

    # ------------------------------------------------------------ X

    def stage_x_build(self, st: StageResult) -> None:
        p = self._need_p()
        x = gluing.build_X(p, self.x_rules)
        self.x = x
        st.values["pairings"] = [pr.to_text() for pr in x.pairings]
        st.values["boundary_instances"] = len(x.boundary)
        st.check("copies", x.n_copies == self.expected["x_copies"])
        st.check("pairing_count", len(x.pairings) == self.expected["x_pairings"])
        st.check("boundary_count", len(x.boundary) == self.expected["x_boundary_instances"])
        st.check("boundary_has_no_E", all(i[1].kind != "E" for i in x.boundary))
        st.check("pairings_keep_top_and_bottom",
                 all(pr.source[1].primed == pr.target[1].primed for pr in x.pairings))
        rules = {(a, b, w) for a, b, w in gluing.x_rules()}
        st.check("pairings_follow_K5_rules", set(map(tuple, self.x_rules)) == rules)

    def stage_x_manifold(self, st: StageResult) -> None:
        x = self._need_x()
        rep = gluing.verify_manifold_with_corners(x)
        st.values["manifold"] = gluing.public(rep)
        st.check("manifold_with_corners", rep["ok"])
        st.check("corners_bicoloured", rep["corners_bicoloured"])
        ridge_angles = {str(r.angle) for r in rep["_ridges"]}
        st.check("ridge_angles_in_2pi_pi_halfpi", ridge_angles <= {"2", "1", "1/2"})
        type1 = rep["type1_links"]
        st.check("type1_links", len(type1) == 2 and all(
            t["tetrahedra"] == 5 and t["dual_graph_complete"] and t["euler"] == 0 for t in type1))
        orientable, eps = gluing.orientability(x)
        st.values["orientation"] = eps
        st.check("orientable", orientable)
        chi = gluing.euler_characteristic(x, self._chi_q())
        st.values["euler"] = chi
        st.check("chi_X", chi["agree"] and chi["primary"] == Fraction(self.expected["chi_X"]))
        st.values["boundary_facets"] = gluing.boundary_components(x)
        p = x.p
        ident = gluing.induce_isometry(x, p.word("id"), "id")
        a = gluing.induce_isometry(x, p.word("a"), "a")
        r12 = gluing.induce_isometry(x, p.word("r12"), "r12")
        ar12 = gluing.induce_isometry(x, p.word("a*r12"), "a*r12")
        st.values["isometries"] = {g.name: list(g.copy_map()) for g in (ident, a, r12, ar12)}
        st.check("identity_induced", ident.is_identity())
        st.check("a_preserves_copies", a.copy_map() == tuple(range(5)))
        st.check("r12_swaps_copies_1_2", r12.copy_map() == (0, 2, 1, 3, 4))
        st.check("induced_homomorphism", (a @ r12).same_as(ar12))

    # ------------------------------------------------------------ M

    def stage_m_build(self, st: StageResult) -> None:
        x = self._need_x()
        hw, cw = self.pair or (self.expected["h"], self.expected["c"])
        m = gluing.close_up(x, hw, cw, self._chi_q())
        self.m = m
        st.values["h"], st.values["c"] = hw, cw
        st.values["h_report"] = m.h_report
        st.values["c_report"] = m.c_report
        st.check("h_free_involution", m.h_report["ok"])
        st.check("c_free_involution", m.c_report["ok"])
        st.check("distinct", not m.h.same_as(m.c))
        st.check("commute", m.commute)
        if (hw, cw) == (self.expected["h"], self.expected["c"]):
            for key, rep in (("h_fixed_line", m.h_report), ("c_fixed_line", m.c_report)):
                line = next((l for l in rep["fixed_loci"] if l["copy"] == 0), None)
                want = sorted(sorted(s, key=lambda t: polytope.FacetLabel.parse(t).sort_key())
                              for s in self.expected[key])
                st.check(key, line is not None and line.get("kind") == "line"
                         and line["endpoints"] == want and line["misses_boundary"])
        st.check("closed", m.complex.is_closed())
        isom = set(x.p.isom)
        st.check("gluing_maps_in_isom_P", all(pr.symmetry in isom for pr in m.complex.pairings))
        st.values["pairings"] = len(m.complex.pairings)

    def stage_m_manifold(self, st: StageResult) -> None:
        m = self._need_m()
        st.values["manifold"] = gluing.public(m.manifold)
        st.values["corner_cycles"] = m.corners
        st.check("corner_cycles_length_4", m.corners["all_length_4"])
        st.check("corner_return_maps_trivial", m.corners["return_maps_trivial"])
        st.check("manifold", m.manifold["ok"])
        st.check("orientable", m.orientable)
        st.values["orientation"] = m.orientation
        st.values["euler"] = m.euler
        st.check("chi_M", m.euler["agree"] and m.euler["primary"] == Fraction(self.expected["chi_M"]))
        st.check("q_tiles", m.euler["q_tiles"] == self.expected["m_q_tiles"])
        st.values["volume"] = f"{m.euler['primary']}·4π²/3"
        st.values["cover"] = (f"{m.complex.name} -> P/Isom(P) = Q/Isom(Q): "
                              f"{m.euler['q_tiles']} Q-tiles, all gluing maps in Isom(P)")
        if m.corners["short_cycles"]:
            st.notes.append(f"{len(m.corners['short_cycles'])} corner cells of X have corner cycles of "
                            f"length 2: h*c fixes them, so the glued space is singular there")

    def stage_variants(self, st: StageResult) -> None:
        x = self._need_x()
        rows = gluing.variant_manifolds(x, self._chi_q(), [self.pair] if self.pair else None)
        st.values["table"] = rows
        st.check("all_closed_chi_2", all(r["closed"] and r["euler"] == "2" for r in rows))
        st.check("all_manifolds", all(r.get("valid") for r in rows))
        if not self.pair:
            st.check("exactly_one_orientable", sum(1 for r in rows if r["orientable"]) == 1)

    # ------------------------------------------------------------ helpers

    def _chi_q(self) -> Fraction:
        if self.chi_q is None:
            self.chi_q = coxeter.orbifold_euler_characteristic(self.diagram_file)
        return self.chi_q

    def _need_p(self) -> polytope.PolytopeP:
        if self.p is None:
            raise StageSkipped("P was not built")
        return self.p

    def _need_x(self) -> gluing.GluedComplex:
        if self.x is None:
            raise StageSkipped("X was not built")
        return self.x

    def _need_m(self) -> gluing.ManifoldResult:
        if self.m is None:
            raise StageSkipped("M was not built")
        return self.m


class StageSkipped(Exception):
    pass


def _prod(xs) -> Fraction:
    out = Fraction(1)
    for x in xs:
        out *= x
    return out


def run(command: str, data_dir: Path | None = None, pair: tuple[str, str] | None = None) -> Certificate:
    """Run the stages of a command.  Raises InputError for unusable inputs."""
    return run_pipeline(command, data_dir, pair)[0]


def run_pipeline(command: str, data_dir: Path | None = None,
                 pair: tuple[str, str] | None = None) -> tuple[Certificate, Pipeline]:
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}")
    pipe = Pipeline(data_dir or default_data_dir(), pair)
    cert = Certificate(command)
    for name in COMMANDS[command]:
        st = StageResult(name)
        method: Callable[[StageResult], None] = getattr(pipe, "stage_" + name.replace("-", "_"))
        try:
            method(st)
        except InputError:
            raise
        except (StageSkipped, polytope.ConstructionError, gluing.GluingError,
                coxeter.DiagramError, qforms.FormError, ValueError) as exc:
            st.error = f"{type(exc).__name__}: {exc}"
        cert.stages[name] = st
    return cert, pipe


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypglue", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS), help="stages to run")
    ap.add_argument("--json", metavar="PATH", help="write the JSON certificate here ('-' for stdout)")
    ap.add_argument("--pair", nargs=2, metavar=("H_WORD", "C_WORD"),
                    help="involutions used to close X (default a*r12 a*r34)")
    ap.add_argument("--data-dir", metavar="DIR", help="directory with the input data files")
    ap.add_argument("--p-json", metavar="PATH", help="also write the description of P")
    ap.add_argument("--quiet", action="store_true", help="only print the overall verdict")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    data_dir = Path(args.data_dir) if args.data_dir else None
    try:
        cert = run(args.command, data_dir, tuple(args.pair) if args.pair else None)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        text = cert.dumps()
        if args.json == "-":
            sys.stdout.write(text)
        else:
            Path(args.json).write_text(text)
    if args.p_json:
        p = polytope.build_P(lorentz.load_vectors((data_dir or default_data_dir()) / "q_vectors.txt"))
        Path(args.p_json).write_text(polytope.dump_json(p) + "\n")
    if args.json != "-":
        print(cert.summary().splitlines()[-1] if args.quiet else cert.summary())
    return EXIT_PASS if cert.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
