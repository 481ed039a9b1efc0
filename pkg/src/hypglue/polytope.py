"""The 22-facet polytope P obtained by reflecting Q around its edge I.

P is the union of the 24 images of Q under G_I = <i0, i1, i2> (a copy of
S4).  Its facets are the G_I-orbits of the walls t, b, u, l, c of Q.
"""

from __future__ import annotations

import json
from collections import Counter
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

from . import linalg
from .coxeter import CoxeterDiagram, diagram_from_vectors, finite_type
from .exactnum import ZERO
from .lorentz import (
    IsometryMatrix,
    LorentzVector,
    PairClass,
    classify_pair,
    minkowski_inner,
    orthogonal_complement,
    proportional,
    reflection_in,
    restricted_signature,
    span_rank,
)

FAMILIES = ("E", "E'", "H", "H'", "C")

# Q wall -> facet family of P.  H is the orbit of the wall named ``l`` in the
# shipped vectors: that is the wall whose images meet three top facets, as in
# the facet and vertex-link pictures of P.
DEFAULT_FAMILIES = {"t": "E", "b": "E'", "l": "H", "u": "H'", "c": "C"}
INTERNAL_WALLS = ("i0", "i1", "i2")


class ConstructionError(RuntimeError):
    pass


class GroupBoundExceeded(ConstructionError):
    pass


@dataclass(frozen=True)
class FacetLabel:
    family: str
    index: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown facet family {self.family!r}")
        want = 2 if self.family == "C" else 1
        if len(self.index) != want or any(not 1 <= i <= 4 for i in self.index):
            raise ValueError(f"bad index {self.index} for family {self.family}")
        if self.family == "C" and self.index[0] >= self.index[1]:
            raise ValueError("C indices must be increasing")

    @classmethod
    def parse(cls, text: str) -> FacetLabel:
        text = text.strip()
        fam = text[:2] if text[1:2] == "'" else text[:1]
        digits = text[len(fam):]
        if not digits.isdigit():
            raise ValueError(f"bad facet label {text!r}")
        return cls(fam, tuple(int(ch) for ch in digits))

    @property
    def kind(self) -> str:
        """E, H or C regardless of priming."""
        return self.family[0]

    @property
    def primed(self) -> bool:
        return self.family.endswith("'")

    def sort_key(self) -> tuple:
        return (FAMILIES.index(self.family), self.index)

    def __lt__(self, other: FacetLabel) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return self.family + "".join(str(i) for i in self.index)

    __repr__ = __str__


def all_labels() -> list[FacetLabel]:
    out = []
    for fam in FAMILIES[:4]:
        out += [FacetLabel(fam, (i,)) for i in range(1, 5)]
    out += [FacetLabel("C", p) for p in combinations(range(1, 5), 2)]
    return out


def relabel(label: FacetLabel, perm: Mapping[int, int], swap: bool) -> FacetLabel:
    """Apply an index permutation and optionally exchange primed families."""
    if label.family == "C":
        idx = tuple(perm[i] for i in label.index)
        if swap:
            idx = tuple(sorted(set(range(1, 5)) - set(idx)))
        return FacetLabel("C", tuple(sorted(idx)))
    fam = label.family
    if swap:
        fam = fam[:-1] if label.primed else fam + "'"
    return FacetLabel(fam, (perm[label.index[0]],))


@dataclass(frozen=True, eq=False)
class Symmetry:
    """An isometry of P with its action on facet labels."""

    matrix: IsometryMatrix
    perm: tuple[int, int, int, int]   # images of indices 1..4
    swap: bool                        # exchanges top/bottom and upper/lower
    name: str = ""

    def index_map(self) -> dict[int, int]:
        return {i + 1: self.perm[i] for i in range(4)}

    def __call__(self, label: FacetLabel) -> FacetLabel:
        return relabel(label, self.index_map(), self.swap)

    def apply_set(self, labels: Iterable[FacetLabel]) -> frozenset:
        return frozenset(self(x) for x in labels)

    def __matmul__(self, other: Symmetry) -> Symmetry:
        """Composition: (self @ other)(x) = self(other(x))."""
        perm = tuple(self.perm[other.perm[i] - 1] for i in range(4))
        name = f"{self.name}*{other.name}" if self.name and other.name else ""
        return Symmetry(self.matrix @ other.matrix, perm, self.swap != other.swap, name)

    def inverse(self) -> Symmetry:
        inv = [0] * 4
        for i, p in enumerate(self.perm):
            inv[p - 1] = i + 1
        return Symmetry(self.matrix.inverse(), tuple(inv), self.swap, self.name + "^-1" if self.name else "")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Symmetry):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    @property
    def orientation(self) -> int:
        return self.matrix.orientation_action()

    def is_identity(self) -> bool:
        return self.matrix.is_identity()

    def perm_parity(self) -> int:
        p = list(self.perm)
        sign = 1
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        return sign

    def __repr__(self) -> str:
        return f"Symmetry({self.name or '?'}, perm={self.perm}, swap={self.swap})"


def enumerate_group(generators: Sequence[IsometryMatrix], bound: int = 10_000) -> list[IsometryMatrix]:
    """Closure of the generators under multiplication, identity first."""
    ident = IsometryMatrix.identity()
    elements = [ident]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in generators:
                h = g @ s
                if h not in seen:
                    seen.add(h)
                    elements.append(h)
                    nxt.append(h)
                    if len(elements) > bound:
                        raise GroupBoundExceeded(f"group exceeds {bound} elements")
        frontier = nxt
    return elements


@dataclass(frozen=True)
class VertexRecord:
    point: LorentzVector
    facets: frozenset
    type: str  # "1", "2", "3" or "ideal"

    @property
    def ideal(self) -> bool:
        return self.type == "ideal"

    def label_text(self) -> str:
        return ",".join(str(x) for x in sorted(self.facets))


@dataclass(frozen=True)
class Face:
    facets: frozenset
    vertices: frozenset  # indices into PolytopeP.vertices
    dim: int
    ideal: bool = False  # ideal vertex (a point at infinity, not part of P)


@dataclass
class PolytopeP:
    q_vectors: dict[str, LorentzVector]
    q_diagram: CoxeterDiagram
    normals: dict[FacetLabel, LorentzVector]
    wall_of: dict[FacetLabel, str]
    group_I: list[Symmetry]
    generators: dict[str, Symmetry]
    orbit_sizes: dict[str, int]
    stabilizer_sizes: dict[str, int]
    antipodal: Symmetry | None = None
    isom: list[Symmetry] = field(default_factory=list)

    @property
    def labels(self) -> list[FacetLabel]:
        return sorted(self.normals)

    def facet_pair(self, f: FacetLabel, g: FacetLabel) -> PairClass:
        return classify_pair(self.normals[f], self.normals[g])

    def transposition(self, i: int, j: int) -> Symmetry:
        target = [1, 2, 3, 4]
        target[i - 1], target[j - 1] = j, i
        for s in self.group_I:
            if list(s.perm) == target:
                return s
        raise ConstructionError(f"no element acting as ({i}{j})")

    def word(self, text: str) -> Symmetry:
        """Parse a product such as ``a*r12`` (rightmost factor acts first)."""
        result = self.group_I[0]
        tokens = [t for t in text.replace(".", "*").split("*") if t.strip()]
        if not tokens:
            raise ValueError("empty symmetry word")
        for tok in tokens:
            result = result @ self._letter(tok.strip())
        return Symmetry(result.matrix, result.perm, result.swap, text)

    def _letter(self, tok: str) -> Symmetry:
        if tok == "id":
            return self.group_I[0]
        if tok == "a":
            if self.antipodal is None:
                raise ConstructionError("antipodal map not built")
            return self.antipodal
        if tok in self.generators:
            return self.generators[tok]
        if len(tok) == 3 and tok[0] == "r" and tok[1:].isdigit():
            i, j = int(tok[1]), int(tok[2])
            if i != j and 1 <= i <= 4 and 1 <= j <= 4:
                return self.transposition(min(i, j), max(i, j))
        raise ValueError(f"unknown symmetry letter {tok!r}")

    def symmetry_of(self, matrix: IsometryMatrix) -> Symmetry:
        for s in self.isom or self.group_I:
            if s.matrix == matrix:
                return s
        raise ConstructionError("matrix is not a known symmetry of P")

    def contains(self, x: LorentzVector, strict: bool = False) -> bool:
        for n in self.normals.values():
            s = minkowski_inner(x, n).sign()
            if s > 0 or (strict and s == 0):
                return False
        return True

    @cached_property
    def vertices(self) -> list[VertexRecord]:
        return enumerate_vertices(self)

    @cached_property
    def faces(self) -> FaceLattice:
        return FaceLattice.build(self)

    @cached_property
    def tiles(self) -> list[dict[str, LorentzVector]]:
        """Wall normals of the 24 Q-tiles g(Q), g in G_I."""
        return [{w: g.matrix @ v for w, v in self.q_vectors.items()} for g in self.group_I]

    def face_point(self, face: Face) -> LorentzVector:
        """A point in the relative interior of a face (projective barycentre)."""
        pts = [self.vertices[i].point for i in sorted(face.vertices)]
        out = pts[0]
        for x in pts[1:]:
            out = out + x
        return out

    @cached_property
    def solid_angles(self) -> dict[frozenset, Fraction]:
        """Fraction of a small sphere around each finite face lying inside P.

        Counted in Q-tiles: tiles of P through the face over the order of
        the finite reflection group of Q at that point.
        """
        out = {}
        for face in self.faces.faces:
            if face.ideal:
                continue
            if face.dim == 4:
                out[face.facets] = Fraction(1)
                continue
            count, order = chambers_at(self, self.face_point(face))
            if not order:
                raise ConstructionError(f"no finite local group at face {sorted(face.facets)}")
            out[face.facets] = Fraction(count, order)
        return out


# ------------------------------------------------------------------ build

def _action_on(matrix: IsometryMatrix, vectors: Sequence[LorentzVector]) -> list[int] | None:
    images = [matrix @ v for v in vectors]
    out = []
    for w in images:
        k = next((j for j, v in enumerate(vectors) if v == w), None)
        if k is None:
            return None
        out.append(k)
    return out


def build_P(q_vectors: Mapping[str, LorentzVector],
            families: Mapping[str, str] = DEFAULT_FAMILIES) -> PolytopeP:
    q_vectors = dict(q_vectors)
    missing = set(families) | set(INTERNAL_WALLS)
    missing -= set(q_vectors)
    if missing:
        raise ConstructionError(f"missing Q walls: {sorted(missing)}")
    diagram = diagram_from_vectors(q_vectors)
    gens = {w: reflection_in(q_vectors[w]) for w in INTERNAL_WALLS}
    group = enumerate_group(list(gens.values()), bound=24)

    orbits: dict[str, list[LorentzVector]] = {}
    stabs: dict[str, int] = {}
    orbit_stabs: dict[str, list[frozenset]] = {}
    for wall in families:
        orb: list[LorentzVector] = []
        for g in group:
            w = g @ q_vectors[wall]
            j = next((j for j, o in enumerate(orb) if proportional(w, o)), None)
            if j is None:
                orb.append(w)
            elif orb[j] != w:
                raise ConstructionError(f"orbit of {wall} is not exactly permuted")
        orbits[wall] = orb
        stab = {k for k, g in enumerate(group) if g @ q_vectors[wall] == q_vectors[wall]}
        stabs[wall] = len(stab)
        # stabilizer of each orbit element, as a set of group indices
        orbit_stabs[wall] = [frozenset(k for k, g in enumerate(group) if g @ v == v) for v in orb]

    sizes = {families[w]: len(o) for w, o in orbits.items()}
    if sorted(sizes.items()) != sorted({"E": 4, "E'": 4, "H": 4, "H'": 4, "C": 6}.items()):
        raise ConstructionError(f"unexpected orbit sizes {sizes}")

    inv_fam = {fam: w for w, fam in families.items()}
    top = orbits[inv_fam["E"]]
    top_stabs = orbit_stabs[inv_fam["E"]]
    normals: dict[FacetLabel, LorentzVector] = {}
    wall_of: dict[FacetLabel, str] = {}
    for i, v in enumerate(top, 1):
        normals[FacetLabel("E", (i,))] = v
        wall_of[FacetLabel("E", (i,))] = inv_fam["E"]

    # index action of every element on the top facets
    perms = []
    for g in group:
        act = _action_on(g, top)
        if act is None:
            raise ConstructionError("G_I does not permute the top facets")
        perms.append(tuple(a + 1 for a in act))
    if len(set(perms)) != 24:
        raise ConstructionError("G_I does not act faithfully on the top facets")

    for fam in ("E'", "H", "H'"):
        wall = inv_fam[fam]
        for v, st in zip(orbits[wall], orbit_stabs[wall]):
            k = next((i for i, ts in enumerate(top_stabs, 1) if ts == st), None)
            if k is None:
                raise ConstructionError(f"no equivariant index for a {fam} facet")
            lab = FacetLabel(fam, (k,))
            if lab in normals:
                raise ConstructionError(f"index clash for {lab}")
            normals[lab] = v
            wall_of[lab] = wall

    # C facets: the top facets met inside the Q-tiles of the facet
    cwall = inv_fam["C"]
    twall = inv_fam["E"]
    if classify_pair(q_vectors[cwall], q_vectors[twall]).kind != "angle":
        raise ConstructionError("central wall does not meet the top wall in Q")
    stab_c = [h for h, g in enumerate(group) if g @ q_vectors[cwall] == q_vectors[cwall]]
    for g in group:
        v = g @ q_vectors[cwall]
        met = {top.index(g @ (group[h] @ q_vectors[twall])) + 1 for h in stab_c}
        if len(met) != 2:
            raise ConstructionError(f"central facet meets {len(met)} top facets")
        lab = FacetLabel("C", tuple(sorted(met)))
        if lab in normals and normals[lab] != v:
            raise ConstructionError(f"labeling constraint unsatisfiable at {lab}")
        normals[lab] = v
        wall_of[lab] = cwall
    if len(normals) != 22:
        raise ConstructionError(f"expected 22 labeled facets, got {len(normals)}")

    syms = []
    labels = sorted(normals)
    for g, perm in zip(group, perms):
        s = Symmetry(g, perm, False)
        _check_label_action(s, normals, labels)
        syms.append(s)
    named = {}
    for w in INTERNAL_WALLS:
        s = next(s for s in syms if s.matrix == gens[w])
        named[w] = Symmetry(s.matrix, s.perm, False, w)
    syms[0] = Symmetry(syms[0].matrix, syms[0].perm, False, "id")

    p = PolytopeP(
        q_vectors=q_vectors,
        q_diagram=diagram,
        normals=normals,
        wall_of=wall_of,
        group_I=syms,
        generators=named,
        orbit_sizes=sizes,
        stabilizer_sizes={families[w]: s for w, s in stabs.items()},
    )
    p.antipodal = antipodal_map(p)
    p.isom = [s for s in (_closure_syms(syms + [p.antipodal]))]
    for s in p.isom:
        _check_label_action(s, normals, labels)
    return p


def _check_label_action(s: Symmetry, normals: Mapping[FacetLabel, LorentzVector],
                        labels: Sequence[FacetLabel]) -> None:
    for lab in labels:
        if s.matrix @ normals[lab] != normals[s(lab)]:
            raise ConstructionError(f"symmetry {s.name or s.perm} does not map {lab} to {s(lab)}")


def _closure_syms(gens: Sequence[Symmetry]) -> list[Symmetry]:
    ident = next((g for g in gens if g.is_identity()), None)
    if ident is None:
        raise ConstructionError("identity missing from generators")
    elements = [ident]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = g @ s
                if h not in seen:
                    seen.add(h)
                    elements.append(h)
                    nxt.append(h)
        frontier = nxt
        if len(elements) > 10_000:
            raise GroupBoundExceeded("isometry group too large")
    return elements


def _q_symmetry(q: Mapping[str, LorentzVector]) -> IsometryMatrix:
    """The involution of Q exchanging t<->b, u<->l, i1<->i2 and fixing c, i0."""
    swap = {"t": "b", "b": "t", "u": "l", "l": "u", "i1": "i2", "i2": "i1", "c": "c", "i0": "i0"}
    names = list(swap)
    basis = None
    for combo in combinations(names, 5):
        if span_rank([q[n] for n in combo]) == 5:
            basis = combo
            break
    if basis is None:
        raise ConstructionError("Q normals do not span R^{1,4}")
    src = [[q[n].coords[i] for n in basis] for i in range(5)]
    dst = [[q[swap[n]].coords[i] for n in basis] for i in range(5)]
    m = linalg.matmul(dst, linalg.inverse(src))
    mat = IsometryMatrix(m, check=False)
    for n in names:
        if mat @ q[n] != q[swap[n]]:
            raise ConstructionError("Q has no symmetry swapping t/b, u/l, i1/i2")
    return IsometryMatrix(m)


def antipodal_map(p: PolytopeP) -> Symmetry:
    """Central inversion of P: the unique central element of (Q symmetry)·G_I."""
    j = _q_symmetry(p.q_vectors)
    labels = sorted(p.normals)
    candidates = []
    for g in p.group_I:
        m = j @ g.matrix
        if all(m @ s.matrix == s.matrix @ m for s in p.generators.values()):
            candidates.append(m)
    if len(candidates) != 1:
        raise ConstructionError(f"expected one central element, found {len(candidates)}")
    m = candidates[0]
    sym = Symmetry(m, (1, 2, 3, 4), True, "a")
    _check_label_action(sym, p.normals, labels)
    if not (m @ m).is_identity():
        raise ConstructionError("antipodal map is not an involution")
    return sym


def antipodal_certificate(p: PolytopeP) -> dict:
    """Check that a is the point reflection through the midpoint of V V'."""
    a = p.antipodal
    fixed = fixed_points(a.matrix)
    verts = {v.facets: v for v in p.vertices}
    top = frozenset(FacetLabel("E", (i,)) for i in range(1, 5))
    bottom = frozenset(FacetLabel("E'", (i,)) for i in range(1, 5))
    vt, vb = verts[top].point, verts[bottom].point
    centre_ok = False
    if len(fixed) == 1 and fixed[0].norm().sign() < 0:
        m = fixed[0]
        if m[0].sign() < 0:
            m = -m
        # m = s vt + t vb with s, t > 0
        sol = linalg.solve([[vt[i], vb[i]] for i in range(5)], list(m.coords))
        centre_ok = sol is not None and all(x.sign() > 0 for x in sol)
    return {
        "fixed_dim": len(fixed),
        "centre_timelike": bool(fixed) and fixed[0].norm().sign() < 0,
        "centre_on_edge_VV'": centre_ok,
        "swaps_V_V'": proportional(a.matrix @ vt, vb, positive=True),
        "involution": (a.matrix @ a.matrix).is_identity(),
        "orientation": a.orientation,
    }


def fixed_points(m: IsometryMatrix) -> list[LorentzVector]:
    from .lorentz import fixed_subspace
    return fixed_subspace(m)


def isom_group(p: PolytopeP) -> dict:
    a = p.antipodal
    order = len(p.isom)
    central = all((a @ s) == (s @ a) for s in p.isom)
    plus = [s for s in p.isom if s.orientation > 0]
    gi = set(p.group_I)
    plus_gi_even = all(s.perm_parity() == 1 for s in plus)
    report = {
        "order": order,
        "antipodal_central": central,
        "orientation_preserving": len(plus),
        "orientation_preserving_G_I_part_is_A4": plus_gi_even and len([s for s in plus if s in gi]) == 12,
        "antipodal_orientation": a.orientation,
        "label_actions_faithful": len({(s.perm, s.swap) for s in p.isom}) == order,
        "ok": order == 48 and central and len(plus) == 24 and plus_gi_even,
    }
    if order != 48:
        raise ConstructionError(f"|Isom(P)| = {order}, expected 48")
    return report


def orbit_stabilizer(p: PolytopeP) -> dict[str, tuple[int, int]]:
    return {fam: (p.orbit_sizes[fam], p.stabilizer_sizes[fam]) for fam in p.orbit_sizes}


# ------------------------------------------------------------------ vertices

def vertex_type(facets: Iterable[FacetLabel]) -> str | None:
    facets = list(facets)
    kinds = Counter(f.kind for f in facets)
    if len(facets) == 4:
        es = [f for f in facets if f.kind == "E"]
        hs = [f for f in facets if f.kind == "H"]
        side = {f.primed for f in es + hs}
        if len(side) != 1:
            return None
        if kinds == Counter({"E": 4}):
            return "1"
        if kinds == Counter({"E": 3, "H": 1}):
            return "2"
        if kinds == Counter({"E": 2, "C": 1, "H": 1}):
            return "3"
        return None
    if len(facets) == 6:
        fams = Counter(f.family for f in facets)
        if fams == Counter({"E": 1, "E'": 1, "H": 1, "H'": 1, "C": 2}):
            return "ideal"
    return None


def enumerate_vertices(p: PolytopeP) -> list[VertexRecord]:
    labels = sorted(p.normals)
    normals = [p.normals[x] for x in labels]
    n = len(labels)
    ultra = set()
    for i, j in combinations(range(n), 2):
        if classify_pair(normals[i], normals[j]).kind == "ultraparallel":
            ultra.add((i, j))
    found: dict[frozenset, VertexRecord] = {}
    covered: list[frozenset] = []
    for sub in combinations(range(n), 4):
        if any((i, j) in ultra for i, j in combinations(sub, 2)):
            continue
        subset = frozenset(sub)
        if any(subset <= c for c in covered):
            continue
        comp = orthogonal_complement([normals[i] for i in sub])
        if len(comp) != 1:
            continue
        x = comp[0]
        if x[0].sign() < 0:
            x = -x
        if x.norm().sign() > 0:
            continue
        signs = [minkowski_inner(x, nv).sign() for nv in normals]
        if any(s > 0 for s in signs):
            continue
        inc = frozenset(i for i, s in enumerate(signs) if s == 0)
        covered.append(inc)
        key = frozenset(labels[i] for i in inc)
        if key in found:
            continue
        vtype = vertex_type(key)
        ideal = x.norm().sign() == 0
        if vtype is None or (vtype == "ideal") != ideal:
            raise ConstructionError(f"vertex {sorted(key)} matches no link pattern")
        found[key] = VertexRecord(x, key, vtype)
    order = {"1": 0, "2": 1, "3": 2, "ideal": 3}
    return sorted(found.values(), key=lambda v: (order[v.type], sorted(x.sort_key() for x in v.facets)))


def vertex_census(p: PolytopeP) -> dict[str, int]:
    return dict(Counter(v.type for v in p.vertices))


def ideal_hyperplane(p: PolytopeP) -> LorentzVector | None:
    """A spacelike vector orthogonal to every ideal vertex, if one exists."""
    ideal = [v.point for v in p.vertices if v.ideal]
    comp = orthogonal_complement(ideal)
    if len(comp) != 1 or comp[0].norm().sign() <= 0:
        return None
    return comp[0]


def vertex_census_invariant(p: PolytopeP) -> bool:
    """Every symmetry permutes the vertex records preserving type."""
    by_key = {v.facets: v for v in p.vertices}
    for s in p.isom:
        for v in p.vertices:
            img = by_key.get(s.apply_set(v.facets))
            if img is None or img.type != v.type:
                return False
            if not proportional(s.matrix @ v.point, img.point, positive=True):
                return False
    return True


# ------------------------------------------------------------------ faces

@dataclass
class FaceLattice:
    faces: list[Face]
    by_facets: dict[frozenset, Face]
    vertex_faces: list[Face]

    @classmethod
    def build(cls, p: PolytopeP) -> FaceLattice:
        verts = p.vertices
        facet_verts = {lab: frozenset(i for i, v in enumerate(verts) if lab in v.facets)
                       for lab in p.normals}
        vsets: set[frozenset] = set(facet_verts.values())
        frontier = set(vsets)
        while frontier:
            new = set()
            for a in frontier:
                for b in list(vsets):
                    c = a & b
                    if c and c not in vsets:
                        new.add(c)
            vsets |= new
            frontier = new
        faces = []
        by_facets = {}
        for vs in vsets:
            labs = frozenset.intersection(*(verts[i].facets for i in vs))
            rk = span_rank([p.normals[x] for x in labs])
            dim = 4 - rk
            ideal = len(vs) == 1 and verts[next(iter(vs))].ideal
            if ideal and dim != 0:
                raise ConstructionError("ideal vertex with positive dimension")
            face = Face(labs, vs, dim, ideal)
            if labs in by_facets:
                raise ConstructionError("two faces with the same facet set")
            by_facets[labs] = face
            faces.append(face)
        whole = Face(frozenset(), frozenset(range(len(verts))), 4)
        faces.append(whole)
        by_facets[frozenset()] = whole
        vertex_faces = [by_facets[v.facets] for v in verts]
        faces.sort(key=lambda f: (f.dim, sorted(x.sort_key() for x in f.facets)))
        return cls(faces, by_facets, vertex_faces)

    def of_dim(self, d: int) -> list[Face]:
        return [f for f in self.faces if f.dim == d]

    def counts(self) -> dict[str, int]:
        c = Counter()
        for f in self.faces:
            c["ideal" if f.ideal else str(f.dim)] += 1
        return dict(sorted(c.items()))

    def image(self, s: Symmetry, face: Face) -> Face:
        return self.by_facets[s.apply_set(face.facets)]

    def ridge(self, f: FacetLabel, g: FacetLabel) -> Face | None:
        face = self.by_facets.get(self.closure({f, g}))
        return face if face is not None and face.dim == 2 else None

    def closure(self, labels: Iterable[FacetLabel]) -> frozenset:
        """Facet set of the smallest face lying in all the given facets."""
        labels = frozenset(labels)
        best = None
        for face in self.faces:
            if labels <= face.facets and (best is None or face.dim > best.dim):
                best = face
        return best.facets if best is not None else frozenset()

    def faces_containing(self, face: Face) -> list[Face]:
        return [g for g in self.faces if g is not face and g.vertices >= face.vertices
                and g.facets <= face.facets]


def facet_adjacency(p: PolytopeP) -> dict[tuple[FacetLabel, FacetLabel], dict]:
    lattice = p.faces
    out = {}
    for f, g in combinations(sorted(p.normals), 2):
        pc = p.facet_pair(f, g)
        ridge = lattice.ridge(f, g)
        common = lattice.by_facets.get(lattice.closure({f, g}))
        out[(f, g)] = {
            "pair": pc,
            "adjacent": ridge is not None,
            "dihedral": pc.dihedral() if ridge is not None else None,
            "touch": "ridge" if ridge is not None else (
                "ideal point" if common is not None and common.ideal else "disjoint"),
        }
    return out


def open_cell_sum(p: PolytopeP) -> int:
    """Alternating count of the open faces of P, ideal vertices removed."""
    return sum((-1) ** f.dim for f in p.faces.faces if not f.ideal)


def angle_sum_euler(p: PolytopeP) -> Fraction:
    """Sum of (-1)^dim F times the solid angle of F over the finite faces.

    In even dimension this is the Gauss-Bonnet volume term of P, so it
    must agree with 24 * chi_orb(Q).
    """
    return sum(((-1) ** f.dim * p.solid_angles[f.facets] for f in p.faces.faces if not f.ideal),
               Fraction(0))


# ------------------------------------------------------------------ Q chambers

def chambers_at(p: PolytopeP, point: LorentzVector) -> tuple[int, int | None]:
    """(number of Q tiles of P containing ``point``, order of Q's local group there)."""
    count = 0
    local_order = None
    for tile in p.tiles:
        inside = True
        on = []
        for w, n in tile.items():
            s = minkowski_inner(point, n).sign()
            if s > 0:
                inside = False
                break
            if s == 0:
                on.append(w)
        if inside:
            count += 1
            rep = finite_type(p.q_diagram, on)
            order = rep.order if rep is not None else None
            if local_order is None:
                local_order = order
            elif order != local_order:
                raise ConstructionError("inconsistent local groups at a vertex")
    return count, local_order


# ------------------------------------------------------------------ export

def to_json(p: PolytopeP) -> dict:
    return {
        "facets": {str(lab): {"wall": p.wall_of[lab], "normal": [str(x) for x in p.normals[lab]]}
                   for lab in p.labels},
        "symmetries": [
            {"perm": list(s.perm), "swap": s.swap, "orientation": s.orientation,
             "action": {str(l): str(s(l)) for l in p.labels}}
            for s in p.isom
        ],
        "vertices": [
            {"type": v.type, "facets": [str(x) for x in sorted(v.facets)],
             "point": [str(x) for x in v.point]}
            for v in p.vertices
        ],
        "census": vertex_census(p),
        "faces": p.faces.counts(),
    }


def dump_json(p: PolytopeP) -> str:
    return json.dumps(to_json(p), indent=1, sort_keys=True, ensure_ascii=False)
