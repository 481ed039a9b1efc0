"""Facet-pairing complexes built from copies of P.

A complex is a set of copies of P together with an involution on a subset
of the facet instances (copy, facet label).  Each pairing carries a
symmetry s of P sending the source label to the target label; as a gluing
map in hyperbolic space it is the reflection in the target facet composed
with s, so the glued copy sits on the far side of the facet.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .lorentz import (
    IsometryMatrix,
    LorentzVector,
    fixed_subspace,
    in_span,
    minkowski_inner,
    reflection_in,
    restricted_signature,
)
from .polytope import Face, FacetLabel, PolytopeP, Symmetry

Instance = tuple[int, FacetLabel]
Cell = tuple[int, frozenset]


class GluingError(ValueError):
    pass


class GluingParseError(GluingError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def instance_text(inst: Instance) -> str:
    return f"{inst[0]}:{inst[1]}"


def parse_instance(text: str) -> Instance:
    copy, _, label = text.partition(":")
    if not copy.isdigit() or not label:
        raise ValueError(f"bad facet instance {text!r}")
    return int(copy), FacetLabel.parse(label)


@dataclass(frozen=True)
class Pairing:
    source: Instance
    target: Instance
    symmetry: Symmetry
    word: str = ""

    def reversed(self) -> Pairing:
        return Pairing(self.target, self.source, self.symmetry.inverse(), f"({self.word})^-1")

    def to_text(self) -> str:
        return f"pair {instance_text(self.source)} {instance_text(self.target)} {self.word}"


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if repr(ry) < repr(rx):
                rx, ry = ry, rx
            self.parent[ry] = rx

    def classes(self) -> list[list]:
        groups = defaultdict(list)
        for x in self.parent:
            groups[self.find(x)].append(x)
        return [sorted(g, key=_cell_key) for g in groups.values()]


def _cell_key(x) -> tuple:
    parts = []
    for item in x:
        if isinstance(item, frozenset):
            parts.append(tuple(sorted(f.sort_key() for f in item)))
        else:
            parts.append(item)
    return tuple(parts)


class GluedComplex:
    """Copies of P with a partial facet pairing; immutable once built."""

    def __init__(self, p: PolytopeP, n_copies: int, pairings: Iterable[Pairing] = (),
                 name: str = "K") -> None:
        self.p = p
        self.n_copies = n_copies
        self.name = name
        self._pair: dict[Instance, Pairing] = {}
        self._listed: list[Pairing] = []
        for pr in pairings:
            self._add(pr)

    def _add(self, pr: Pairing) -> None:
        for inst in (pr.source, pr.target):
            if not 0 <= inst[0] < self.n_copies:
                raise GluingError(f"copy index out of range in {pr.to_text()}")
            if inst[1] not in self.p.normals:
                raise GluingError(f"unknown facet {inst[1]}")
            if inst in self._pair:
                raise GluingError(f"facet instance {instance_text(inst)} paired twice")
        if pr.source == pr.target:
            raise GluingError(f"facet instance {instance_text(pr.source)} paired with itself")
        if pr.symmetry(pr.source[1]) != pr.target[1]:
            raise GluingError(
                f"{pr.word or 'symmetry'} maps {pr.source[1]} to {pr.symmetry(pr.source[1])}, "
                f"not {pr.target[1]}")
        self._pair[pr.source] = pr
        self._pair[pr.target] = pr.reversed()
        self._listed.append(pr)

    def extended(self, pairings: Iterable[Pairing], name: str) -> GluedComplex:
        return GluedComplex(self.p, self.n_copies, list(self._listed) + list(pairings), name)

    @property
    def pairings(self) -> list[Pairing]:
        return list(self._listed)

    def partner(self, inst: Instance) -> Pairing | None:
        return self._pair.get(inst)

    def instances(self) -> list[Instance]:
        return [(x, lab) for x in range(self.n_copies) for lab in self.p.labels]

    @property
    def boundary(self) -> list[Instance]:
        return [i for i in self.instances() if i not in self._pair]

    def is_closed(self) -> bool:
        return not self.boundary

    def pairing_is_involution(self) -> bool:
        for inst, pr in self._pair.items():
            back = self._pair.get(pr.target)
            if back is None or back.target != inst or pr.target == inst:
                return False
            if not (back.symmetry @ pr.symmetry).is_identity():
                return False
        return True

    def gluing_matrix(self, pr: Pairing) -> IsometryMatrix:
        """Map from the target copy's chart to the source copy's chart."""
        return reflection_in(self.p.normals[pr.source[1]]) @ pr.symmetry.inverse().matrix

    @cached_property
    def cells(self) -> CellStructure:
        return CellStructure(self)

    def to_text(self) -> str:
        return "\n".join(pr.to_text() for pr in self._listed) + "\n"


# ------------------------------------------------------------------ cells

class CellStructure:
    """Classes of (copy, face) cells under the pairing identifications."""

    def __init__(self, k: GluedComplex) -> None:
        p = k.p
        lattice = p.faces
        self.k = k
        self.faces_in: dict[FacetLabel, list[Face]] = {
            lab: [f for f in lattice.faces if lab in f.facets] for lab in p.labels}
        uf = _UnionFind()
        for x in range(k.n_copies):
            for f in lattice.faces:
                uf.add((x, f.facets))
        for pr in k.pairings:
            (x, lab), (y, _) = pr.source, pr.target
            for f in self.faces_in[lab]:
                img = pr.symmetry.apply_set(f.facets)
                if img not in lattice.by_facets:
                    raise GluingError(f"pairing {pr.to_text()} does not map faces to faces")
                uf.union((x, f.facets), (y, img))
        self.classes: list[list[Cell]] = sorted(uf.classes(), key=lambda c: _cell_key(c[0]))
        self.class_of: dict[Cell, int] = {}
        for i, cls in enumerate(self.classes):
            for cell in cls:
                self.class_of[cell] = i

        # vertex-link flags (copy, vertex index, face strictly containing it)
        verts = p.vertices
        vindex = {v.facets: i for i, v in enumerate(verts)}
        self.vindex = vindex
        flags = _UnionFind()
        self.above: dict[int, list[Face]] = {
            i: [f for f in lattice.faces if i in f.vertices and f.facets != v.facets]
            for i, v in enumerate(verts)}
        for x in range(k.n_copies):
            for i in self.above:
                for f in self.above[i]:
                    flags.add((x, i, f.facets))
        for pr in k.pairings:
            (x, lab), (y, _) = pr.source, pr.target
            s = pr.symmetry
            for i, v in enumerate(verts):
                if lab not in v.facets:
                    continue
                j = vindex[s.apply_set(v.facets)]
                for f in self.above[i]:
                    if lab in f.facets:
                        flags.union((x, i, f.facets), (y, j, s.apply_set(f.facets)))
        self.flag_classes = flags.classes()

    def face(self, cell: Cell) -> Face:
        return self.k.p.faces.by_facets[cell[1]]

    def dim(self, i: int) -> int:
        return self.face(self.classes[i][0]).dim

    def is_ideal(self, i: int) -> bool:
        return self.face(self.classes[i][0]).ideal

    def boundary_instances(self, cell: Cell) -> list[Instance]:
        x, key = cell
        return [(x, lab) for lab in sorted(key) if self.k.partner((x, lab)) is None]

    def class_boundary(self, i: int) -> list[Instance]:
        out = []
        for cell in self.classes[i]:
            out += self.boundary_instances(cell)
        return out

    def weight(self, i: int) -> Fraction:
        """Solid-angle weight: the fraction of a full sphere filled around the cell."""
        angles = self.k.p.solid_angles
        return sum((angles[c[1]] for c in self.classes[i]), Fraction(0))

    def counts(self) -> dict[str, int]:
        c = Counter()
        for i in range(len(self.classes)):
            c["ideal" if self.is_ideal(i) else str(self.dim(i))] += 1
        return dict(sorted(c.items()))


# ------------------------------------------------------------------ ridges

@dataclass(frozen=True)
class RidgeClass:
    members: tuple[Cell, ...]   # in walk order
    angle: Fraction             # total dihedral angle, in units of pi
    closed: bool
    verdict: str                # interior, facet-interior, corner or bad
    end_instances: tuple[Instance, ...]
    return_map_trivial: bool | None

    @property
    def length(self) -> int:
        return len(self.members)

    def describe(self) -> str:
        cells = " ".join(f"{x}:{'&'.join(str(l) for l in sorted(k))}" for x, k in self.members)
        return f"[{cells}] angle {self.angle}pi {self.verdict}"


def _dihedral(p: PolytopeP, ridge: frozenset) -> Fraction:
    f, g = sorted(ridge)
    d = p.facet_pair(f, g).dihedral()
    if d is None:
        raise GluingError(f"ridge {f}&{g} without a dihedral angle")
    return d


def ridge_classes(k: GluedComplex) -> list[RidgeClass]:
    cs = k.cells
    p = k.p
    out = []
    for i, cls in enumerate(cs.classes):
        if cs.dim(i) != 2:
            continue
        if any(len(c[1]) != 2 for c in cls):
            raise GluingError("a 2-face lies in more than two facets")
        out.append(_walk_ridge(k, cls))
    return out


def _walk_ridge(k: GluedComplex, cls: list[Cell]) -> RidgeClass:
    p = k.p

    def step(cell: Cell, lab: FacetLabel):
        pr = k.partner((cell[0], lab))
        if pr is None:
            return None
        y = pr.target[0]
        return (y, pr.symmetry.apply_set(cell[1])), pr.target[1], pr

    # start at an end of the chain when there is one
    start, first_exit = cls[0], sorted(cls[0][1])[0]
    for cell in cls:
        free = [lab for lab in sorted(cell[1]) if k.partner((cell[0], lab)) is None]
        if free:
            start = cell
            first_exit = next(lab for lab in sorted(cell[1]) if lab != free[0])
            break
    members = [start]
    ends: list[Instance] = []
    if k.partner((start[0], first_exit)) is None:
        ends.append((start[0], first_exit))
    other = [lab for lab in start[1] if lab != first_exit][0]
    if k.partner((start[0], other)) is None:
        ends.append((start[0], other))
    cell, exit_lab = start, first_exit
    develop = IsometryMatrix.identity()
    closed = False
    trivial = None
    while True:
        nxt = step(cell, exit_lab)
        if nxt is None:
            break
        new_cell, entry, pr = nxt
        develop = develop @ k.gluing_matrix(pr)
        if new_cell == start:
            closed = True
            trivial = develop.is_identity()
            break
        members.append(new_cell)
        exit_lab = next(lab for lab in new_cell[1] if lab != entry)
        cell = new_cell
        if k.partner((cell[0], exit_lab)) is None:
            ends.append((cell[0], exit_lab))
            break
        if len(members) > len(cls):
            raise GluingError("ridge walk did not terminate")
    if len(members) != len(cls):
        raise GluingError("ridge walk missed members of its class")
    angle = sum((_dihedral(p, c[1]) for c in members), Fraction(0))
    if closed:
        verdict = "interior" if angle == 2 and trivial else "bad"
    elif angle == 1:
        verdict = "facet-interior"
    elif angle == Fraction(1, 2):
        kinds = sorted(inst[1].kind for inst in ends)
        verdict = "corner" if kinds == ["C", "H"] else "bad corner"
    else:
        verdict = "bad"
    return RidgeClass(tuple(members), angle, closed, verdict, tuple(ends), trivial)


def ridge_census(rcs: Sequence[RidgeClass]) -> dict:
    c = Counter((r.verdict, str(r.angle), r.length) for r in rcs)
    return {f"{v} {a}pi x{n}": m for (v, a, n), m in sorted(c.items())}


# ------------------------------------------------------------------ vertex links

@dataclass(frozen=True)
class LinkReport:
    vertex_type: str
    members: tuple[tuple[int, int], ...]   # (copy, vertex index)
    weight: Fraction | None                # solid-angle fraction; None for ideal
    cells: dict                            # link dimension -> number of cell classes
    euler: int
    boundary_euler: int
    h_euler: int
    c_euler: int
    hc_euler: int
    verdict: str
    detail: dict = field(default_factory=dict)


def vertex_links(k: GluedComplex) -> list[LinkReport]:
    cs = k.cells
    p = k.p
    verts = p.vertices
    by_class: dict[int, list] = defaultdict(list)
    for fc in cs.flag_classes:
        x, v, _ = fc[0]
        by_class[cs.class_of[(x, verts[v].facets)]].append(fc)
    reports = []
    for i, cls in enumerate(cs.classes):
        if cs.dim(i) != 0:
            continue
        members = tuple(sorted((x, cs.vindex[key]) for x, key in cls))
        vtype = verts[members[0][1]].type
        reports.append(_link_report(k, vtype, members, by_class[i], i))
    return reports


def _link_report(k: GluedComplex, vtype: str, members, flag_cls, cls_index: int) -> LinkReport:
    p = k.p
    cells = Counter()
    euler = b_euler = h_euler = c_euler = hc_euler = 0
    for fc in flag_cls:
        x, _, key = fc[0]
        d = p.faces.by_facets[key].dim - 1
        cells[d] += 1
        sign = (-1) ** d
        euler += sign
        kinds = set()
        for y, _, key2 in fc:
            for lab in key2:
                if k.partner((y, lab)) is None:
                    kinds.add(lab.kind)
        if kinds:
            b_euler += sign
        if "H" in kinds:
            h_euler += sign
        if "C" in kinds:
            c_euler += sign
        if {"H", "C"} <= kinds:
            hc_euler += sign
    ideal = vtype == "ideal"
    weight = None if ideal else k.cells.weight(cls_index)
    detail = {}
    if ideal:
        verdict = "cusp"
    elif weight == 1 and b_euler == 0 and euler == 0:
        verdict = "sphere"
    elif weight == Fraction(1, 2) and euler == 1 and b_euler == 2 and (h_euler == 2 or c_euler == 2) \
            and hc_euler == 0:
        verdict = "half-sphere"
    elif weight == Fraction(1, 4) and euler == 1 and b_euler == 2 and h_euler == 1 \
            and c_euler == 1 and hc_euler == 0:
        verdict = "corner"
    else:
        verdict = "bad"
    if vtype == "1":
        detail = _tetrahedra_check(flag_cls, members, p)
        if verdict == "sphere" and not detail["closed_3_complex"]:
            verdict = "bad"
    return LinkReport(vtype, members, weight, dict(sorted(cells.items())), euler, b_euler,
                      h_euler, c_euler, hc_euler, verdict, detail)


def _tetrahedra_check(flag_cls, members, p: PolytopeP) -> dict:
    tri_sizes = Counter()
    edge_sizes = Counter()
    dual_edges = set()
    for fc in flag_cls:
        d = p.faces.by_facets[fc[0][2]].dim
        if d == 3:
            tri_sizes[len(fc)] += 1
            ends = tuple(sorted({(x, v) for x, v, _ in fc}))
            if len(ends) == 2:
                dual_edges.add(ends)
        elif d == 2:
            edge_sizes[len(fc)] += 1
    n = len(members)
    complete = len(dual_edges) == n * (n - 1) // 2
    return {
        "tetrahedra": n,
        "triangle_degrees": dict(tri_sizes),
        "edge_degrees": dict(edge_sizes),
        "dual_graph_complete": complete,
        "closed_3_complex": set(tri_sizes) == {2} and set(edge_sizes) == {3},
    }


# ------------------------------------------------------------------ cusps

@dataclass(frozen=True)
class CuspReport:
    members: tuple[tuple[int, int], ...]
    cycle_length: int | None
    monodromy: dict
    preserves_corners: bool
    closed_link: bool
    link_euler: int


def _opposite(p: PolytopeP, facets: frozenset, lab: FacetLabel) -> FacetLabel:
    opp = [g for g in facets if g != lab and p.facet_pair(lab, g).kind == "tangent"]
    if len(opp) != 1:
        raise GluingError(f"no unique opposite face of {lab} at an ideal vertex")
    return opp[0]


def cusp_reports(k: GluedComplex) -> list[CuspReport]:
    p = k.p
    cs = k.cells
    links = {r.members: r for r in vertex_links(k) if r.vertex_type == "ideal"}
    out = []
    for members, link in links.items():
        x0, v0 = members[0]
        facets0 = p.vertices[v0].facets
        start_face = next(f for f in sorted(facets0) if f.family == "E")
        # walk across the E faces: exit through a face, enter the next cube, leave opposite
        transport = {f: f for f in facets0}
        cell = (x0, facets0)
        exit_lab = start_face
        length = 0
        cycle = None
        while True:
            pr = k.partner((cell[0], exit_lab))
            if pr is None:
                break
            s = pr.symmetry
            transport = {f: s(g) for f, g in transport.items()}
            cell = (pr.target[0], s.apply_set(cell[1]))
            length += 1
            entry = pr.target[1]
            exit_lab = _opposite(p, cell[1], entry)
            if cell == (x0, facets0) and entry == _opposite(p, facets0, start_face):
                cycle = length
                break
            if length > 4 * k.n_copies * 12:
                break
        mono = {str(f): str(g) for f, g in sorted(transport.items())} if cycle else {}
        preserves = bool(cycle) and all(f.kind == g.kind for f, g in transport.items())
        out.append(CuspReport(members, cycle, mono, preserves, link.boundary_euler == 0 and
                              link.euler == 0, link.euler))
    return out


def boundary_components(k: GluedComplex) -> dict[str, int]:
    """Number of boundary facets of the complex, by colour.

    Two unpaired facet instances belong to the same facet when a ridge
    chain of total angle pi runs from one to the other.
    """
    uf = _UnionFind()
    for inst in k.boundary:
        uf.add(inst)
    for r in ridge_classes(k):
        if r.verdict == "facet-interior" and len(r.end_instances) == 2:
            uf.union(*r.end_instances)
    out = Counter(cls[0][1].kind for cls in uf.classes())
    return dict(sorted(out.items()))


# ------------------------------------------------------------------ orientability

def orientability(k: GluedComplex) -> tuple[bool, dict[int, int]]:
    """Propagate chart orientations across pairings.

    Crossing a pairing with symmetry s, the gluing map is the facet
    reflection composed with s, so orientations agree iff eps_y = -det(s) eps_x.
    """
    eps: dict[int, int] = {}
    ok = True
    for root in range(k.n_copies):
        if root in eps:
            continue
        eps[root] = 1
        stack = [root]
        while stack:
            x = stack.pop()
            for lab in k.p.labels:
                pr = k.partner((x, lab))
                if pr is None:
                    continue
                y = pr.target[0]
                want = -pr.symmetry.orientation * eps[x]
                if y not in eps:
                    eps[y] = want
                    stack.append(y)
                elif eps[y] != want:
                    ok = False
    return ok, dict(sorted(eps.items()))


def is_connected(k: GluedComplex) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for pr in k.pairings:
            for a, b in ((pr.source[0], pr.target[0]), (pr.target[0], pr.source[0])):
                if a == x and b not in seen:
                    seen.add(b)
                    stack.append(b)
    return len(seen) == k.n_copies


# ------------------------------------------------------------------ global isometries

@dataclass(frozen=True)
class GlobalIsometry:
    name: str
    images: tuple[tuple[int, Symmetry], ...]   # copy x -> (target copy, chart map)

    def copy_map(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.images)

    def on_instance(self, inst: Instance) -> Instance:
        y, g = self.images[inst[0]]
        return y, g(inst[1])

    def on_cell(self, cell: Cell) -> Cell:
        y, g = self.images[cell[0]]
        return y, g.apply_set(cell[1])

    def __matmul__(self, other: GlobalIsometry) -> GlobalIsometry:
        imgs = []
        for x, (y, g) in enumerate(other.images):
            z, h = self.images[y]
            imgs.append((z, h @ g))
        return GlobalIsometry(f"{self.name}*{other.name}", tuple(imgs))

    def is_identity(self) -> bool:
        return all(y == x and g.is_identity() for x, (y, g) in enumerate(self.images))

    def is_involution(self) -> bool:
        return (self @ self).is_identity() and not self.is_identity()

    def same_as(self, other: GlobalIsometry) -> bool:
        return all(y1 == y2 and g1 == g2 for (y1, g1), (y2, g2) in zip(self.images, other.images))

    def orientation_action(self, eps: dict[int, int]) -> int | None:
        acts = {eps[y] * g.orientation * eps[x] for x, (y, g) in enumerate(self.images)}
        return acts.pop() if len(acts) == 1 else None


def induce_isometry(k: GluedComplex, g: Symmetry, name: str = "") -> GlobalIsometry:
    """Extend a symmetry of copy 0 across the pairings, checking equivariance."""
    images: dict[int, tuple[int, Symmetry]] = {0: (0, g)}
    stack = [0]
    while stack:
        x = stack.pop()
        tx, gx = images[x]
        for lab in k.p.labels:
            pr = k.partner((x, lab))
            img_inst = (tx, gx(lab))
            pr_img = k.partner(img_inst)
            if (pr is None) != (pr_img is None):
                raise GluingError(f"{name or 'symmetry'} does not respect the pairing at "
                                  f"{instance_text((x, lab))}")
            if pr is None:
                continue
            y = pr.target[0]
            ty = pr_img.target[0]
            gy = pr_img.symmetry @ gx @ pr.symmetry.inverse()
            if y in images:
                if images[y][0] != ty or images[y][1] != gy:
                    raise GluingError(f"no equivariant extension of {name or 'symmetry'}")
            else:
                images[y] = (ty, gy)
                stack.append(y)
    if len(images) != k.n_copies:
        raise GluingError("complex is not connected")
    iso = GlobalIsometry(name or g.name, tuple(images[x] for x in range(k.n_copies)))
    if sorted(iso.copy_map()) != list(range(k.n_copies)):
        raise GluingError("induced map does not permute the copies")
    return iso


# ------------------------------------------------------------------ free involutions

PARTS = {"H": "H-side", "C": "C-side"}


def verify_free_boundary_involution(k: GluedComplex, phi: GlobalIsometry, part: str) -> dict:
    """Check that phi is a fixed-point free involution of the given boundary part."""
    if part not in PARTS:
        raise ValueError(f"part must be one of {sorted(PARTS)}")
    cs = k.cells
    p = k.p
    involution = phi.is_involution()
    part_inst = [i for i in k.boundary if i[1].kind == part]
    preserves = all(phi.on_instance(i) in set(part_inst) for i in part_inst)
    # a finite-order isometry mapping an open cell to itself fixes a point of it
    fixed_cells = []
    for i, cls in enumerate(cs.classes):
        if cs.is_ideal(i):
            continue
        if not any(inst[1].kind == part for inst in cs.class_boundary(i)):
            continue
        img = phi.on_cell(cls[0])
        if cs.class_of.get(img) == i:
            fixed_cells.append(cls[0])
    loci = []
    for x, (y, g) in enumerate(phi.images):
        if y != x:
            continue
        loci.append(_fixed_locus(k, x, g))
    free = not fixed_cells
    return {
        "isometry": phi.name,
        "part": PARTS[part],
        "involution": involution,
        "preserves_part": preserves,
        "fixed_boundary_cells": [f"{x}:{'&'.join(str(l) for l in sorted(key))}" for x, key in fixed_cells],
        "fixed_loci": loci,
        "ok": involution and preserves and free,
    }


def _fixed_locus(k: GluedComplex, x: int, g: Symmetry) -> dict:
    p = k.p
    basis = fixed_subspace(g.matrix)
    pos, neg, zero = restricted_signature(basis)
    boundary = [lab for lab in p.labels if k.partner((x, lab)) is None]
    ideal = [v for v in p.vertices if v.ideal and in_span(v.point, basis)]
    info: dict = {"copy": x, "dim": len(basis), "signature": [pos, neg, zero]}
    if neg == 0:
        info.update(kind="empty", misses_boundary=True)
    elif len(basis) == 1:
        pt = basis[0]
        if pt[0].sign() < 0:
            pt = -pt
        inside = p.contains(pt)
        strict = all(minkowski_inner(pt, p.normals[lab]).sign() < 0 for lab in boundary)
        info.update(kind="point", inside_P=inside, misses_boundary=(not inside) or strict)
    elif len(basis) == 2 and len(ideal) == 2:
        a, b = ideal
        mid = a.point + b.point
        on_both = [str(lab) for lab in boundary if lab in a.facets and lab in b.facets]
        info.update(kind="line",
                    endpoints=sorted([[str(f) for f in sorted(a.facets)], [str(f) for f in sorted(b.facets)]]),
                    crosses_interior=p.contains(mid, strict=True),
                    misses_boundary=not on_both and all(
                        minkowski_inner(mid, p.normals[lab]).sign() < 0 for lab in boundary))
    else:
        # freeness is then decided by the boundary cell classes alone
        info.update(kind=f"{len(basis)}-dim", ideal_points=len(ideal), misses_boundary=None)
    return info


# ------------------------------------------------------------------ X and M

def x_rules() -> list[tuple[Instance, Instance, str]]:
    """The gluing rules of X on the complete graph K5 of copies 0..4."""
    rules = []
    for j in range(1, 5):
        for fam in ("E", "E'"):
            rules.append(((0, FacetLabel(fam, (j,))), (j, FacetLabel(fam, (j,))), "id"))
    for i, j in combinations(range(1, 5), 2):
        for fam in ("E", "E'"):
            rules.append(((i, FacetLabel(fam, (j,))), (j, FacetLabel(fam, (i,))), f"r{i}{j}"))
    return rules


_LINE = re.compile(r"^pair\s+(\S+)\s+(\S+)\s+(\S+)$")


def parse_gluing(text: str) -> list[tuple[Instance, Instance, str]]:
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise GluingParseError(n, f"expected 'pair <copy>:<facet> <copy>:<facet> <word>', got {line!r}")
        try:
            out.append((parse_instance(m[1]), parse_instance(m[2]), m[3]))
        except ValueError as exc:
            raise GluingParseError(n, str(exc)) from None
    return out


def load_gluing(path: str | Path) -> list[tuple[Instance, Instance, str]]:
    return parse_gluing(Path(path).read_text())


def build_complex(p: PolytopeP, rules: Sequence[tuple[Instance, Instance, str]], name: str,
                  n_copies: int | None = None) -> GluedComplex:
    if n_copies is None:
        n_copies = 1 + max(max(a[0], b[0]) for a, b, _ in rules)
    pairings = []
    for src, dst, word in rules:
        try:
            sym = p.word(word)
        except ValueError as exc:
            raise GluingError(str(exc)) from None
        pairings.append(Pairing(src, dst, sym, word))
    return GluedComplex(p, n_copies, pairings, name)


def build_X(p: PolytopeP, rules: Sequence[tuple[Instance, Instance, str]] | None = None) -> GluedComplex:
    return build_complex(p, x_rules() if rules is None else rules, "X", 5)


def boundary_pairings(k: GluedComplex, phi: GlobalIsometry, part: str, word: str) -> list[Pairing]:
    out = []
    done = set()
    for inst in k.boundary:
        if inst[1].kind != part or inst in done:
            continue
        y, g = phi.images[inst[0]]
        target = (y, g(inst[1]))
        if target == inst:
            raise GluingError(f"{word} fixes the facet instance {instance_text(inst)}")
        done.add(inst)
        done.add(target)
        out.append(Pairing(inst, target, g, word))
    return out


def build_M(x: GluedComplex, h: GlobalIsometry, c: GlobalIsometry, name: str = "M") -> GluedComplex:
    for phi in (h, c):
        if not phi.is_involution():
            raise GluingError(f"{phi.name} is not an involution")
    if h.same_as(c):
        raise GluingError("the two involutions coincide")
    return x.extended(boundary_pairings(x, h, "H", h.name) + boundary_pairings(x, c, "C", c.name), name)


# ------------------------------------------------------------------ verification

def euler_characteristic(k: GluedComplex, chi_q: Fraction) -> dict:
    """Euler characteristic by Q-tile count and by cell classes.

    The cell count weights each finite cell class by its solid angle (1 for
    interior cells, 1/2 on a boundary facet, 1/4 on a corner).  A closed
    manifold has every weight 1, so there the plain alternating count of
    cell classes must agree as well.
    """
    cs = k.cells
    primary = 24 * k.n_copies * chi_q
    weighted = Fraction(0)
    plain = 0
    for i in range(len(cs.classes)):
        if cs.is_ideal(i):
            continue
        sign = (-1) ** cs.dim(i)
        weighted += sign * cs.weight(i)
        plain += sign
    return {
        "q_tiles": 24 * k.n_copies,
        "primary": primary,
        "cell_sum": weighted,
        "open_cell_sum": plain,
        "agree": primary == weighted and (not k.is_closed() or plain == weighted),
    }


def verify_manifold_with_corners(k: GluedComplex) -> dict:
    cs = k.cells
    ridges = ridge_classes(k)
    links = vertex_links(k)
    cusps = cusp_reports(k)
    bad_ridges = [r.describe() for r in ridges if r.verdict not in ("interior", "facet-interior", "corner")]
    weights_ok = []
    for i in range(len(cs.classes)):
        if cs.is_ideal(i):
            continue
        w = cs.weight(i)
        nb = {inst[1].kind for inst in cs.class_boundary(i)}
        want = Fraction(1) if not nb else Fraction(1, 2) if len(nb) == 1 else Fraction(1, 4)
        weights_ok.append(w == want)
    bad_cells = []
    for i in range(len(cs.classes)):
        if cs.is_ideal(i) or cs.dim(i) == 4:
            continue
        nb = {inst[1].kind for inst in cs.class_boundary(i)}
        want = Fraction(1) if not nb else Fraction(1, 2) if len(nb) == 1 else Fraction(1, 4)
        if cs.weight(i) != want:
            x, key = cs.classes[i][0]
            bad_cells.append(f"dim {cs.dim(i)} class of {x}:{'&'.join(str(l) for l in sorted(key))} "
                             f"({len(cs.classes[i])} cells) fills {cs.weight(i)} of a sphere, expected {want}")
    bad_links = [(l.vertex_type, l.members, l.verdict) for l in links if l.verdict == "bad"]
    type1 = [l for l in links if l.vertex_type == "1"]
    corners = [r for r in ridges if r.verdict == "corner"]
    cusp_ok = all(c.cycle_length is not None and c.preserves_corners for c in cusps)
    ok = not bad_ridges and all(weights_ok) and not bad_links and cusp_ok and k.pairing_is_involution()
    return {
        "pairings": len(k.pairings),
        "boundary_instances": len(k.boundary),
        "pairing_involution": k.pairing_is_involution(),
        "cells": cs.counts(),
        "ridge_census": ridge_census(ridges),
        "bad_ridges": bad_ridges,
        "corners_bicoloured": all(sorted(i[1].kind for i in r.end_instances) == ["C", "H"] for r in corners),
        "corner_count": len(corners),
        "solid_angles_ok": all(weights_ok),
        "bad_cells": bad_cells,
        "link_census": dict(sorted(Counter(f"{l.vertex_type}:{l.verdict}" for l in links).items())),
        "type1_links": [
            {"tetrahedra": l.detail.get("tetrahedra"), "euler": l.euler,
             "dual_graph_complete": l.detail.get("dual_graph_complete"),
             "triangle_degrees": {str(a): b for a, b in l.detail.get("triangle_degrees", {}).items()},
             "edge_degrees": {str(a): b for a, b in l.detail.get("edge_degrees", {}).items()}}
            for l in type1],
        "bad_links": [f"type {t} at {m}: {v}" for t, m, v in bad_links],
        "cusps": dict(sorted(Counter(
            f"length {c.cycle_length}, corners {'kept' if c.preserves_corners else 'moved'}, "
            f"link {'closed' if c.closed_link else 'with boundary'}" for c in cusps).items())),
        "ok": ok,
        "_ridges": ridges,
        "_links": links,
        "_cusps": cusps,
    }


def public(report: dict) -> dict:
    return {k: v for k, v in report.items() if not k.startswith("_")}


@dataclass
class ManifoldResult:
    complex: GluedComplex
    h: GlobalIsometry
    c: GlobalIsometry
    h_report: dict
    c_report: dict
    commute: bool
    manifold: dict
    orientable: bool
    orientation: dict[int, int]
    euler: dict

    corners: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.h_report["ok"] and self.c_report["ok"] and self.commute
                and self.manifold["ok"] and self.complex.is_closed() and self.euler["agree"]
                and self.corners.get("all_length_4", False))


def involution_words() -> list[str]:
    return ["a", "a*r12", "a*r34", "a*r12*r34"]


def close_up(x: GluedComplex, h_word: str, c_word: str, chi_q: Fraction,
             name: str = "M") -> ManifoldResult:
    p = x.p
    h = induce_isometry(x, p.word(h_word), h_word)
    c = induce_isometry(x, p.word(c_word), c_word)
    h_rep = verify_free_boundary_involution(x, h, "H")
    c_rep = verify_free_boundary_involution(x, c, "C")
    commute = (h @ c).same_as(c @ h)
    if not (h_rep["ok"] and c_rep["ok"]):
        raise GluingError(f"{h_word}/{c_word} are not free involutions of their boundary parts")
    m = build_M(x, h, c, name)
    man = verify_manifold_with_corners(m)
    orientable, eps = orientability(m)
    chi = euler_characteristic(m, chi_q)
    result = ManifoldResult(m, h, c, h_rep, c_rep, commute, man, orientable, eps, chi)
    result.corners = corner_cycles(result, x)
    return result


def corner_cycles(m: ManifoldResult, x: GluedComplex) -> dict:
    """Corner cycles of M: orbits of the corner cells of X under <h, c>.

    Every cell class of X lying in both an H and a C facet must have an
    orbit of length 4; for 2-dimensional corners the ridge walk in M must
    also return with the identity.
    """
    cs = x.cells
    group = [m.h, m.c, m.h @ m.c]
    lengths = Counter()
    short = []
    for i, cls in enumerate(cs.classes):
        if cs.is_ideal(i):
            continue
        if not {"H", "C"} <= {inst[1].kind for inst in cs.class_boundary(i)}:
            continue
        orbit = {i} | {cs.class_of[g.on_cell(cls[0])] for g in group}
        lengths[(cs.dim(i), len(orbit))] += 1
        if len(orbit) != 4:
            xx, key = cls[0]
            short.append(f"dim {cs.dim(i)} corner cell {xx}:{'&'.join(str(l) for l in sorted(key))} "
                         f"has a cycle of length {len(orbit)}")
    xc = {r.members[0] for r in ridge_classes(x) if r.verdict == "corner"}
    cyc = [r for r in m.manifold["_ridges"] if any(c in xc for c in r.members)]
    return {
        "corner_cells": sum(lengths.values()),
        "lengths": {f"dim {d}, length {n}": c for (d, n), c in sorted(lengths.items())},
        "short_cycles": short,
        "ridge_cycles": len(cyc),
        "ridge_lengths": sorted({r.length for r in cyc}),
        "return_maps_trivial": all(r.return_map_trivial for r in cyc),
        "covers_all_corners": len({c for r in cyc for c in r.members} & xc) == len(xc),
        "all_length_4": not short and all(r.length == 4 for r in cyc),
    }


def variant_manifolds(x: GluedComplex, chi_q: Fraction,
                      pairs: Sequence[tuple[str, str]] | None = None) -> list[dict]:
    """Close X with each pair of involutions, trying both roles for each."""
    rows = []
    for w1, w2 in pairs or combinations(involution_words(), 2):
        row = {"pair": [w1, w2]}
        result = None
        for hw, cw in ((w1, w2), (w2, w1)):
            try:
                result = close_up(x, hw, cw, chi_q, name=f"M({hw},{cw})")
            except GluingError as exc:
                row.setdefault("errors", []).append(str(exc))
                continue
            row["h"], row["c"] = hw, cw
            break
        if result is None:
            row.update(valid=False, closed=False, euler=None, orientable=None)
        else:
            row.update(valid=result.ok, closed=result.complex.is_closed(),
                       manifold=result.manifold["ok"], short_corner_cycles=len(result.corners["short_cycles"]),
                       euler=str(result.euler["primary"]), cell_euler=str(result.euler["cell_sum"]),
                       orientable=result.orientable)
        rows.append(row)
    return rows
