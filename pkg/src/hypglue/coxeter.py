"""Coxeter diagrams: extraction from normals, text format, finite subgroups,
orbifold Euler characteristic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import linalg
from .exactnum import ONE, SQRT2, ZERO, FieldElement
from .lorentz import LorentzVector, classify_pair


class DiagramError(ValueError):
    pass


class DiagramParseError(DiagramError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class EdgeLabel:
    kind: str  # "angle", "tangent" or "ultra"
    m: int | None = None
    weight: FieldElement | None = None

    def __post_init__(self) -> None:
        if self.kind == "angle":
            if self.m is None or self.m < 3:
                raise DiagramError(f"angle label needs m >= 3, got {self.m}")
        elif self.kind == "ultra":
            if self.weight is None or (self.weight - ONE).sign() <= 0:
                raise DiagramError("ultraparallel weight must exceed 1")
        elif self.kind != "tangent":
            raise DiagramError(f"unknown edge kind {self.kind!r}")

    def to_text(self) -> str:
        if self.kind == "angle":
            return str(self.m)
        if self.kind == "tangent":
            return "inf"
        return "ultra " + self.weight.to_text()


TANGENT = EdgeLabel("tangent")


def angle(m: int) -> EdgeLabel:
    return EdgeLabel("angle", m=m)


@dataclass(frozen=True)
class CoxeterDiagram:
    nodes: tuple[str, ...]
    edges: Mapping[frozenset, EdgeLabel] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise DiagramError("duplicate node")
        known = set(self.nodes)
        for pair in self.edges:
            if len(pair) != 2:
                raise DiagramError(f"bad edge {sorted(pair)}")
            if not pair <= known:
                raise DiagramError(f"edge {sorted(pair)} references an unknown node")

    def edge(self, a: str, b: str) -> EdgeLabel | None:
        return self.edges.get(frozenset((a, b)))

    def induced(self, sub: Iterable[str]) -> CoxeterDiagram:
        keep = [n for n in self.nodes if n in set(sub)]
        ks = set(keep)
        return CoxeterDiagram(tuple(keep), {p: e for p, e in self.edges.items() if p <= ks})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoxeterDiagram):
            return NotImplemented
        return set(self.nodes) == set(other.nodes) and dict(self.edges) == dict(other.edges)

    def __hash__(self) -> int:
        return hash((frozenset(self.nodes), frozenset(self.edges.items())))

    def differences(self, other: CoxeterDiagram) -> list[str]:
        """Human-readable list of node/edge mismatches."""
        out = []
        for n in sorted(set(self.nodes) ^ set(other.nodes)):
            out.append(f"node {n} present in only one diagram")
        for pair in sorted(set(self.edges) | set(other.edges), key=sorted):
            e1, e2 = self.edges.get(pair), other.edges.get(pair)
            if e1 != e2:
                a, b = sorted(pair)
                t1 = e1.to_text() if e1 else "none"
                t2 = e2.to_text() if e2 else "none"
                out.append(f"edge {a}-{b}: {t1} vs {t2}")
        return out

    def to_text(self) -> str:
        lines = [f"node {n}" for n in self.nodes]
        order = {n: i for i, n in enumerate(self.nodes)}
        for pair in sorted(self.edges, key=lambda p: sorted(order[x] for x in p)):
            a, b = sorted(pair, key=order.__getitem__)
            lines.append(f"edge {a} {b} {self.edges[pair].to_text()}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------ construction

def _coxeter_cos2_table() -> dict[FieldElement, int]:
    # cos^2(pi/m) = (1 + cos(2 pi/m))/2 for the m whose value lies in the field
    return {
        FieldElement(Fraction(1, 4)): 3,
        FieldElement(Fraction(1, 2)): 4,
        FieldElement(Fraction(3, 4)): 6,
        FieldElement(Fraction(1, 2), Fraction(1, 4)): 8,
    }


def diagram_from_vectors(vs: Mapping[str, LorentzVector]) -> CoxeterDiagram:
    names = tuple(vs)
    table = _coxeter_cos2_table()
    edges: dict[frozenset, EdgeLabel] = {}
    for a, b in combinations(names, 2):
        pc = classify_pair(vs[a], vs[b])
        if pc.kind == "tangent":
            edges[frozenset((a, b))] = TANGENT
        elif pc.kind == "ultraparallel":
            edges[frozenset((a, b))] = EdgeLabel("ultra", weight=pc.value)
        elif pc.value:
            m = table.get(pc.value)
            if m is None or pc.sign > 0:
                raise DiagramError(
                    f"walls {a}, {b} meet at a non-Coxeter angle (cos^2 = {pc.value}, sign {pc.sign})")
            edges[frozenset((a, b))] = angle(m)
    return CoxeterDiagram(names, edges)


def parse_diagram(text: str) -> CoxeterDiagram:
    nodes: list[str] = []
    edges: dict[frozenset, EdgeLabel] = {}
    pending: list[tuple[int, str, str, EdgeLabel]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) != 2:
                raise DiagramParseError(lineno, "expected 'node <name>'")
            if parts[1] in nodes:
                raise DiagramParseError(lineno, f"duplicate node {parts[1]!r}")
            nodes.append(parts[1])
        elif parts[0] == "edge":
            if len(parts) < 4:
                raise DiagramParseError(lineno, "expected 'edge <a> <b> <label>'")
            a, b, lab = parts[1], parts[2], parts[3:]
            if a == b:
                raise DiagramParseError(lineno, f"self-loop on {a!r}")
            try:
                if lab == ["inf"]:
                    label = TANGENT
                elif lab[0] == "ultra":
                    label = EdgeLabel("ultra", weight=FieldElement.from_text(" ".join(lab[1:])))
                elif len(lab) == 1:
                    label = angle(int(lab[0]))
                else:
                    raise ValueError(f"bad label {' '.join(lab)!r}")
            except (ValueError, DiagramError) as exc:
                raise DiagramParseError(lineno, str(exc)) from None
            pending.append((lineno, a, b, label))
        else:
            raise DiagramParseError(lineno, f"unknown directive {parts[0]!r}")
    for lineno, a, b, label in pending:
        for n in (a, b):
            if n not in nodes:
                raise DiagramParseError(lineno, f"edge references unknown node {n!r}")
        key = frozenset((a, b))
        if key in edges:
            raise DiagramParseError(lineno, f"duplicate edge {a}-{b}")
        edges[key] = label
    return CoxeterDiagram(tuple(nodes), edges)


def load_diagram(path: str | Path) -> CoxeterDiagram:
    return parse_diagram(Path(path).read_text())


# ------------------------------------------------------------ finite types

@dataclass(frozen=True)
class Component:
    nodes: tuple[str, ...]
    type: str
    order: int


@dataclass(frozen=True)
class FiniteTypeReport:
    components: tuple[Component, ...]

    @property
    def order(self) -> int:
        return math.prod(c.order for c in self.components)

    @property
    def type(self) -> str:
        return " x ".join(c.type for c in self.components) or "trivial"


_EXCEPTIONAL_ORDERS = {"E6": 51840, "E7": 2903040, "E8": 696729600,
                       "F4": 1152, "H3": 120, "H4": 14400}


def type_order(kind: str, n: int, m: int | None = None) -> int:
    if kind == "A":
        return math.factorial(n + 1)
    if kind == "B":
        return 2 ** n * math.factorial(n)
    if kind == "D":
        return 2 ** (n - 1) * math.factorial(n)
    if kind == "I2":
        return 2 * m
    return _EXCEPTIONAL_ORDERS[f"{kind}{n}"]


def _components(d: CoxeterDiagram) -> list[list[str]]:
    adj = {n: set() for n in d.nodes}
    for pair in d.edges:
        a, b = tuple(pair)
        adj[a].add(b)
        adj[b].add(a)
    seen: set[str] = set()
    comps = []
    for n in d.nodes:
        if n in seen:
            continue
        stack, comp = [n], []
        seen.add(n)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append([x for x in d.nodes if x in set(comp)])
    return comps


def _classify_connected(d: CoxeterDiagram) -> tuple[str, int] | None:
    """Type and order of a connected diagram with angle labels only."""
    n = len(d.nodes)
    if n == 1:
        return "A1", 2
    labels = [e.m for e in d.edges.values()]
    if len(d.edges) != n - 1:
        return None  # contains a cycle
    deg = {x: 0 for x in d.nodes}
    for pair in d.edges:
        for x in pair:
            deg[x] += 1
    if n == 2:
        m = labels[0]
        if m == 3:
            return "A2", 6
        if m == 4:
            return "B2", 8
        return f"I2({m})", 2 * m
    big = [m for m in labels if m > 3]
    branch = [x for x in d.nodes if deg[x] >= 3]
    if not big:
        if not branch:
            return f"A{n}", type_order("A", n)
        if len(branch) > 1 or deg[branch[0]] > 3:
            return None
        centre = branch[0]
        arms = sorted(_arm_length(d, centre, nb) for nb in _neighbours(d, centre))
        if arms[0] == 1 and arms[1] == 1:
            return f"D{n}", type_order("D", n)
        if arms[0] == 1 and arms[1] == 2 and arms[2] in (2, 3, 4):
            return f"E{n}", type_order("E", n)
        return None
    if branch or len(big) > 1:
        return None
    m = big[0]
    pair = next(p for p, e in d.edges.items() if e.m == m)
    at_end = any(deg[x] == 1 for x in pair)
    if m == 4:
        if at_end:
            return f"B{n}", type_order("B", n)
        if n == 4:
            return "F4", 1152
        return None
    if m == 5 and at_end and n in (3, 4):
        return f"H{n}", type_order("H", n)
    return None


def _neighbours(d: CoxeterDiagram, x: str) -> list[str]:
    return [y for pair in d.edges if x in pair for y in pair if y != x]


def _arm_length(d: CoxeterDiagram, centre: str, start: str) -> int:
    prev, cur, length = centre, start, 1
    while True:
        nxt = [y for y in _neighbours(d, cur) if y != prev]
        if not nxt:
            return length
        if len(nxt) > 1:
            return 10 ** 6
        prev, cur = cur, nxt[0]
        length += 1


def finite_type(d: CoxeterDiagram, sub: Iterable[str] | None = None) -> FiniteTypeReport | None:
    """Classification of the parabolic subgroup on ``sub``; None if infinite."""
    part = d if sub is None else d.induced(sub)
    if any(e.kind != "angle" for e in part.edges.values()):
        return None
    comps = []
    for nodes in _components(part):
        res = _classify_connected(part.induced(nodes))
        if res is None:
            return None
        comps.append(Component(tuple(nodes), res[0], res[1]))
    return FiniteTypeReport(tuple(comps))


_EXACT_COS = {3: FieldElement(Fraction(1, 2)), 4: SQRT2 / 2}


def cosine_matrix(d: CoxeterDiagram) -> list[list[FieldElement]] | None:
    """Matrix with 1 on the diagonal and -cos(pi/m) off it; None if an entry
    is not available in the field."""
    rows = []
    for a in d.nodes:
        row = []
        for b in d.nodes:
            if a == b:
                row.append(ONE)
                continue
            e = d.edge(a, b)
            if e is None:
                row.append(ZERO)
            elif e.kind != "angle":
                row.append(-ONE)  # tangent or worse: never positive definite
            elif e.m in _EXACT_COS:
                row.append(-_EXACT_COS[e.m])
            else:
                return None
        rows.append(row)
    return rows


def is_positive_definite(m: Sequence[Sequence[FieldElement]]) -> bool:
    """Sylvester's criterion by exact leading principal minors."""
    for k in range(1, len(m) + 1):
        if linalg.det([list(r[:k]) for r in m[:k]]).sign() <= 0:
            return False
    return True


def cosine_finiteness(d: CoxeterDiagram, sub: Iterable[str] | None = None) -> bool | None:
    """Independent finiteness test; None where the cosines leave the field."""
    part = d if sub is None else d.induced(sub)
    if not part.nodes:
        return True
    m = cosine_matrix(part)
    if m is None:
        return None
    return is_positive_definite(m)


def orbifold_euler_characteristic(d: CoxeterDiagram) -> Fraction:
    total = Fraction(0)
    for k in range(len(d.nodes) + 1):
        for sub in combinations(d.nodes, k):
            rep = finite_type(d, sub)
            if rep is not None:
                total += Fraction((-1) ** k, rep.order)
    return total


def disjoint_union(d1: CoxeterDiagram, d2: CoxeterDiagram) -> CoxeterDiagram:
    if set(d1.nodes) & set(d2.nodes):
        raise DiagramError("node names overlap")
    return CoxeterDiagram(d1.nodes + d2.nodes, {**d1.edges, **d2.edges})
