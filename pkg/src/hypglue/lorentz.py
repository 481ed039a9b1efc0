"""Minkowski space R^{1,4} over Q(sqrt2, sqrt7).

The bilinear form is <x, y> = -x0 y0 + x1 y1 + x2 y2 + x3 y3 + x4 y4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import linalg
from .exactnum import ONE, ZERO, FieldElement, Number, as_field

DIM = 5
ETA = (-1, 1, 1, 1, 1)


class NotSpacelikeError(ValueError):
    pass


class LorentzVector:
    __slots__ = ("coords", "_hash")

    def __init__(self, coords: Iterable[Number]) -> None:
        c = tuple(as_field(x) for x in coords)
        if len(c) != DIM:
            raise ValueError(f"expected {DIM} coordinates, got {len(c)}")
        self.coords = c
        self._hash = None

    def __iter__(self) -> Iterator[FieldElement]:
        return iter(self.coords)

    def __getitem__(self, i: int) -> FieldElement:
        return self.coords[i]

    def __len__(self) -> int:
        return DIM

    def __add__(self, other: LorentzVector) -> LorentzVector:
        return LorentzVector(x + y for x, y in zip(self.coords, other.coords))

    def __sub__(self, other: LorentzVector) -> LorentzVector:
        return LorentzVector(x - y for x, y in zip(self.coords, other.coords))

    def __neg__(self) -> LorentzVector:
        return LorentzVector(-x for x in self.coords)

    def scale(self, k: Number) -> LorentzVector:
        k = as_field(k)
        return LorentzVector(k * x for x in self.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LorentzVector):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coords)
        return self._hash

    def norm(self) -> FieldElement:
        return minkowski_inner(self, self)

    def kind(self) -> str:
        s = self.norm().sign()
        return {1: "spacelike", 0: "lightlike", -1: "timelike"}[s]

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_text(self) -> str:
        return "  ".join(x.to_text() for x in self.coords)

    def __repr__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.coords) + ")"


def minkowski_inner(u: LorentzVector, v: LorentzVector) -> FieldElement:
    total = -(u.coords[0] * v.coords[0])
    for i in range(1, DIM):
        total = total + u.coords[i] * v.coords[i]
    return total


def proportional(u: LorentzVector, v: LorentzVector, positive: bool = False) -> bool:
    """True when u = k v for some nonzero k (k > 0 if ``positive``)."""
    k = None
    for x, y in zip(u.coords, v.coords):
        if not x and not y:
            continue
        if not x or not y:
            return False
        r = x / y
        if k is None:
            k = r
        elif r != k:
            return False
    if k is None:
        return False
    return k.sign() > 0 if positive else True


def _require_spacelike(*vs: LorentzVector) -> None:
    for v in vs:
        if v.norm().sign() <= 0:
            raise NotSpacelikeError(f"{v!r} is not spacelike")


# ---------------------------------------------------------------- pairs

_COXETER_COS2 = {
    Fraction(0): Fraction(1, 2),      # pi/2
    Fraction(1, 4): Fraction(1, 3),   # pi/3
    Fraction(1, 2): Fraction(1, 4),   # pi/4
    Fraction(3, 4): Fraction(1, 6),   # pi/6
}


@dataclass(frozen=True)
class PairClass:
    """Relative position of two hyperplanes given by spacelike normals.

    ``value`` is cos^2 of the angle (kind ``angle``), 1 (``tangent``) or
    cosh^2 of the distance (``ultraparallel``); ``sign`` is the sign of the
    raw inner product.
    """

    kind: str
    value: FieldElement
    sign: int

    def dihedral(self) -> Fraction | None:
        """Angle of {<x,u> <= 0} ∩ {<x,v> <= 0} as a rational multiple of pi.

        Only cos^2 values of the form cos^2(pi/m), m in {2, 3, 4, 6}, are
        recognised; anything else returns None.
        """
        if self.kind != "angle" or not self.value.is_rational():
            return None
        base = _COXETER_COS2.get(self.value.to_fraction())
        if base is None:
            return None
        return 1 - base if self.sign > 0 else base

    def __str__(self) -> str:
        if self.kind == "angle":
            d = self.dihedral()
            return f"angle({d}π)" if d is not None else f"angle(cos²={self.value})"
        if self.kind == "tangent":
            return "tangent"
        return f"ultraparallel(cosh²={self.value})"


def normalized_square(u: LorentzVector, v: LorentzVector) -> tuple[int, FieldElement]:
    ip = minkowski_inner(u, v)
    return ip.sign(), ip * ip / (u.norm() * v.norm())


def classify_pair(u: LorentzVector, v: LorentzVector) -> PairClass:
    _require_spacelike(u, v)
    sign, s = normalized_square(u, v)
    cmp = (s - ONE).sign()
    if cmp < 0:
        return PairClass("angle", s, sign)
    if cmp == 0:
        return PairClass("tangent", ONE, sign)
    return PairClass("ultraparallel", s, sign)


@dataclass(frozen=True)
class GramEntry:
    """Normalized inner product stored as (sign, square)."""

    sign: int
    square: FieldElement

    def render(self) -> str:
        if self.sign == 0:
            return "0"
        prefix = "-" if self.sign < 0 else ""
        if not self.square.is_rational():
            return f"{prefix}sqrt({self.square})"
        k, r = _squarefree_split(self.square.to_fraction())
        if k == 1:
            return prefix + str(r)
        num = "" if r.numerator == 1 else str(r.numerator)
        den = "" if r.denominator == 1 else f"/{r.denominator}"
        return f"{prefix}{num}√{k}{den}"

    def magnitude_equals(self, other: GramEntry) -> bool:
        return self.square == other.square


def _squarefree_split(q: Fraction) -> tuple[int, Fraction]:
    """q = k * r^2 with k a squarefree positive integer and r > 0 rational."""
    if q <= 0:
        raise ValueError("expected a positive rational")
    m = q.numerator * q.denominator
    k, root = 1, 1
    p = 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
            root *= p
        if m % p == 0:
            m //= p
            k *= p
        p += 1
    k *= m
    return k, Fraction(root, q.denominator)


def parse_gram_entry(text: str) -> GramEntry:
    """Parse ``0``, ``-1/2``, ``√7/2``, ``-3√2`` (also ``sqrt7``) into a GramEntry."""
    t = text.strip().replace("sqrt", "√")
    sign = -1 if t.startswith("-") else 1
    t = t.lstrip("+-")
    if "√" not in t:
        r = Fraction(t)
        return GramEntry(0 if r == 0 else sign, FieldElement(r * r))
    coef, _, rest = t.partition("√")
    radicand, _, den = rest.partition("/")
    value = Fraction(coef or 1) ** 2 * int(radicand) / Fraction(den or 1) ** 2
    return GramEntry(sign, FieldElement(value))


def load_gram_reference(path: str | Path) -> tuple[list[str], list[list[GramEntry]]]:
    order: list[str] = []
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("order"):
            order = line.split()[1:]
            continue
        rows.append([parse_gram_entry(tok) for tok in line.split()])
    if not order or len(rows) != len(order) or any(len(r) != len(order) for r in rows):
        raise ValueError(f"malformed Gram reference in {path}")
    return order, rows


def gram_matrix(vs: Sequence[LorentzVector]) -> list[list[GramEntry]]:
    _require_spacelike(*vs)
    out = []
    for u in vs:
        row = []
        for v in vs:
            s, sq = normalized_square(u, v)
            row.append(GramEntry(s, sq))
        out.append(row)
    return out


# ---------------------------------------------------------------- isometries

class IsometryMatrix:
    """5x5 matrix over the field preserving the Minkowski form."""

    __slots__ = ("rows", "_hash", "_det")

    def __init__(self, rows: Sequence[Sequence[Number]], check: bool = True) -> None:
        r = tuple(tuple(as_field(x) for x in row) for row in rows)
        if len(r) != DIM or any(len(row) != DIM for row in r):
            raise ValueError("isometry must be 5x5")
        self.rows = r
        self._hash = None
        self._det = None
        if check and not self._preserves_form():
            raise ValueError("matrix does not preserve the Minkowski form")

    @classmethod
    def identity(cls) -> IsometryMatrix:
        return cls([[ONE if i == j else ZERO for j in range(DIM)] for i in range(DIM)], check=False)

    def _preserves_form(self) -> bool:
        cols = list(zip(*self.rows))
        for i in range(DIM):
            for j in range(i, DIM):
                val = sum((ETA[k] * cols[i][k] * cols[j][k] for k in range(DIM)), ZERO)
                want = ETA[i] if i == j else 0
                if val != want:
                    return False
        return True

    def __matmul__(self, other):
        if isinstance(other, IsometryMatrix):
            return IsometryMatrix(linalg.matmul(self.rows, other.rows), check=False)
        if isinstance(other, LorentzVector):
            return LorentzVector(linalg.matvec(self.rows, other.coords))
        return NotImplemented

    def __call__(self, v: LorentzVector) -> LorentzVector:
        return self @ v

    def inverse(self) -> IsometryMatrix:
        # M^{-1} = eta M^T eta
        return IsometryMatrix(
            [[ETA[i] * ETA[j] * self.rows[j][i] for j in range(DIM)] for i in range(DIM)],
            check=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IsometryMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def is_identity(self) -> bool:
        return self == IsometryMatrix.identity()

    def det(self) -> FieldElement:
        if self._det is None:
            self._det = linalg.det([list(r) for r in self.rows])
        return self._det

    def det_sign(self) -> int:
        return self.det().sign()

    def preserves_sheet(self) -> bool:
        return self.rows[0][0].sign() > 0

    def orientation_action(self) -> int:
        """+1 if orientation preserving on H^4, -1 if reversing."""
        return self.det_sign() * (1 if self.preserves_sheet() else -1)

    def order(self, limit: int = 1000) -> int:
        m = self
        for k in range(1, limit + 1):
            if m.is_identity():
                return k
            m = m @ self
        raise ValueError("order exceeds limit")

    def fixes(self, v: LorentzVector) -> bool:
        return self @ v == v

    def __repr__(self) -> str:
        return "IsometryMatrix(" + "; ".join(", ".join(str(x) for x in r) for r in self.rows) + ")"


def reflection_in(v: LorentzVector) -> IsometryMatrix:
    """x -> x - 2 <x,v>/<v,v> v."""
    _require_spacelike(v)
    n = v.norm()
    ev = [ETA[j] * v.coords[j] for j in range(DIM)]
    rows = []
    for i in range(DIM):
        k = 2 * v.coords[i] / n
        rows.append([(ONE if i == j else ZERO) - k * ev[j] for j in range(DIM)])
    return IsometryMatrix(rows)


def fixed_subspace(m: IsometryMatrix) -> list[LorentzVector]:
    diff = [[m.rows[i][j] - (ONE if i == j else ZERO) for j in range(DIM)] for i in range(DIM)]
    return [LorentzVector(v) for v in linalg.kernel(diff)]


def restricted_signature(basis: Sequence[LorentzVector]) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of the form restricted to span(basis)."""
    if not basis:
        return (0, 0, 0)
    g = [[minkowski_inner(u, v) for v in basis] for u in basis]
    diag, _ = linalg.congruence_diagonalize(g)
    pos = sum(1 for x in diag if x.sign() > 0)
    neg = sum(1 for x in diag if x.sign() < 0)
    return pos, neg, len(diag) - pos - neg


def orthogonal_complement(vs: Sequence[LorentzVector]) -> list[LorentzVector]:
    """Basis of {x : <x, v> = 0 for all v in vs}."""
    if not vs:
        return [LorentzVector([ONE if i == j else ZERO for j in range(DIM)]) for i in range(DIM)]
    rows = [[ETA[j] * v.coords[j] for j in range(DIM)] for v in vs]
    return [LorentzVector(x) for x in linalg.kernel(rows)]


def span_rank(vs: Sequence[LorentzVector]) -> int:
    return linalg.rank([list(v.coords) for v in vs])


def in_span(v: LorentzVector, basis: Sequence[LorentzVector]) -> bool:
    return span_rank(list(basis) + [v]) == span_rank(basis)


# ---------------------------------------------------------------- files

def load_vectors(path: str | Path) -> dict[str, LorentzVector]:
    """Read ``name x0 x1 x2 x3 x4`` lines; each xi is four rationals."""
    out: dict[str, LorentzVector] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 1 + 4 * DIM:
            raise ValueError(f"{path}:{lineno}: expected name and {4 * DIM} rationals")
        name = parts[0]
        if name in out:
            raise ValueError(f"{path}:{lineno}: duplicate vector {name!r}")
        try:
            coords = [FieldElement(*(Fraction(p) for p in parts[1 + 4 * k: 5 + 4 * k]))
                      for k in range(DIM)]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        out[name] = LorentzVector(coords)
    return out


def dump_vectors(vectors: dict[str, LorentzVector]) -> str:
    return "".join(f"{name}  {v.to_text()}\n" for name, v in vectors.items())
