"""Rational quadratic forms: diagonalization, Hilbert symbols, Hasse
invariants and the ramification set of a Lorentzian similarity class."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

from sympy import factorint

from . import linalg

INF = "inf"
Place = Union[int, str]


class FormError(ValueError):
    pass


def place_key(p: Place) -> tuple[int, int]:
    return (1, 0) if p == INF else (0, int(p))


def format_places(places: Iterable[Place]) -> str:
    items = sorted(places, key=place_key)
    return "{" + ", ".join("∞" if p == INF else str(p) for p in items) + "}" if items else "∅"


@dataclass(frozen=True)
class RationalQuadraticForm:
    matrix: tuple[tuple[Fraction, ...], ...]

    def __init__(self, rows: Sequence[Sequence[Fraction | int | str]]) -> None:
        m = tuple(tuple(Fraction(x) for x in row) for row in rows)
        n = len(m)
        if any(len(r) != n for r in m):
            raise FormError("form matrix must be square")
        for i in range(n):
            for j in range(i):
                if m[i][j] != m[j][i]:
                    raise FormError(f"form matrix not symmetric at ({i}, {j})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def diagonal(cls, entries: Sequence[Fraction | int]) -> RationalQuadraticForm:
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def det(self) -> Fraction:
        return linalg.det([list(r) for r in self.matrix])

    def scaled(self, lam: Fraction | int) -> RationalQuadraticForm:
        lam = Fraction(lam)
        return RationalQuadraticForm([[lam * x for x in row] for row in self.matrix])

    def signature(self) -> tuple[int, int]:
        diag, _ = diagonalize(self)
        return sum(1 for x in diag if x > 0), sum(1 for x in diag if x < 0)

    def to_text(self) -> str:
        lines = [str(self.dim)]
        lines += [" ".join(str(x) for x in row) for row in self.matrix]
        return "\n".join(lines) + "\n"


def parse_form(text: str) -> RationalQuadraticForm:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise FormError("empty form file")
    try:
        n = int(lines[0])
        rows = [[Fraction(x) for x in ln.split()] for ln in lines[1:]]
    except (ValueError, ZeroDivisionError) as exc:
        raise FormError(f"bad form file: {exc}") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise FormError(f"expected {n} rows of {n} rationals")
    return RationalQuadraticForm(rows)


def load_form(path: str | Path) -> RationalQuadraticForm:
    return parse_form(Path(path).read_text())


# ------------------------------------------------------------ diagonalization

def diagonalize(q: RationalQuadraticForm, order: Sequence[int] | None = None
                ) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Congruence diagonalization: (entries, T) with Tᵀ q T = diag(entries)."""
    return linalg.congruence_diagonalize([list(r) for r in q.matrix], order)


def check_congruence(q: RationalQuadraticForm, entries: Sequence[Fraction],
                     t: Sequence[Sequence[Fraction]]) -> bool:
    prod = linalg.matmul(linalg.matmul(linalg.transpose(t), q.matrix), t)
    n = q.dim
    return all(prod[i][j] == (entries[i] if i == j else 0) for i in range(n) for j in range(n))


# ------------------------------------------------------------ local symbols

def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _split(x: Fraction, p: int) -> tuple[int, int]:
    """x = p^v * u with u a p-adic unit; returns (v, integer representative of u's class)."""
    num, den = x.numerator, x.denominator
    vn, vd = _valuation(num, p), _valuation(den, p)
    return vn - vd, (num // p ** vn) * (den // p ** vd)


def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def hilbert_symbol(a: Fraction | int, b: Fraction | int, p: Place) -> int:
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise FormError("Hilbert symbol of zero")
    if p == INF:
        return -1 if a < 0 and b < 0 else 1
    p = int(p)
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p != 2:
        s = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
        if beta % 2:
            s *= _legendre(u, p)
        if alpha % 2:
            s *= _legendre(v, p)
        return s

    def eps(x: int) -> int:
        return ((x - 1) // 2) % 2

    def omega(x: int) -> int:
        return ((x * x - 1) // 8) % 2

    e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
    return -1 if e % 2 else 1


def hasse_invariant(diag: Sequence[Fraction | int], p: Place) -> int:
    if any(Fraction(x) == 0 for x in diag):
        raise FormError("Hasse invariant needs nonzero diagonal entries")
    s = 1
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            s *= hilbert_symbol(diag[i], diag[j], p)
    return s


def prime_support(values: Iterable[Fraction | int]) -> set[int]:
    primes: set[int] = set()
    for x in values:
        x = Fraction(x)
        for n in (abs(x.numerator), x.denominator):
            if n > 1:
                primes.update(factorint(n))
    return primes


def candidate_places(diag: Sequence[Fraction]) -> list[Place]:
    det = math.prod(diag, start=Fraction(1))
    primes = prime_support(list(diag) + [det, 2])
    return sorted(primes) + [INF]


def square_class_equal(x: Fraction, y: Fraction) -> bool:
    from .exactnum import is_square_rational
    return is_square_rational(Fraction(x) / Fraction(y)) is not None


# ------------------------------------------------------------ ramification

def ramification_set(q: RationalQuadraticForm) -> frozenset:
    """Places where the determinant-normalized form has Hasse invariant -1.

    Scaling by the determinant makes the discriminant a square; for odd
    dimension this picks a canonical member of the similarity class, so the
    result only depends on the class.
    """
    diag, _ = diagonalize(q)
    if any(x == 0 for x in diag):
        raise FormError("degenerate form")
    pos = sum(1 for x in diag if x > 0)
    neg = len(diag) - pos
    if sorted((pos, neg)) != [1, q.dim - 1]:
        raise FormError(f"expected a Lorentzian form, got signature ({pos}, {neg})")
    if q.dim % 2 == 0:
        raise FormError("ramification set is defined here for odd dimension only")
    det = math.prod(diag, start=Fraction(1))
    normed = [det * x for x in diag]
    return frozenset(p for p in candidate_places(normed) if hasse_invariant(normed, p) == -1)


def local_invariants(diag: Sequence[Fraction], places: Iterable[Place]) -> dict[Place, int]:
    return {p: hasse_invariant(diag, p) for p in places}


def congruence_equivalent(d1: Sequence[Fraction], d2: Sequence[Fraction]) -> bool:
    """Equivalence of diagonal rational forms by the classical invariants:
    dimension, signature, determinant square class, Hasse invariant at every place."""
    if len(d1) != len(d2):
        return False
    if sum(1 for x in d1 if x > 0) != sum(1 for x in d2 if x > 0):
        return False
    det1 = math.prod(d1, start=Fraction(1))
    det2 = math.prod(d2, start=Fraction(1))
    if not square_class_equal(det1, det2):
        return False
    places = set(candidate_places(list(d1))) | set(candidate_places(list(d2)))
    return all(hasse_invariant(d1, p) == hasse_invariant(d2, p) for p in places)


# ------------------------------------------------------------ comparison

def parse_place_set(value) -> frozenset | None:
    """JSON value -> place set; None means the class is non-arithmetic."""
    if value is None:
        return None
    return frozenset(INF if str(p) in ("inf", "∞") else int(p) for p in value)


def same_class(a: frozenset | None, b: frozenset | None) -> bool:
    """Whether two ramification invariants can belong to one class."""
    if a is None or b is None:
        return False
    return a == b


def separate_classes(form: RationalQuadraticForm, references: dict[str, frozenset | None],
                     label: str = "Q") -> dict:
    """Compare the form's ramification set with reference class values."""
    own = ramification_set(form)
    table = {label: own, **references}
    names = list(table)
    clashes = [(x, y) for i, x in enumerate(names) for y in names[i + 1:]
               if same_class(table[x], table[y])]
    return {
        "ramification": format_places(own),
        "table": {k: ("non-arithmetic" if v is None else format_places(v)) for k, v in table.items()},
        "clashes": [list(c) for c in clashes],
        "distinct": not clashes,
        "verdict": f"{len(names)} classes distinct" if not clashes else "not distinct",
    }


def load_references(path: str | Path) -> dict[str, frozenset | None]:
    raw = json.loads(Path(path).read_text())
    return {k: parse_place_set(v) for k, v in raw["classes"].items()}
