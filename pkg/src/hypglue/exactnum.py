"""Exact arithmetic in Q(sqrt2, sqrt7).

Elements are stored as four integer numerators over one shared positive
denominator, reduced after every operation.  The real embedding takes both
square roots positive, which gives a decidable total order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

Number = Union[int, Fraction, "FieldElement"]


def is_square_rational(q: Fraction | int) -> Fraction | None:
    """Positive square root of ``q`` if it is the square of a rational."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _sign_sqrt2(a: int, b: int) -> int:
    """Sign of a + b*sqrt2 for integers a, b."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0 or sa == sb:
        return sa if sa else sb
    if sa == 0:
        return sb
    # opposite signs: compare a^2 with 2 b^2
    diff = a * a - 2 * b * b
    return sa if diff > 0 else (-sa if diff < 0 else 0)


def _sign_parts(a: int, b: int, c: int, d: int) -> int:
    """Sign of (a + b sqrt2) + (c + d sqrt2) sqrt7, integer coordinates."""
    sx = _sign_sqrt2(a, b)
    sy = _sign_sqrt2(c, d)
    if sy == 0 or sx == sy:
        return sx if sx else sy
    if sx == 0:
        return sy
    # X^2 - 7 Y^2 lies in Q(sqrt2)
    p = a * a + 2 * b * b - 7 * (c * c + 2 * d * d)
    q = 2 * a * b - 14 * c * d
    s = _sign_sqrt2(p, q)
    return sx * s


@total_ordering
class FieldElement:
    """a + b*sqrt2 + c*sqrt7 + d*sqrt14 with rational a, b, c, d."""

    __slots__ = ("_n", "_den", "_hash")

    def __init__(self, a: Fraction | int = 0, b: Fraction | int = 0,
                 c: Fraction | int = 0, d: Fraction | int = 0) -> None:
        fr = [Fraction(x) for x in (a, b, c, d)]
        den = math.lcm(*(x.denominator for x in fr))
        self._set(tuple(x.numerator * (den // x.denominator) for x in fr), den)

    @classmethod
    def _raw(cls, nums: tuple[int, int, int, int], den: int) -> FieldElement:
        obj = cls.__new__(cls)
        obj._set(nums, den)
        return obj

    def _set(self, nums: tuple[int, int, int, int], den: int) -> None:
        if den < 0:
            nums = tuple(-x for x in nums)
            den = -den
        g = math.gcd(*nums, den)
        if g > 1:
            nums = tuple(x // g for x in nums)
            den //= g
        if not any(nums):
            den = 1
        self._n = nums
        self._den = den
        self._hash = None

    # coordinates
    @property
    def a(self) -> Fraction:
        return Fraction(self._n[0], self._den)

    @property
    def b(self) -> Fraction:
        return Fraction(self._n[1], self._den)

    @property
    def c(self) -> Fraction:
        return Fraction(self._n[2], self._den)

    @property
    def d(self) -> Fraction:
        return Fraction(self._n[3], self._den)

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_rational(self) -> bool:
        return not any(self._n[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.a

    # arithmetic
    @staticmethod
    def _coerce(other: Number) -> FieldElement | None:
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            o = Fraction(other)
            return FieldElement._raw((o.numerator, 0, 0, 0), o.denominator)
        return None

    def __add__(self, other: Number) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d1, d2 = self._den, o._den
        return FieldElement._raw(
            tuple(x * d2 + y * d1 for x, y in zip(self._n, o._n)), d1 * d2)

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement._raw(tuple(-x for x in self._n), self._den)

    def __sub__(self, other: Number) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Number) -> FieldElement:
        return (-self) + other

    def __mul__(self, other: Number) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self._n
        e, f, g, h = o._n
        # basis 1, r2, r7, r14 with r2*r7 = r14, r2*r14 = 2 r7, r7*r14 = 7 r2
        return FieldElement._raw((
            a * e + 2 * b * f + 7 * c * g + 14 * d * h,
            a * f + b * e + 7 * (c * h + d * g),
            a * g + c * e + 2 * (b * h + d * f),
            a * h + d * e + b * g + c * f,
        ), self._den * o._den)

    __rmul__ = __mul__

    def conjugate(self, s2: int = 1, s7: int = 1) -> FieldElement:
        """Galois conjugate sending sqrt2 -> s2*sqrt2, sqrt7 -> s7*sqrt7."""
        a, b, c, d = self._n
        return FieldElement._raw((a, s2 * b, s7 * c, s2 * s7 * d), self._den)

    def norm(self) -> Fraction:
        """Field norm to Q: product of the four conjugates."""
        p = self * self.conjugate(-1, 1) * self.conjugate(1, -1) * self.conjugate(-1, -1)
        return p.to_fraction()

    def inverse(self) -> FieldElement:
        if not any(self._n):
            raise ZeroDivisionError("inverse of zero in Q(sqrt2, sqrt7)")
        others = self.conjugate(-1, 1) * self.conjugate(1, -1) * self.conjugate(-1, -1)
        n = (self * others).to_fraction()
        return others * (1 / n)

    def __truediv__(self, other: Number) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_rational():
            q = o.a
            if q == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt2, sqrt7)")
            return FieldElement._raw(
                tuple(x * q.denominator for x in self._n), self._den * q.numerator)
        return self * o.inverse()

    def __rtruediv__(self, other: Number) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int) -> FieldElement:
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # order
    def sign(self) -> int:
        return _sign_parts(*self._n)

    def __bool__(self) -> bool:
        return any(self._n)

    def __eq__(self, other: object) -> bool:
        o = self._coerce(other)  # type: ignore[arg-type]
        if o is None:
            return NotImplemented
        return self._n == o._n and self._den == o._den

    def __lt__(self, other: Number) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.a)
            else:
                self._hash = hash((self._n, self._den))
        return self._hash

    def __abs__(self) -> FieldElement:
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        a, b, c, d = self._n
        return (a + b * math.sqrt(2) + c * math.sqrt(7) + d * math.sqrt(14)) / self._den

    # text form
    def to_text(self) -> str:
        return " ".join(str(x) for x in self.coords)

    @classmethod
    def from_text(cls, text: str) -> FieldElement:
        parts = text.split()
        if len(parts) != 4:
            raise ValueError(f"expected 4 rationals, got {text!r}")
        return cls(*(Fraction(p) for p in parts))

    def __repr__(self) -> str:
        return f"FieldElement({', '.join(repr(str(x)) for x in self.coords)})"

    def __str__(self) -> str:
        terms = []
        for coef, sym in zip(self.coords, ("", "√2", "√7", "√14")):
            if coef == 0:
                continue
            if sym and abs(coef) == 1:
                body = sym
            else:
                body = f"{abs(coef)}{sym}"
            terms.append(("-" if coef < 0 else "+", body))
        if not terms:
            return "0"
        first = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return first + "".join(f" {s} {b}" for s, b in terms[1:])


ZERO = FieldElement()
ONE = FieldElement(1)
SQRT2 = FieldElement(0, 1)
SQRT7 = FieldElement(0, 0, 1)
SQRT14 = FieldElement(0, 0, 0, 1)



def field_arith(x: Number, y: Number, op: str) -> FieldElement:
    """Dispatch one of ``add``, ``sub``, ``mul``, ``div``."""
    x = FieldElement._coerce(x)
    y = FieldElement._coerce(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def field_sign(x: Number) -> int:
    return FieldElement._coerce(x).sign()


def as_field(x: Number) -> FieldElement:
    out = FieldElement._coerce(x)
    if out is None:
        raise TypeError(f"cannot coerce {x!r} into the field")
    return out
