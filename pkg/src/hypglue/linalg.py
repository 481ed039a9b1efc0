"""Exact dense linear algebra over any field-like scalar type.

Works with ``fractions.Fraction`` and :class:`~hypglue.exactnum.FieldElement`
alike.  Matrices are lists of rows.
"""

from __future__ import annotations

from typing import Any, Sequence

Matrix = list[list[Any]]


def _is_zero(x: Any) -> bool:
    return not x


def copy_matrix(m: Sequence[Sequence[Any]]) -> Matrix:
    return [list(row) for row in m]


def identity(n: int, one: Any = 1, zero: Any = 0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence[Any]]) -> Matrix:
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]]) -> Matrix:
    bt = list(zip(*b))
    return [[_dot(row, col) for col in bt] for row in a]


def matvec(a: Sequence[Sequence[Any]], v: Sequence[Any]) -> list[Any]:
    return [_dot(row, v) for row in a]


def _dot(u: Sequence[Any], v: Sequence[Any]) -> Any:
    total = None
    for x, y in zip(u, v):
        if _is_zero(x) or _is_zero(y):
            continue
        p = x * y
        total = p if total is None else total + p
    return total if total is not None else u[0] * 0


def rref(m: Sequence[Sequence[Any]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = copy_matrix(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if not _is_zero(a[i][c])), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and not _is_zero(a[i][c]):
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Sequence[Sequence[Any]]) -> int:
    if not m:
        return 0
    return len(rref(m)[1])


def kernel(m: Sequence[Sequence[Any]], ncols: int | None = None) -> Matrix:
    """Basis of the right null space {x : m x = 0}."""
    if not m:
        if ncols is None:
            raise ValueError("column count needed for an empty matrix")
        return identity(ncols)
    red, pivots = rref(m)
    cols = len(m[0])
    zero = m[0][0] * 0
    one = zero + 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * cols
        v[f] = one
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


def det(m: Sequence[Sequence[Any]]) -> Any:
    a = copy_matrix(m)
    n = len(a)
    result = a[0][0] * 0 + 1
    for c in range(n):
        p = next((i for i in range(c, n) if not _is_zero(a[i][c])), None)
        if p is None:
            return a[0][0] * 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            result = -result
        piv = a[c][c]
        result = result * piv
        for i in range(c + 1, n):
            if not _is_zero(a[i][c]):
                f = a[i][c] / piv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return result


def solve(m: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> list[Any] | None:
    """One solution of m x = rhs, or None if inconsistent."""
    aug = [list(row) + [b] for row, b in zip(m, rhs)]
    red, pivots = rref(aug)
    ncols = len(m[0])
    if ncols in pivots:
        return None
    zero = m[0][0] * 0
    x = [zero] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][ncols]
    return x


def congruence_diagonalize(q: Sequence[Sequence[Any]], order: Sequence[int] | None = None
                           ) -> tuple[list[Any], Matrix]:
    """Symmetric Gaussian elimination: returns (diag, T) with Tᵀ q T diagonal.

    ``order`` permutes the variables before elimination so that different
    pivot sequences can be compared.  A zero pivot is repaired by pulling in
    a later variable (x -> x + y) or swapping; a degenerate remainder yields
    zero diagonal entries.
    """
    n = len(q)
    a = copy_matrix(q)
    zero = a[0][0] * 0
    one = zero + 1
    t = identity(n, one, zero)
    if order is not None:
        perm = list(order)
        a = [[a[i][j] for j in perm] for i in perm]
        t = [[one if perm[j] == i else zero for j in range(n)] for i in range(n)]

    def add_col(dst: int, src: int, f: Any) -> None:
        # variable change x_src += f * x_dst applied as column/row ops
        for i in range(n):
            a[i][dst] = a[i][dst] + f * a[i][src]
        for j in range(n):
            a[dst][j] = a[dst][j] + f * a[src][j]
        for i in range(n):
            t[i][dst] = t[i][dst] + f * t[i][src]

    def swap(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        a[i], a[j] = a[j], a[i]
        for row in t:
            row[i], row[j] = row[j], row[i]

    for k in range(n):
        if _is_zero(a[k][k]):
            j = next((j for j in range(k + 1, n) if not _is_zero(a[j][j])), None)
            if j is not None:
                swap(k, j)
            else:
                j = next((j for j in range(k + 1, n) if not _is_zero(a[k][j])), None)
                if j is None:
                    continue
                # hyperbolic pair: u = x + y has value 2 a[k][j] != 0
                add_col(k, j, one)
        piv = a[k][k]
        if _is_zero(piv):
            continue
        for j in range(k + 1, n):
            if not _is_zero(a[k][j]):
                add_col(j, k, -a[k][j] / piv)
    return [a[i][i] for i in range(n)], t


def inverse(m: Sequence[Sequence[Any]]) -> Matrix:
    n = len(m)
    zero = m[0][0] * 0
    one = zero + 1
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(m)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]
