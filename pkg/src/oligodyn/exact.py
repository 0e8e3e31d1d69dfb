"""Exact linear algebra over the rationals.

Row reduction is fraction free (Bareiss): rows are scaled to integers and
every intermediate entry stays an integer, so rank decisions are exact.
Pivots are chosen by smallest bit size to keep entries short.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .errors import DegenerateError


def _integer_rows(rows):
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        scale = lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * scale) for x in row])
    return out


def bareiss_echelon(rows):
    """Fraction-free row echelon form.

    Returns ``(echelon, pivot_columns)`` where ``echelon`` is a list of
    integer rows (only the nonzero ones).
    """
    a = _integer_rows(rows)
    if not a:
        return [], []
    m, ncols = len(a), len(a[0])
    prev = 1
    r = 0
    pivots = []
    for col in range(ncols):
        if r == m:
            break
        cands = [i for i in range(r, m) if a[i][col] != 0]
        if not cands:
            continue
        best = min(cands, key=lambda i: abs(a[i][col]).bit_length())
        a[r], a[best] = a[best], a[r]
        piv = a[r][col]
        for i in range(r + 1, m):
            lead = a[i][col]
            row_i, row_r = a[i], a[r]
            for j in range(col + 1, ncols):
                row_i[j] = (piv * row_i[j] - lead * row_r[j]) // prev
            row_i[col] = 0
        prev = piv
        pivots.append(col)
        r += 1
    return a[:r], pivots


def rank(rows) -> int:
    return len(bareiss_echelon(rows)[1])


def nullspace(rows, ncols: int | None = None):
    """Basis of ``{x : A x = 0}`` as lists of Fractions.

    Each basis vector has a 1 in one free column and 0 in the other free
    columns.
    """
    rows = [list(r) for r in rows]
    if ncols is None:
        if not rows:
            raise ValueError("ncols is required for an empty matrix")
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == k)) for i in range(ncols)] for k in range(ncols)]
    ech, pivots = bareiss_echelon(rows)
    # back substitution to reduced form, in Fractions
    red = [[Fraction(x) for x in row] for row in ech]
    for k in range(len(red) - 1, -1, -1):
        pc = pivots[k]
        pv = red[k][pc]
        red[k] = [x / pv for x in red[k]]
        for i in range(k):
            if red[i][pc] != 0:
                fac = red[i][pc]
                red[i] = [x - fac * y for x, y in zip(red[i], red[k])]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for k, pc in enumerate(pivots):
            v[pc] = -red[k][fc]
        basis.append(v)
    return basis


def det(matrix):
    """Determinant of a square matrix by Bareiss elimination."""
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    ints = []
    for row in a:
        s = lcm(*(x.denominator for x in row))
        scale *= s
        ints.append([int(x * s) for x in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if ints[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if ints[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            ints[k], ints[swap] = ints[swap], ints[k]
            sign = -sign
        piv = ints[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                ints[i][j] = (piv * ints[i][j] - ints[i][k] * ints[k][j]) // prev
            ints[i][k] = 0
        prev = piv
    return Fraction(sign * ints[n - 1][n - 1]) / scale


def solve(matrix, rhs):
    """Solve a regular square system exactly; raises DegenerateError if singular."""
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for k in range(n):
        p = next((i for i in range(k, n) if aug[i][k] != 0), None)
        if p is None:
            raise DegenerateError("singular linear system")
        aug[k], aug[p] = aug[p], aug[k]
        pv = aug[k][k]
        aug[k] = [x / pv for x in aug[k]]
        for i in range(n):
            if i != k and aug[i][k] != 0:
                fac = aug[i][k]
                aug[i] = [x - fac * y for x, y in zip(aug[i], aug[k])]
    return [row[n] for row in aug]


def inverse(matrix):
    """Exact inverse by Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for k in range(n):
        p = next((i for i in range(k, n) if aug[i][k] != 0), None)
        if p is None:
            raise DegenerateError("matrix is singular")
        aug[k], aug[p] = aug[p], aug[k]
        pv = aug[k][k]
        aug[k] = [x / pv for x in aug[k]]
        for i in range(n):
            if i != k and aug[i][k] != 0:
                fac = aug[i][k]
                aug[i] = [x - fac * y for x, y in zip(aug[i], aug[k])]
    return [row[n:] for row in aug]


def matmul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)] for row in a]


def vecmat(v, m):
    """Row vector times matrix."""
    return [sum((v[i] * m[i][j] for i in range(len(v))), Fraction(0)) for j in range(len(m[0]))]


def transpose(m):
    return [list(col) for col in zip(*m)]
