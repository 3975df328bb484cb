"""Exact rank, row reduction and nullspace over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    """Rank of an integer or rational matrix, computed exactly."""
    if not rows:
        return 0
    ncols = len(rows[0]) if ncols is None else ncols
    # fraction-free elimination keeps integer entries small for the +-1 path matrices
    m = [list(map(int, row)) for row in rows] if all(
        isinstance(x, int) for row in rows for x in row) else None
    if m is None:
        return len(_rref(rows, ncols)[1])
    rk, prev = 0, 1
    nrows = len(m)
    for c in range(ncols):
        p = next((i for i in range(rk, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[rk], m[p] = m[p], m[rk]
        for i in range(rk + 1, nrows):
            m[i] = [(m[rk][c] * m[i][j] - m[i][c] * m[rk][j]) // prev for j in range(ncols)]
        prev = m[rk][c]
        rk += 1
        if rk == nrows:
            break
    return rk


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows . x = 0}."""
    m, pivots = _rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -m[i][f]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int) -> list[Fraction] | None:
    """One solution of rows . x = rhs, or None when inconsistent."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    m, pivots = _rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, p in enumerate(pivots):
        x[p] = m[i][ncols]
    return x


def determinant(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant of a square matrix."""
    n = len(rows)
    m = [[Fraction(x) for x in row] for row in rows]
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return det
