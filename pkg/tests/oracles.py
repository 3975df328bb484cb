"""Independent brute-force oracles; nothing here imports the package."""

from __future__ import annotations

from functools import lru_cache
from math import comb


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


@lru_cache(maxsize=None)
def full_bracketings(lo: int, hi: int) -> tuple[str, ...]:
    """All full binary bracketings of a_lo..a_hi, written as in a((bc)d)."""
    if lo == hi:
        return (f"a{lo}",)
    out = []
    for k in range(lo, hi):
        for left in full_bracketings(lo, k):
            for right in full_bracketings(k + 1, hi):
                out.append(_wrap(left, lo, k) + _wrap(right, k + 1, hi))
    return tuple(out)


def _wrap(s: str, lo: int, hi: int) -> str:
    return s if lo == hi else f"({s})"


def compatible(i1: tuple[int, int], i2: tuple[int, int]) -> bool:
    (a, b), (c, d) = i1, i2
    return b < c or d < a or (a <= c and d <= b) or (c <= a and b <= d)


def partial_bracketings(d: int) -> list[tuple[str, int]]:
    """Every face of K^d as (string, number of parenthesis pairs), by backtracking over intervals."""
    intervals = [(i, j) for i in range(1, d + 1) for j in range(i + 1, d + 1) if (i, j) != (1, d)]
    out = []

    def go(k: int, chosen: list):
        if k == len(intervals):
            out.append((_render(d, chosen), len(chosen)))
            return
        go(k + 1, chosen)
        if all(compatible(intervals[k], c) for c in chosen):
            chosen.append(intervals[k])
            go(k + 1, chosen)
            chosen.pop()

    go(0, [])
    return out


def _render(d: int, chosen: list) -> str:
    opens = {i: 0 for i in range(1, d + 1)}
    closes = {i: 0 for i in range(1, d + 1)}
    for a, b in chosen:
        opens[a] += 1
        closes[b] += 1
    return "".join("(" * opens[i] + f"a{i}" + ")" * closes[i] for i in range(1, d + 1))


def associahedron_f_vector(d: int) -> tuple[int, ...]:
    dim = d - 2
    f = [0] * (dim + 1)
    for _, k in partial_bracketings(d):
        f[dim - k] += 1
    return tuple(f)
