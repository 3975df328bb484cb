"""Sign exponents as polynomials over GF(2), and their verification.

A `SignPoly` is a set of monomials, each a frozenset of variable names
(x^2 = x, coefficients mod 2); the empty monomial is the constant 1.
Variables: x1..xd for input degrees, x0 for the output, y / y1..ym for
intermediate outputs, a1.. and alpha1.. for arguments, T / T1 / T2 for
transformation degrees.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg


class SignError(ValueError):
    pass


Monomial = frozenset


@dataclass(frozen=True)
class SignPoly:
    terms: frozenset = frozenset()

    # -- construction ----------------------------------------------------
    @staticmethod
    def const(c: int) -> "SignPoly":
        return SignPoly(frozenset([Monomial()]) if c % 2 else frozenset())

    @staticmethod
    def var(name: str) -> "SignPoly":
        return SignPoly(frozenset([Monomial([name])]))

    @staticmethod
    def lift(x) -> "SignPoly":
        if isinstance(x, SignPoly):
            return x
        if isinstance(x, str):
            return SignPoly.var(x)
        return SignPoly.const(int(x))

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other) -> "SignPoly":
        return SignPoly(self.terms ^ SignPoly.lift(other).terms)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other) -> "SignPoly":
        other = SignPoly.lift(other)
        out: set = set()
        for a in self.terms:
            for b in other.terms:
                out ^= {a | b}
        return SignPoly(frozenset(out))

    __rmul__ = __mul__

    def __neg__(self) -> "SignPoly":
        return self

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- evaluation ------------------------------------------------------
    def variables(self) -> set[str]:
        return set().union(*self.terms) if self.terms else set()

    def substitute(self, name: str, value) -> "SignPoly":
        value = SignPoly.lift(value)
        out = SignPoly()
        for mono in self.terms:
            if name in mono:
                out = out + SignPoly(frozenset([mono - {name}])) * value
            else:
                out = out + SignPoly(frozenset([mono]))
        return out

    def substitute_all(self, values: Mapping[str, object]) -> "SignPoly":
        out = self
        for k, v in values.items():
            out = out.substitute(k, v)
        return out

    def evaluate(self, values: Mapping[str, int]) -> int:
        """Parity at an assignment of the variables (missing ones count as 0)."""
        total = 0
        for mono in self.terms:
            if all(values.get(v, 0) % 2 for v in mono):
                total ^= 1
        return total

    def sign(self, values: Mapping[str, int] | None = None) -> int:
        return -1 if self.evaluate(values or {}) else 1

    def canonical(self) -> "SignPoly":
        return SignPoly(frozenset(self.terms))

    def sorted_terms(self) -> list[tuple[str, ...]]:
        def key(m):
            return (len(m), [_var_key(v) for v in sorted(m, key=_var_key)])
        return [tuple(sorted(m, key=_var_key)) for m in sorted(self.terms, key=key)]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join("*".join(m) if m else "1" for m in self.sorted_terms())

    def __repr__(self) -> str:
        return f"SignPoly({self})"


def _var_key(v: str):
    head = v.rstrip("0123456789")
    tail = v[len(head):]
    return (head, int(tail) if tail else -1)


def total(parts: Iterable) -> SignPoly:
    out = SignPoly()
    for p in parts:
        out = out + SignPoly.lift(p)
    return out


def x(i: int) -> SignPoly:
    return SignPoly.var(f"x{i}")


# ---------------------------------------------------------------------------
# named exponents


def _deg(value, default: str) -> SignPoly:
    return SignPoly.var(default) if value is None else SignPoly.lift(value)


def named_sign(name: str, **params) -> SignPoly:
    """Named exponents.

    heartsuit(d)           sum_i i |x_i|
    box(e)                 sum_i i |alpha_i|
    dagger(p, T)           (|T| - 1)(|a_1| + ... + |a_p| - p)
    ddagger(p, q, T1, T2)  sum_{i<=p} (|T1| - 1)(|a_i| - 1) + sum_{i<=q} (|T2| - 1)(|a_i| - 1)
    koszul(perm, shifted)  sum over inversions of (|a_i| - s)(|a_j| - s), s = 1 if shifted
    """
    if name == "heartsuit":
        return total(i * x(i) for i in range(1, params["d"] + 1))
    if name == "box":
        return total(i * SignPoly.var(f"alpha{i}") for i in range(1, params["e"] + 1))
    if name == "dagger":
        p = params["p"]
        t = _deg(params.get("T"), "T")
        return (t + 1) * total([SignPoly.var(f"a{i}") for i in range(1, p + 1)] + [p])
    if name == "ddagger":
        t1 = _deg(params.get("T1"), "T1")
        t2 = _deg(params.get("T2"), "T2")
        s1 = total(SignPoly.var(f"a{i}") + 1 for i in range(1, params["p"] + 1))
        s2 = total(SignPoly.var(f"a{i}") + 1 for i in range(1, params["q"] + 1))
        return (t1 + 1) * s1 + (t2 + 1) * s2
    if name == "koszul":
        perm = list(params["perm"])
        shift = 1 if params.get("shifted", True) else 0
        out = SignPoly()
        for i, j in itertools.combinations(range(len(perm)), 2):
            if perm[i] > perm[j]:
                a = SignPoly.var(f"a{perm[i] + 1}") + shift
                b = SignPoly.var(f"a{perm[j] + 1}") + shift
                out = out + a * b
        return out
    raise SignError(f"unknown sign name {name!r}")


def koszul_sign(perm: Sequence[int], degrees: Sequence[int], shifted: bool = True) -> int:
    """Sign of reordering graded symbols: position i of the result holds symbol perm[i]."""
    s = 1 if shifted else 0
    parity = 0
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            parity += (degrees[perm[i]] - s) * (degrees[perm[j]] - s)
    return -1 if parity % 2 else 1


# ---------------------------------------------------------------------------
# congruence chains


def assoc_sign_terms(d: int, n: int, m: int) -> dict[str, SignPoly]:
    """The four contributions to the sign of the (n, m) term of the associativity relation.

    gluing     (m-1)(n-1) from the coordinate map, plus 1 for the outward collar
    structure  sum_{k<=n} k|x_k| + (n+1)|y| + sum_{k>n+m} (k-m+1)|x_k| + sum_{n<k<=n+m} (k-n)|x_k|
    permute    (d-m+1)m + m(|y| + sum_{i<=n}|x_i|) + m(|x_0| + 1)
    axiom      sum_{k<=n} (|x_k| + 1)
    """
    _check_assoc(d, n, m)
    y = SignPoly.var("y")
    x0 = SignPoly.var("x0")
    gluing = SignPoly.const((m - 1) * (n - 1) + 1)
    structure = (total(k * x(k) for k in range(1, n + 1)) + (n + 1) * y
                 + total((k - m + 1) * x(k) for k in range(n + m + 1, d + 1))
                 + total((k - n) * x(k) for k in range(n + 1, n + m + 1)))
    permute = ((d - m + 1) * m + m * (y + total(x(i) for i in range(1, n + 1)))
               + m * (x0 + 1))
    axiom = total(x(k) + 1 for k in range(1, n + 1))
    return {"gluing": gluing, "structure": structure, "permute": permute, "axiom": axiom}


def _check_assoc(d: int, n: int, m: int) -> None:
    if not (1 <= m <= d and 0 <= n and n + m <= d):
        raise SignError(f"(d, n, m) = ({d}, {n}, {m}) out of range")


def assoc_target(d: int) -> SignPoly:
    return total((k + 1) * x(k) for k in range(1, d + 1))


def assoc_substitutions(d: int, n: int, m: int) -> dict[str, SignPoly]:
    """|y| and |x_0| are the degrees of mu^m and mu^d outputs (degree 2 - arity)."""
    return {"y": total([x(k) for k in range(n + 1, n + m + 1)] + [m]),
            "x0": total([x(k) for k in range(1, d + 1)] + [d])}


def assoc_total(d: int, n: int, m: int) -> SignPoly:
    s = total(assoc_sign_terms(d, n, m).values())
    return s.substitute_all(assoc_substitutions(d, n, m))


def assoc_sign_identity(d: int, n: int, m: int) -> bool:
    return assoc_total(d, n, m) == assoc_target(d)


def _check_partition(d: int, parts: Sequence[int]) -> None:
    if not parts or any(p < 1 for p in parts) or sum(parts) != d:
        raise SignError(f"{tuple(parts)} is not a partition of {d} into positive parts")


def functor_sign_terms(d: int, parts: Sequence[int]) -> dict[str, SignPoly]:
    """Contributions to the sign of the mu^m(F^{i_1}, ..., F^{i_m}) term.

    2a  sum_j (i_j - 1) m + sum_j (i_j - 1) sum_{k<j} (i_k - 1)
    2b  sum_j |y_j| sum_{k<j} (i_k - 1)
    2c  sum_j sum_i i |x_{l_j + i}| + sum_j j |y_j|
    2d  1 + sum_j (m - j)(i_j - 1)
    """
    _check_partition(d, parts)
    m = len(parts)
    ys = [SignPoly.var(f"y{j}") for j in range(1, m + 1)]
    before = [sum(p - 1 for p in parts[:j]) for j in range(m)]
    starts = [sum(parts[:j]) for j in range(m)]
    a = SignPoly.const(sum((parts[j] - 1) * m + (parts[j] - 1) * before[j] for j in range(m)))
    b = total(ys[j] * before[j] for j in range(m))
    c = (total(i * x(starts[j] + i) for j in range(m) for i in range(1, parts[j] + 1))
         + total((j + 1) * ys[j] for j in range(m)))
    dd = SignPoly.const(1 + sum((m - j - 1) * (parts[j] - 1) for j in range(m)))
    return {"2a": a, "2b": b, "2c": c, "2d": dd}


def functor_substitutions(d: int, parts: Sequence[int]) -> dict[str, SignPoly]:
    """|y_j| = degree of F^{i_j} on its block: sum of the block + 1 - i_j."""
    out = {}
    pos = 0
    for j, p in enumerate(parts, start=1):
        out[f"y{j}"] = total([x(k) for k in range(pos + 1, pos + p + 1)] + [1 - p])
        pos += p
    return out


def functor_target(d: int) -> SignPoly:
    return total([1] + [(j + 1) * x(j) for j in range(1, d + 1)])


def functor_total(d: int, parts: Sequence[int]) -> SignPoly:
    s = total(functor_sign_terms(d, parts).values())
    return s.substitute_all(functor_substitutions(d, parts))


def functor_sign_identity(d: int, parts: Sequence[int]) -> bool:
    return functor_total(d, parts) == functor_target(d)


def all_assoc_cases(dmax: int) -> list[tuple[int, int, int]]:
    return [(d, n, m) for d in range(1, dmax + 1) for m in range(1, d + 1) for n in range(0, d - m + 1)]


def all_partitions(d: int) -> list[tuple[int, ...]]:
    out = []
    for cuts in itertools.product([0, 1], repeat=d - 1):
        parts, run = [], 1
        for c in cuts:
            if c:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        out.append(tuple(parts))
    return out


def verify_family(family: str, dmax: int) -> dict:
    """Exhaustive check; report {family, dmax, cases, failures}."""
    failures = []
    cases = 0
    if family == "assoc":
        for d, n, m in all_assoc_cases(dmax):
            cases += 1
            if not assoc_sign_identity(d, n, m):
                failures.append({"d": d, "n": n, "m": m, "total": str(assoc_total(d, n, m))})
    elif family == "functor":
        for d in range(1, dmax + 1):
            for parts in all_partitions(d):
                cases += 1
                if not functor_sign_identity(d, parts):
                    failures.append({"d": d, "partition": list(parts),
                                     "total": str(functor_total(d, parts))})
    elif family == "jacobian":
        for spec in all_gluing_maps(dmax):
            cases += 1
            got, want = gluing_orientation_sign(spec), closed_form_sign(spec)
            if got != want:
                failures.append({"map": spec.describe(), "jacobian": got, "closed_form": want})
    else:
        raise SignError(f"unknown sign family {family!r}")
    return {"family": family, "dmax": dmax, "cases": cases, "failures": failures}


# ---------------------------------------------------------------------------
# gluing maps and the Jacobian oracle


class Dual:
    """Value plus exact gradient, for forward differentiation over Fractions."""
    __slots__ = ("v", "g")

    def __init__(self, v, g):
        self.v = Fraction(v)
        self.g = tuple(g)

    @staticmethod
    def lift(x, n):
        return x if isinstance(x, Dual) else Dual(x, (Fraction(0),) * n)

    def __add__(self, o):
        o = Dual.lift(o, len(self.g))
        return Dual(self.v + o.v, (a + b for a, b in zip(self.g, o.g)))

    __radd__ = __add__

    def __sub__(self, o):
        o = Dual.lift(o, len(self.g))
        return Dual(self.v - o.v, (a - b for a, b in zip(self.g, o.g)))

    def __rsub__(self, o):
        return Dual.lift(o, len(self.g)) - self

    def __mul__(self, o):
        o = Dual.lift(o, len(self.g))
        return Dual(self.v * o.v, (self.v * b + o.v * a for a, b in zip(self.g, o.g)))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Dual.lift(o, len(self.g))
        if o.v == 0:
            raise ZeroDivisionError
        return Dual(self.v / o.v, ((a * o.v - self.v * b) / (o.v * o.v) for a, b in zip(self.g, o.g)))

    def __rtruediv__(self, o):
        return Dual.lift(o, len(self.g)) / self


@dataclass(frozen=True)
class GluingMap:
    """An explicit coordinate gluing map.

    assoc       R^m x R^{d-m+1} -> R^d, bubble of m points replacing point n+1
    unquilted   R^i x R^{d-i+1,0} -> R^{d,0}, bubble of i points replacing point j+1
    quilted     R^m x R^{i_1,0} x ... x R^{i_m,0} -> R^{d,0}
    """
    kind: str
    d: int
    a: int = 0          # n (assoc) or j (unquilted)
    b: int = 0          # m (assoc) or i (unquilted)
    parts: tuple[int, ...] = ()

    def describe(self) -> dict:
        if self.kind == "assoc":
            return {"kind": self.kind, "d": self.d, "n": self.a, "m": self.b}
        if self.kind == "unquilted":
            return {"kind": self.kind, "d": self.d, "j": self.a, "i": self.b}
        return {"kind": self.kind, "d": self.d, "parts": list(self.parts)}

    def validate(self) -> None:
        d = self.d
        if self.kind == "assoc":
            n, m = self.a, self.b
            ok = 2 <= m <= d - 1 and 0 <= n <= d - m
        elif self.kind == "unquilted":
            j, i = self.a, self.b
            ok = 2 <= i <= d and 0 <= j <= d - i
        elif self.kind == "quilted":
            ok = len(self.parts) >= 2 and all(p >= 1 for p in self.parts) and sum(self.parts) == d
        else:
            raise SignError(f"unknown gluing map kind {self.kind!r}")
        if not ok:
            raise SignError(f"invalid gluing map {self.describe()}")

    @property
    def source_dim(self) -> int:
        if self.kind == "assoc":
            return self.d - 2
        return self.d - 1


def _sample(k: int, spacing: Fraction) -> list[Fraction]:
    """k increasing generic rationals with gaps of about `spacing`."""
    return [spacing * (i + 1) + Fraction(1, 3 * (i + 2) + 1) * spacing / 4 for i in range(k)]


def _glue(spec: GluingMap, coords: Sequence):
    """Image of the source coordinates as the list of target coordinates."""
    d = spec.d
    if spec.kind == "assoc":
        n, m = spec.a, spec.b
        delta, rest = coords[0], list(coords[1:])
        z = [0, 1] + rest[:m - 2]
        w = [0, 1] + rest[m - 2:]
        pts = w[:n] + [w[n] + delta * zk for zk in z] + w[n + 1:]
        scale = pts[1] - pts[0]
        pts = [(p - pts[0]) / scale for p in pts]
        return pts[2:]
    if spec.kind == "unquilted":
        j, i = spec.a, spec.b
        delta, rest = coords[0], list(coords[1:])
        z = [0, 1] + rest[:i - 2]
        w = [0] + rest[i - 2:]
        pts = w[:j] + [w[j] + delta * zk for zk in z] + w[j + 1:]
        return [p - pts[0] for p in pts[1:]]
    m = len(spec.parts)
    delta, rest = coords[0], list(coords[1:])
    z = [0, 1] + rest[:m - 2]
    rest = rest[m - 2:]
    pts = []
    for j, p in enumerate(spec.parts):
        ws = [0] + rest[:p - 1]
        rest = rest[p - 1:]
        base = z[j] / delta
        pts += [base + wk for wk in ws]
    return pts[1:]


def _sample_point(spec: GluingMap, shrink: int) -> list[Fraction]:
    d = spec.d
    if spec.kind == "assoc":
        n, m = spec.a, spec.b
        delta = Fraction(1, 4 * m * (2 ** shrink))
        return [delta] + [1 + x for x in _sample(m - 2, Fraction(1))] + \
            [1 + x for x in _sample(d - m - 1, Fraction(1))]
    if spec.kind == "unquilted":
        i = spec.b
        delta = Fraction(1, 4 * i * (2 ** shrink))
        return [delta] + [1 + x for x in _sample(i - 2, Fraction(1))] + _sample(d - i, Fraction(1))
    m = len(spec.parts)
    delta = Fraction(1, 4 * (d + 1) * (2 ** shrink))
    out = [delta] + [1 + x for x in _sample(m - 2, Fraction(1))]
    for p in spec.parts:
        out += _sample(p - 1, Fraction(1, 2 * d))
    return out


def jacobian(spec: GluingMap, point: Sequence[Fraction]) -> list[list[Fraction]]:
    n = len(point)
    duals = [Dual(v, (Fraction(int(i == j)) for j in range(n))) for i, v in enumerate(point)]
    image = _glue(spec, duals)
    if len(image) != n:
        raise SignError(f"gluing map is not square ({n} -> {len(image)})")
    return [list(Dual.lift(f, n).g) for f in image]


def _ordered(spec: GluingMap, point) -> bool:
    img = [Fraction(0)] + [Fraction(v) for v in _glue(spec, [Fraction(p) for p in point])]
    if spec.kind == "assoc":
        img = [Fraction(0), Fraction(1)] + img[1:]
    return all(a < b for a, b in zip(img, img[1:]))


def gluing_orientation_sign(spec: GluingMap) -> int:
    """Sign of the exact Jacobian determinant at a deterministic sample point."""
    spec.validate()
    if spec.source_dim == 0:
        return 1
    for shrink in range(8):
        point = _sample_point(spec, shrink)
        if not _ordered(spec, point):
            continue
        det = linalg.determinant(jacobian(spec, point))
        if det != 0:
            return 1 if det > 0 else -1
    raise SignError(f"no regular sample point for {spec.describe()}")


def closed_form_sign(spec: GluingMap) -> int:
    spec.validate()
    if spec.kind == "assoc":
        parity = (spec.b - 1) * (spec.a - 1)
    elif spec.kind == "unquilted":
        parity = spec.b * spec.a + spec.a
    else:
        m = len(spec.parts)
        parity = 1 + sum((m - j) * (p - 1) for j, p in enumerate(spec.parts, start=1))
    return -1 if parity % 2 else 1


def all_gluing_maps(dmax: int) -> list[GluingMap]:
    out = []
    for d in range(2, dmax + 1):
        for m in range(2, d):
            for n in range(0, d - m + 1):
                out.append(GluingMap("assoc", d, n, m))
        for i in range(2, d + 1):
            for j in range(0, d - i + 1):
                out.append(GluingMap("unquilted", d, j, i))
        for parts in all_partitions(d):
            if len(parts) >= 2:
                out.append(GluingMap("quilted", d, parts=parts))
    return out
