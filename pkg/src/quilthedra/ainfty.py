"""Finite A-infinity categories, functors and pre-natural transformations.

Morphism spaces are free modules on named basis elements.  A vector is a
dict {basis name: coefficient} without zero entries.  Composition maps,
functor and transformation components are sparse tables on basis tuples
(absent tuple = zero) and are extended multilinearly.

Arguments are written in composable order: a_1 in Hom(C_0, C_1), ...,
a_d in Hom(C_{d-1}, C_d).  Signs:

    associativity     (-1)^(n + |a_1| + ... + |a_n|)
    functor axiom     the same sign on the inner-mu side, none on the other
    mu^1 on Hom(F,G)  (-1)^dagger on the outer terms and
                      -(-1)^(i + |a_1| + ... + |a_i| + |T| - 1) on the inner ones
    mu^2              (-1)^ddagger

A pre-natural transformation T has components T^d of degree |T| - d.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from . import linalg

RINGS = ("Z", "Q", "GF2")

Vec = dict


class AInftyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# coefficients and vectors


def coerce(ring: str, x):
    if ring == "Z":
        f = Fraction(x)
        if f.denominator != 1:
            raise AInftyError(f"{x} is not an integer")
        return int(f)
    if ring == "Q":
        return Fraction(x)
    if ring == "GF2":
        f = Fraction(x)
        if f.denominator != 1:
            raise AInftyError(f"{x} is not an integer")
        return int(f) % 2
    raise AInftyError(f"unknown ring {ring!r}")


def _norm(ring: str, v: Mapping) -> Vec:
    out = {}
    for k, c in v.items():
        c = coerce(ring, c)
        if c:
            out[k] = c
    return out


def vadd(ring: str, acc: Vec, v: Mapping, scale=1) -> Vec:
    """acc += scale * v, in place."""
    for k, c in v.items():
        x = acc.get(k, 0) + scale * c
        if ring == "GF2":
            x %= 2
        if x:
            acc[k] = x
        else:
            acc.pop(k, None)
    return acc


def vsub(ring: str, a: Mapping, b: Mapping) -> Vec:
    return vadd(ring, dict(a), b, -1)


def _sign(parity: int) -> int:
    return -1 if parity % 2 else 1


# ---------------------------------------------------------------------------
# categories


@dataclass(frozen=True)
class BasisElement:
    name: str
    src: str
    dst: str
    deg: int


@dataclass(frozen=True)
class AInftyInstance:
    """Objects, basis of every Hom space, and sparse tables for mu^0..mu^D."""
    N: int
    ring: str
    objects: tuple[str, ...]
    basis: tuple[BasisElement, ...]
    mu: Mapping[tuple[str, ...], Vec] = field(default_factory=dict)
    mu0: Mapping[str, Vec] = field(default_factory=dict)
    name: str = ""
    d_max: int = 4

    def __post_init__(self):
        if self.ring not in RINGS:
            raise AInftyError(f"unknown ring {self.ring!r}")
        if self.N < 0 or self.N % 2:
            raise AInftyError("N must be 0 (integer grading) or even")
        names = [b.name for b in self.basis]
        if len(set(names)) != len(names):
            raise AInftyError("basis names must be unique")
        objs = set(self.objects)
        for b in self.basis:
            if b.src not in objs or b.dst not in objs:
                raise AInftyError(f"{b.name} has an unknown endpoint")
        object.__setattr__(self, "mu", {tuple(k): _norm(self.ring, v) for k, v in self.mu.items()})
        object.__setattr__(self, "mu0", {k: _norm(self.ring, v) for k, v in self.mu0.items()})
        errs = degree_errors(self)
        if errs:
            raise AInftyError("degree-inconsistent tables: " + "; ".join(errs[:5]))

    # -- lookups ---------------------------------------------------------
    @property
    def by_name(self) -> dict[str, BasisElement]:
        return _by_name(self)

    def deg(self, name: str) -> int:
        return self.by_name[name].deg

    def reduce(self, k: int) -> int:
        return k % self.N if self.N else k

    def hom(self, x: str, y: str) -> list[str]:
        return [b.name for b in self.basis if b.src == x and b.dst == y]

    @property
    def flat(self) -> bool:
        return not any(self.mu0.values())

    def tuples(self, d: int) -> Iterator[tuple[str, ...]]:
        """Composable basis tuples of length d (d = 0 is excluded)."""
        out_of: dict[str, list[BasisElement]] = {}
        for b in self.basis:
            out_of.setdefault(b.src, []).append(b)

        def grow(prefix: tuple[str, ...], at: str) -> Iterator[tuple[str, ...]]:
            if len(prefix) == d:
                yield prefix
                return
            for b in out_of.get(at, []):
                yield from grow(prefix + (b.name,), b.dst)

        for x in self.objects:
            yield from grow((), x)

    def objects_along(self, a: Sequence[str], start: str | None = None) -> list[str]:
        if not a:
            return [start]
        bn = self.by_name
        return [bn[a[0]].src] + [bn[x].dst for x in a]

    def mu_basis(self, a: tuple[str, ...]) -> Vec:
        return self.mu.get(a, {})

    def apply(self, args: Sequence[Mapping], obj: str | None = None) -> Vec:
        """mu^k on vectors; with no arguments, the curvature of `obj`."""
        if not args:
            return dict(self.mu0.get(obj, {}))
        return _multilinear(self.ring, self.mu_basis, args)

    def with_mu(self, mu: Mapping, mu0: Mapping | None = None, name: str | None = None) -> "AInftyInstance":
        return AInftyInstance(self.N, self.ring, self.objects, self.basis, mu,
                              self.mu0 if mu0 is None else mu0,
                              self.name if name is None else name, self.d_max)


@lru_cache(maxsize=256)
def _by_basis(basis: tuple[BasisElement, ...]) -> dict[str, BasisElement]:
    return {b.name: b for b in basis}


def _by_name(c: AInftyInstance) -> dict[str, BasisElement]:
    return _by_basis(c.basis)


def _multilinear(ring: str, table, args: Sequence[Mapping]) -> Vec:
    out: Vec = {}
    if any(not v for v in args):
        return out
    for combo in itertools.product(*(v.items() for v in args)):
        names = tuple(k for k, _ in combo)
        val = table(names)
        if not val:
            continue
        coef = 1
        for _, c in combo:
            coef *= c
        vadd(ring, out, val, coef)
    return out


def degree_errors(c: AInftyInstance) -> list[str]:
    bn = {b.name: b for b in c.basis}
    errs = []
    for a, v in c.mu.items():
        if any(x not in bn for x in a):
            errs.append(f"mu on unknown basis {a}")
            continue
        objs = [bn[a[0]].src] + [bn[x].dst for x in a]
        if any(bn[a[i]].dst != bn[a[i + 1]].src for i in range(len(a) - 1)):
            errs.append(f"mu{a} is not composable")
            continue
        want = c.reduce(sum(bn[x].deg for x in a) + 2 - len(a))
        for k in v:
            if k not in bn:
                errs.append(f"mu{a} has unknown output {k}")
            elif (bn[k].src, bn[k].dst) != (objs[0], objs[-1]):
                errs.append(f"mu{a} -> {k} has wrong endpoints")
            elif c.reduce(bn[k].deg) != want:
                errs.append(f"mu{a} -> {k} has degree {bn[k].deg}, expected {want}")
    for x, v in c.mu0.items():
        for k in v:
            if k not in bn or (bn[k].src, bn[k].dst) != (x, x):
                errs.append(f"curvature of {x} leaves Hom({x},{x})")
            elif c.reduce(bn[k].deg) != c.reduce(2):
                errs.append(f"curvature of {x} has degree {bn[k].deg}")
    return errs


@dataclass(frozen=True)
class Residual:
    arity: int
    inputs: tuple[str, ...]
    value: Vec

    def to_json(self) -> dict:
        return {"arity": self.arity, "inputs": list(self.inputs),
                "value": {k: str(v) for k, v in sorted(self.value.items())}}


@dataclass(frozen=True)
class CheckReport:
    name: str
    checked: int
    residuals: tuple[Residual, ...]

    @property
    def ok(self) -> bool:
        return not self.residuals

    def to_json(self) -> dict:
        return {"check": self.name, "ok": self.ok, "checked": self.checked,
                "residuals": [r.to_json() for r in self.residuals[:20]],
                "residual_count": len(self.residuals)}


def ainfty_relation(c: AInftyInstance, a: tuple[str, ...], obj: str | None = None) -> Vec:
    """Signed sum over n + m <= d of mu(a_1..a_n, mu^m(...), ...)."""
    d = len(a)
    objs = c.objects_along(a, obj)
    basis = [{x: 1} for x in a]
    out: Vec = {}
    prefix_deg = [0]
    for x in a:
        prefix_deg.append(prefix_deg[-1] + c.deg(x))
    for m in range(0, d + 1):
        for n in range(0, d - m + 1):
            inner = c.apply(basis[n:n + m], objs[n])
            if not inner:
                continue
            outer = c.apply(basis[:n] + [inner] + basis[n + m:], objs[0])
            vadd(c.ring, out, outer, _sign(n + prefix_deg[n]))
    return out


def check_ainfty(c: AInftyInstance, d_max: int | None = None) -> CheckReport:
    d_max = c.d_max if d_max is None else d_max
    if d_max > c.d_max:
        raise AInftyError(f"d_max {d_max} exceeds the instance's table range {c.d_max}")
    res, n = [], 0
    for x in c.objects:
        n += 1
        r = ainfty_relation(c, (), x)
        if r:
            res.append(Residual(0, (x,), r))
    for d in range(1, d_max + 1):
        for a in c.tuples(d):
            n += 1
            r = ainfty_relation(c, a)
            if r:
                res.append(Residual(d, a, r))
    return CheckReport("ainfty", n, tuple(res))


def check_curvature_floer(c: AInftyInstance, w: Mapping[str, int]) -> CheckReport:
    """mu^1 mu^1 = (w(X) - w(Y)) Id on every Hom(X, Y)."""
    res, n = [], 0
    for b in c.basis:
        n += 1
        got = c.apply([c.apply([{b.name: 1}])])
        want = _norm(c.ring, {b.name: w[b.src] - w[b.dst]})
        diff = vsub(c.ring, got, want)
        if diff:
            res.append(Residual(1, (b.name,), diff))
    return CheckReport("curvature", n, tuple(res))


def opposite_sign_check(c: AInftyInstance, d_max: int | None = None) -> CheckReport:
    """Associativity with the unshifted Koszul sign (-1)^(|a_1| + ... + |a_n|)."""
    d_max = c.d_max if d_max is None else d_max
    res, count = [], 0
    for d in range(1, d_max + 1):
        for a in c.tuples(d):
            count += 1
            basis = [{x: 1} for x in a]
            out: Vec = {}
            for m in range(1, d + 1):
                for n in range(0, d - m + 1):
                    inner = c.apply(basis[n:n + m])
                    if inner:
                        s = sum(c.deg(x) for x in a[:n])
                        vadd(c.ring, out, c.apply(basis[:n] + [inner] + basis[n + m:]), _sign(s))
            if out:
                res.append(Residual(d, a, out))
    return CheckReport("ainfty-opposite", count, tuple(res))


# ---------------------------------------------------------------------------
# functors


@dataclass(frozen=True)
class AFunctor:
    source: AInftyInstance
    target: AInftyInstance
    obj_map: Mapping[str, str]
    tables: Mapping[tuple[str, ...], Vec]
    name: str = ""

    def __post_init__(self):
        ring = self.target.ring
        object.__setattr__(self, "tables", {tuple(k): _norm(ring, v) for k, v in self.tables.items()})
        missing = set(self.source.objects) - set(self.obj_map)
        if missing:
            raise AInftyError(f"object map misses {sorted(missing)}")
        s, t = self.source.by_name, self.target.by_name
        for a, v in self.tables.items():
            if not a:
                raise AInftyError("functors have no arity-0 component")
            objs = [s[a[0]].src] + [s[x].dst for x in a]
            want = self.target.reduce(sum(s[x].deg for x in a) + 1 - len(a))
            for k in v:
                b = t[k]
                if (b.src, b.dst) != (self.obj_map[objs[0]], self.obj_map[objs[-1]]):
                    raise AInftyError(f"F{a} -> {k} does not match the object map")
                if self.target.reduce(b.deg) != want:
                    raise AInftyError(f"F{a} -> {k} has degree {b.deg}, expected {want}")

    def component(self, a: tuple[str, ...]) -> Vec:
        return self.tables.get(a, {})

    def apply(self, args: Sequence[Mapping]) -> Vec:
        return _multilinear(self.target.ring, self.component, args)


def identity_functor(c: AInftyInstance) -> AFunctor:
    return AFunctor(c, c, {x: x for x in c.objects}, {(b.name,): {b.name: 1} for b in c.basis}, "id")


def compositions(d: int, m: int, zero_at: int | None = None) -> Iterator[tuple[int, ...]]:
    """Ordered splittings of d into m parts >= 1 (part `zero_at` may be 0)."""
    def go(rest: int, j: int) -> Iterator[tuple[int, ...]]:
        if j == m:
            if rest == 0:
                yield ()
            return
        lo = 0 if j == zero_at else 1
        for p in range(lo, rest + 1):
            for tail in go(rest - p, j + 1):
                yield (p,) + tail
    return go(d, 0)


def _blocks(a: Sequence, parts: Sequence[int]) -> list[tuple]:
    out, pos = [], 0
    for p in parts:
        out.append(tuple(a[pos:pos + p]))
        pos += p
    return out


def functor_residual(f: AFunctor, a: tuple[str, ...]) -> Vec:
    c0, c1 = f.source, f.target
    d = len(a)
    basis = [{x: 1} for x in a]
    lhs: Vec = {}
    pre = [0]
    for x in a:
        pre.append(pre[-1] + c0.deg(x))
    for j in range(1, d + 1):
        for i in range(0, d - j + 1):
            inner = c0.apply(basis[i:i + j])
            if inner:
                vadd(c1.ring, lhs, f.apply(basis[:i] + [inner] + basis[i + j:]), _sign(i + pre[i]))
    rhs: Vec = {}
    for m in range(1, d + 1):
        for parts in compositions(d, m):
            args = [f.component(b) for b in _blocks(a, parts)]
            if all(args):
                vadd(c1.ring, rhs, c1.apply(args))
    return vsub(c1.ring, lhs, rhs)


def check_functor(f: AFunctor, d_max: int | None = None) -> CheckReport:
    if not (f.source.flat and f.target.flat):
        raise AInftyError("functor axioms are checked on flat categories only")
    d_max = min(f.source.d_max, f.target.d_max) if d_max is None else d_max
    res, n = [], 0
    for d in range(1, d_max + 1):
        for a in f.source.tuples(d):
            n += 1
            r = functor_residual(f, a)
            if r:
                res.append(Residual(d, a, r))
    return CheckReport("functor", n, tuple(res))


def compose_functors(f1: AFunctor, f2: AFunctor, d_max: int | None = None) -> AFunctor:
    """(F1 o F2)^d = sum F1^m(F2^{i_1}(...), ..., F2^{i_m}(...)); F2 acts first."""
    if f2.target is not f1.source and f2.target != f1.source:
        raise AInftyError("F2 must land in the source of F1")
    c0 = f2.source
    d_max = c0.d_max if d_max is None else d_max
    tables = {}
    for d in range(1, d_max + 1):
        for a in c0.tuples(d):
            out: Vec = {}
            for m in range(1, d + 1):
                for parts in compositions(d, m):
                    args = [f2.component(b) for b in _blocks(a, parts)]
                    if all(args):
                        vadd(f1.target.ring, out, f1.apply(args))
            if out:
                tables[a] = out
    objs = {x: f1.obj_map[f2.obj_map[x]] for x in c0.objects}
    return AFunctor(c0, f1.target, objs, tables, f"{f1.name}o{f2.name}")


def pushforward(c: AInftyInstance, f_higher: Mapping[tuple[str, ...], Mapping]) -> tuple[AInftyInstance, AFunctor]:
    """Transport the structure of a flat `c` along F = id + F^{>=2}.

    Solves the functor axiom arity by arity for the new compositions, so that
    F: c -> c' is an A-infinity functor and c' is again A-infinity (up to the
    instance's table range).
    """
    if not c.flat:
        raise AInftyError("pushforward needs a flat instance")
    tables = {(b.name,): {b.name: 1} for b in c.basis}
    for k, v in f_higher.items():
        if len(k) < 2:
            raise AInftyError("only higher components may be prescribed")
        tables[tuple(k)] = dict(v)
    new_mu: dict[tuple[str, ...], Vec] = {}

    def comp(a):
        return tables.get(a, {})

    def mu_new(a):
        return new_mu.get(a, {})

    for d in range(1, c.d_max + 1):
        for a in c.tuples(d):
            basis = [{x: 1} for x in a]
            pre = [0]
            for x in a:
                pre.append(pre[-1] + c.deg(x))
            val: Vec = {}
            for j in range(1, d + 1):
                for i in range(0, d - j + 1):
                    inner = c.apply(basis[i:i + j])
                    if inner:
                        vadd(c.ring, val, _multilinear(c.ring, comp, basis[:i] + [inner] + basis[i + j:]),
                             _sign(i + pre[i]))
            for m in range(1, d):
                for parts in compositions(d, m):
                    args = [comp(b) for b in _blocks(a, parts)]
                    if all(args):
                        vadd(c.ring, val, _multilinear(c.ring, mu_new, args), -1)
            if val:
                new_mu[a] = val
    c2 = c.with_mu(new_mu, name=c.name + "'")
    f = AFunctor(c, c2, {x: x for x in c.objects}, tables, "gauge")
    return c2, f


# ---------------------------------------------------------------------------
# pre-natural transformations


@dataclass(frozen=True)
class PreNat:
    """T from F1 to F2 of degree |T|: components T^d of degree |T| - d.

    `t0` holds the arity-zero components, one vector per source object.
    """
    F1: AFunctor
    F2: AFunctor
    degree: int
    tables: Mapping[tuple[str, ...], Vec]
    t0: Mapping[str, Vec] = field(default_factory=dict)

    def __post_init__(self):
        ring = self.F1.target.ring
        object.__setattr__(self, "tables", {tuple(k): _norm(ring, v) for k, v in self.tables.items()})
        object.__setattr__(self, "t0", {k: _norm(ring, v) for k, v in self.t0.items()})
        if dict(self.F1.obj_map) != dict(self.F2.obj_map) and self.F1.source != self.F2.source:
            raise AInftyError("F1 and F2 must share a source")
        errs = self.degree_errors()
        if errs:
            raise AInftyError("; ".join(errs[:5]))

    @property
    def source(self) -> AInftyInstance:
        return self.F1.source

    @property
    def target(self) -> AInftyInstance:
        return self.F1.target

    def degree_errors(self) -> list[str]:
        s, t = self.source.by_name, self.target.by_name
        errs = []
        for x, v in self.t0.items():
            for k in v:
                b = t[k]
                if (b.src, b.dst) != (self.F1.obj_map[x], self.F2.obj_map[x]):
                    errs.append(f"T^0 at {x} -> {k} has wrong endpoints")
                elif self.target.reduce(b.deg) != self.target.reduce(self.degree):
                    errs.append(f"T^0 at {x} -> {k} has degree {b.deg}")
        for a, v in self.tables.items():
            objs = [s[a[0]].src] + [s[x].dst for x in a]
            want = self.target.reduce(sum(s[x].deg for x in a) + self.degree - len(a))
            for k in v:
                b = t[k]
                if (b.src, b.dst) != (self.F1.obj_map[objs[0]], self.F2.obj_map[objs[-1]]):
                    errs.append(f"T{a} -> {k} has wrong endpoints")
                elif self.target.reduce(b.deg) != want:
                    errs.append(f"T{a} -> {k} has degree {b.deg}, expected {want}")
        return errs

    def component(self, a: tuple[str, ...], obj: str | None = None) -> Vec:
        if not a:
            return self.t0.get(obj, {})
        return self.tables.get(a, {})

    def apply(self, args: Sequence[Mapping]) -> Vec:
        return _multilinear(self.target.ring, self.component, args)

    def is_zero(self) -> bool:
        return not any(self.tables.values()) and not any(self.t0.values())


def _prenat_from(F1: AFunctor, F2: AFunctor, degree: int, compute, d_max: int) -> PreNat:
    c0 = F1.source
    t0 = {x: v for x in c0.objects if (v := compute((), x))}
    tables = {}
    for d in range(1, d_max + 1):
        for a in c0.tuples(d):
            v = compute(a, None)
            if v:
                tables[a] = v
    return PreNat(F1, F2, degree, tables, t0)


def _requires_flat(*cats: AInftyInstance) -> None:
    if not all(c.flat for c in cats):
        raise AInftyError("pre-natural transformations are defined between flat categories")


def mu1_prenat(T: PreNat, d_max: int | None = None, sign_degree: int | None = None) -> PreNat:
    """The differential on Hom(F1, F2); output degree |T| + 1.

    `sign_degree` overrides the |T| entering the signs (for convention experiments).
    """
    c0, c1 = T.source, T.target
    _requires_flat(c0, c1)
    d_max = min(c0.d_max, c1.d_max) if d_max is None else d_max
    ring = c1.ring
    g = T.degree if sign_degree is None else sign_degree

    def compute(a, obj):
        d = len(a)
        objs = c0.objects_along(a, obj)
        pre = [0]
        for x in a:
            pre.append(pre[-1] + c0.deg(x))
        out: Vec = {}
        for m in range(1, d + 2):
            for k in range(m):
                for parts in compositions(d, m, zero_at=k):
                    blocks = _blocks(a, parts)
                    args = []
                    pos = 0
                    for j, b in enumerate(blocks):
                        if j < k:
                            args.append(T.F1.component(b))
                        elif j == k:
                            args.append(T.component(b, objs[pos]))
                        else:
                            args.append(T.F2.component(b))
                        pos += len(b)
                    if not all(args):
                        continue
                    before = sum(parts[:k])
                    dag = (g - 1) * (pre[before] - before)
                    vadd(ring, out, c1.apply(args), _sign(dag))
        basis = [{x: 1} for x in a]
        for e in range(1, d + 1):
            for i in range(0, d - e + 1):
                inner = c0.apply(basis[i:i + e])
                if inner:
                    val = T.apply(basis[:i] + [inner] + basis[i + e:])
                    vadd(ring, out, val, -_sign(i + pre[i] + g - 1))
        return out

    return _prenat_from(T.F1, T.F2, T.degree + 1, compute, d_max)


def mu2_prenat(T1: PreNat, T2: PreNat, d_max: int | None = None,
               sign_degrees: tuple[int, int] | None = None) -> PreNat:
    """Composition of T1: F0 -> F1 and T2: F1 -> F2."""
    if T1.F2 != T2.F1:
        raise AInftyError("T1 must end where T2 starts")
    c0, c1 = T1.source, T1.target
    _requires_flat(c0, c1)
    d_max = min(c0.d_max, c1.d_max) if d_max is None else d_max
    ring = c1.ring
    g1, g2 = sign_degrees or (T1.degree, T2.degree)
    F0, F1, F2 = T1.F1, T1.F2, T2.F2

    def compute(a, obj):
        d = len(a)
        objs = c0.objects_along(a, obj)
        pre = [0]
        for x in a:
            pre.append(pre[-1] + c0.deg(x))
        out: Vec = {}
        for m in range(2, d + 3):
            for k in range(m):
                for l in range(k + 1, m):
                    for parts in _two_zero_compositions(d, m, k, l):
                        blocks = _blocks(a, parts)
                        args, pos = [], 0
                        for j, b in enumerate(blocks):
                            if j < k:
                                args.append(F0.component(b))
                            elif j == k:
                                args.append(T1.component(b, objs[pos]))
                            elif j < l:
                                args.append(F1.component(b))
                            elif j == l:
                                args.append(T2.component(b, objs[pos]))
                            else:
                                args.append(F2.component(b))
                            pos += len(b)
                        if not all(args):
                            continue
                        bk, bl = sum(parts[:k]), sum(parts[:l])
                        dd = (g1 - 1) * (pre[bk] - bk) + (g2 - 1) * (pre[bl] - bl)
                        vadd(ring, out, c1.apply(args), _sign(dd))
        return out

    return _prenat_from(F0, F2, T1.degree + T2.degree, compute, d_max)


def _two_zero_compositions(d: int, m: int, k: int, l: int) -> Iterator[tuple[int, ...]]:
    def go(rest: int, j: int):
        if j == m:
            if rest == 0:
                yield ()
            return
        lo = 0 if j in (k, l) else 1
        for p in range(lo, rest + 1):
            for tail in go(rest - p, j + 1):
                yield (p,) + tail
    return go(d, 0)


def prenat_add(*ts: PreNat, F1: AFunctor | None = None, F2: AFunctor | None = None) -> PreNat:
    """Sum of transformations of one degree, relabelled with the given endpoints."""
    ring = ts[0].target.ring
    tables: dict = {}
    t0: dict = {}
    for t in ts:
        if t.degree != ts[0].degree:
            raise AInftyError("summands must share a degree")
        for k, v in t.tables.items():
            tables[k] = vadd(ring, tables.get(k, {}), v)
        for k, v in t.t0.items():
            t0[k] = vadd(ring, t0.get(k, {}), v)
    return PreNat(F1 or ts[0].F1, F2 or ts[-1].F2, ts[0].degree, tables, t0)


def functor_difference(F1: AFunctor, F2: AFunctor, degree: int) -> PreNat:
    """F1 - F2 viewed as a transformation from F1 to F2."""
    if dict(F1.obj_map) != dict(F2.obj_map):
        raise AInftyError("homotopic functors must act the same way on objects")
    ring = F1.target.ring
    tables = {}
    for k in set(F1.tables) | set(F2.tables):
        v = vsub(ring, F1.component(k), F2.component(k))
        if v:
            tables[k] = v
    return PreNat(F1, F2, degree, tables)


def prenat_residuals(a: PreNat, b: PreNat, d_max: int) -> tuple[Residual, ...]:
    ring = a.target.ring
    res = []
    for x in a.source.objects:
        diff = vsub(ring, a.component((), x), b.component((), x))
        if diff:
            res.append(Residual(0, (x,), diff))
    for d in range(1, d_max + 1):
        for t in a.source.tuples(d):
            diff = vsub(ring, a.component(t), b.component(t))
            if diff:
                res.append(Residual(d, t, diff))
    return tuple(res)


HOMOTOPY_DEGREE = 0


def is_homotopy(T: PreNat, F1: AFunctor | None = None, F2: AFunctor | None = None,
                d_max: int | None = None) -> bool:
    return homotopy_report(T, F1, F2, d_max).ok


def homotopy_report(T: PreNat, F1: AFunctor | None = None, F2: AFunctor | None = None,
                    d_max: int | None = None) -> CheckReport:
    F1 = F1 or T.F1
    F2 = F2 or T.F2
    if (F1, F2) != (T.F1, T.F2):
        T = PreNat(F1, F2, T.degree, T.tables, T.t0)
    if T.degree != HOMOTOPY_DEGREE:
        raise AInftyError(f"a homotopy has components T^d of degree -d (|T| = {HOMOTOPY_DEGREE})")
    if dict(F1.obj_map) != dict(F2.obj_map):
        raise AInftyError("homotopic functors must act the same way on objects")
    d_max = min(T.source.d_max, T.target.d_max) if d_max is None else d_max
    lhs = functor_difference(F1, F2, HOMOTOPY_DEGREE + 1)
    rhs = mu1_prenat(T, d_max)
    res = prenat_residuals(lhs, rhs, d_max)
    n = len(T.source.objects) + sum(1 for d in range(1, d_max + 1) for _ in T.source.tuples(d))
    return CheckReport("homotopy", n, res)


def homotopic_functor(F1: AFunctor, T: PreNat, d_max: int | None = None) -> AFunctor:
    """The functor F2 with F1 - F2 = mu^1(T), solved arity by arity.

    T must have degree 0 and no arity-zero part; then (mu^1 T)^d only involves
    F2 in arities below d.
    """
    if T.degree != HOMOTOPY_DEGREE or any(T.t0.values()):
        raise AInftyError("needs a degree-0 transformation without arity-zero part")
    c0, c1 = F1.source, F1.target
    d_max = min(c0.d_max, c1.d_max) if d_max is None else d_max
    tables: dict = {}
    for d in range(1, d_max + 1):
        F2 = AFunctor(c0, c1, F1.obj_map, tables, F1.name + "~")
        T2 = PreNat(F1, F2, T.degree, T.tables)
        M = mu1_prenat(T2, d)
        for a in c0.tuples(d):
            v = vsub(c1.ring, F1.component(a), M.component(a))
            if v:
                tables[a] = v
    return AFunctor(c0, c1, F1.obj_map, tables, F1.name + "~")


def compose_homotopies(T1: PreNat, T2: PreNat, d_max: int | None = None) -> PreNat:
    """T1 + T2 + mu^2(T1, T2), a transformation from T1.F1 to T2.F2."""
    prod = mu2_prenat(T1, T2, d_max)
    a = PreNat(T1.F1, T2.F2, T1.degree, T1.tables, T1.t0)
    b = PreNat(T1.F1, T2.F2, T2.degree, T2.tables, T2.t0)
    return prenat_add(a, b, prod)


# ---------------------------------------------------------------------------
# cohomology


def _field(ring: str) -> None:
    if ring not in ("Q", "GF2"):
        raise AInftyError("cohomology is computed over a field (Q or GF2)")


def _gf2_rank(rows: list[list[int]]) -> int:
    rows = [int("".join(str(x % 2) for x in r) or "0", 2) for r in rows]
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot:
            rank += 1
            top = pivot.bit_length() - 1
            rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
    return rank


def _rank(ring: str, rows: list[list], ncols: int) -> int:
    if not rows or not ncols:
        return 0
    if ring == "GF2":
        return _gf2_rank(rows)
    return linalg.rank(rows, ncols)


@dataclass(frozen=True)
class HomCohomology:
    src: str
    dst: str
    degree: int
    cycles: tuple[tuple, ...]      # basis of ker mu^1 in this degree (rows over the Hom basis)
    reps: tuple[tuple, ...]        # cycles completing a basis of the boundaries
    boundaries_rank: int
    basis_names: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.reps)


def _matrix(c: AInftyInstance, cols: list[str], rows_of: list[str]) -> list[list]:
    """Columns = images under mu^1 of `cols`, expressed in `rows_of`."""
    idx = {n: i for i, n in enumerate(rows_of)}
    m = [[0] * len(cols) for _ in rows_of]
    for j, x in enumerate(cols):
        for k, v in c.apply([{x: 1}]).items():
            m[idx[k]][j] = v
    return m


def _nullspace_gf2(rows: list[list[int]], ncols: int) -> list[list[int]]:
    m = [[x % 2 for x in r] for r in rows]
    pivots, r = [], 0
    for col in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][col]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(len(m)):
            if i != r and m[i][col]:
                m[i] = [(x + y) % 2 for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    basis = []
    for f in (c for c in range(ncols) if c not in pivots):
        v = [0] * ncols
        v[f] = 1
        for i, p in enumerate(pivots):
            v[p] = m[i][f]
        basis.append(v)
    return basis


def hom_cohomology(c: AInftyInstance, x: str, y: str) -> dict[int, HomCohomology]:
    _field(c.ring)
    if not c.flat:
        raise AInftyError("cohomology needs mu^1 mu^1 = 0")
    names = c.hom(x, y)
    degs = sorted({c.reduce(c.deg(n)) for n in names})
    out = {}
    for g in degs:
        here = [n for n in names if c.reduce(c.deg(n)) == g]
        nxt = [n for n in names if c.reduce(c.deg(n)) == c.reduce(g + 1)]
        prev = [n for n in names if c.reduce(c.deg(n)) == c.reduce(g - 1)]
        dm = _matrix(c, here, nxt)
        if c.ring == "GF2":
            cycles = _nullspace_gf2(dm, len(here)) if nxt else [
                [int(i == j) for i in range(len(here))] for j in range(len(here))]
        else:
            cycles = [list(v) for v in linalg.nullspace(dm, len(here))] if nxt else [
                [Fraction(int(i == j)) for i in range(len(here))] for j in range(len(here))]
        bm = _matrix(c, prev, here)  # rows indexed by `here`
        bcols = [[bm[i][j] for i in range(len(here))] for j in range(len(prev))]
        brank = _rank(c.ring, bcols, len(here))
        # pick cycles independent modulo boundaries
        reps, current = [], list(bcols)
        for z in cycles:
            trial = current + [z]
            if _rank(c.ring, trial, len(here)) > _rank(c.ring, current, len(here)):
                reps.append(z)
                current = trial
        out[g] = HomCohomology(x, y, g, tuple(map(tuple, cycles)), tuple(map(tuple, reps)),
                               brank, tuple(here))
    return out


def _in_span(ring: str, vectors: list[list], v: list, n: int) -> bool:
    return _rank(ring, vectors + [v], n) == _rank(ring, vectors, n)


@dataclass(frozen=True)
class CohomologyFunctor:
    """H(F) on representatives: matrices per (Hom, degree), plus well-definedness."""
    obj_map: Mapping[str, str]
    matrices: Mapping[tuple[str, str, int], tuple[tuple, ...]]
    dims_source: Mapping[tuple[str, str, int], int]
    dims_target: Mapping[tuple[str, str, int], int]
    well_defined: bool


def _coords(ring: str, reps: list[list], bounds: list[list], v: list, n: int) -> list:
    """Coordinates of the class of v in the basis `reps` modulo `bounds`."""
    k = len(reps)
    cols = reps + bounds
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(n)]
    if ring == "GF2":
        sol = _solve_gf2(rows, v, len(cols))
    else:
        sol = linalg.solve(rows, v, len(cols))
    if sol is None:
        raise AInftyError("image is not a cycle")
    return [coerce(ring, x) for x in sol[:k]]


def _solve_gf2(rows, rhs, ncols):
    aug = [[x % 2 for x in r] + [b % 2] for r, b in zip(rows, rhs)]
    m = aug
    pivots, r = [], 0
    for col in range(ncols + 1):
        p = next((i for i in range(r, len(m)) if m[i][col]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(len(m)):
            if i != r and m[i][col]:
                m[i] = [(x + y) % 2 for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    if ncols in pivots:
        return None
    x = [0] * ncols
    for i, p in enumerate(pivots):
        x[p] = m[i][ncols]
    return x


def cohomology_functor(F: AFunctor) -> CohomologyFunctor:
    c0, c1 = F.source, F.target
    _field(c0.ring)
    _field(c1.ring)
    mats, ds, dt = {}, {}, {}
    ok = True
    for x in c0.objects:
        for y in c0.objects:
            if not c0.hom(x, y):
                continue
            hs = hom_cohomology(c0, x, y)
            fx, fy = F.obj_map[x], F.obj_map[y]
            ht = hom_cohomology(c1, fx, fy) if c1.hom(fx, fy) else {}
            for g, h in hs.items():
                tgt = ht.get(g)
                tnames = list(tgt.basis_names) if tgt else []
                treps = [list(r) for r in tgt.reps] if tgt else []
                tb = _boundaries(c1, fx, fy, g) if tgt else []

                def image(vec):
                    out = {}
                    for n, coef in zip(h.basis_names, vec):
                        if coef:
                            vadd(c1.ring, out, F.component((n,)), coef)
                    return [out.get(n, 0) for n in tnames]

                # well-definedness: boundaries go to boundaries
                for b in _boundaries(c0, x, y, g):
                    if any(image(b)) and not _in_span(c1.ring, tb, image(b), len(tnames)):
                        ok = False
                cols = []
                for r in h.reps:
                    v = image(list(r))
                    if not tnames:
                        cols.append([])
                        continue
                    try:
                        cols.append(_coords(c1.ring, treps, tb, v, len(tnames)))
                    except AInftyError:
                        ok = False
                        cols.append([0] * len(treps))
                mats[(x, y, g)] = tuple(tuple(col[i] for col in cols) for i in range(len(treps)))
                ds[(x, y, g)] = h.dim
                dt[(x, y, g)] = len(treps)
    return CohomologyFunctor(dict(F.obj_map), mats, ds, dt, ok)


def _boundaries(c: AInftyInstance, x: str, y: str, g: int) -> list[list]:
    names = c.hom(x, y)
    here = [n for n in names if c.reduce(c.deg(n)) == g]
    prev = [n for n in names if c.reduce(c.deg(n)) == c.reduce(g - 1)]
    out = []
    for p in prev:
        v = c.apply([{p: 1}])
        out.append([v.get(n, 0) for n in here])
    return out


def mat_mul(ring: str, a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple[tuple, ...]:
    if not a or not b:
        return tuple(() for _ in a)
    n, k, m = len(a), len(b), len(b[0])
    return tuple(tuple(coerce(ring, sum(a[i][t] * b[t][j] for t in range(k))) for j in range(m))
                 for i in range(n))


# ---------------------------------------------------------------------------
# JSON fixtures


def instance_from_json(data: Mapping) -> AInftyInstance:
    ring = data.get("ring", "Z")
    basis = []
    for h in data["homs"]:
        for b in h["basis"]:
            basis.append(BasisElement(b["name"], h["src"], h["dst"], int(b["deg"])))
    mu, mu0 = {}, {}
    for entry in data.get("mu", []):
        out = {o["basis"]: coerce(ring, o["coef"]) for o in entry["output"]}
        if entry["d"] == 0:
            mu0[entry["inputs"][0]] = out
        else:
            if len(entry["inputs"]) != entry["d"]:
                raise AInftyError(f"mu^{entry['d']} entry has {len(entry['inputs'])} inputs")
            mu[tuple(entry["inputs"])] = out
    return AInftyInstance(int(data.get("N", 0)), ring, tuple(data["objects"]), tuple(basis),
                          mu, mu0, data.get("name", ""), int(data.get("d_max", 4)))


def instance_to_json(c: AInftyInstance) -> dict:
    homs = []
    for x in c.objects:
        for y in c.objects:
            names = c.hom(x, y)
            if names:
                homs.append({"src": x, "dst": y,
                             "basis": [{"name": n, "deg": c.deg(n)} for n in names]})
    mu = [{"d": 0, "inputs": [x], "output": _out_json(v)} for x, v in sorted(c.mu0.items()) if v]
    mu += [{"d": len(k), "inputs": list(k), "output": _out_json(v)}
           for k, v in sorted(c.mu.items()) if v]
    return {"name": c.name, "N": c.N, "ring": c.ring, "d_max": c.d_max,
            "objects": list(c.objects), "homs": homs, "mu": mu}


def _out_json(v: Mapping) -> list[dict]:
    return [{"basis": k, "coef": int(c) if Fraction(c).denominator == 1 else str(c)}
            for k, c in sorted(v.items())]


def functor_from_json(data: Mapping, source: AInftyInstance, target: AInftyInstance) -> AFunctor:
    tables = {tuple(e["inputs"]): {o["basis"]: coerce(target.ring, o["coef"]) for o in e["output"]}
              for e in data.get("components", [])}
    return AFunctor(source, target, dict(data["objects"]), tables, data.get("name", ""))


def functor_to_json(F: AFunctor) -> dict:
    comps = [{"inputs": list(k), "output": _out_json(v)} for k, v in sorted(F.tables.items()) if v]
    return {"name": F.name, "source": F.source.name, "target": F.target.name,
            "objects": dict(sorted(F.obj_map.items())), "components": comps}


def prenat_to_json(T: PreNat) -> dict:
    comps = [{"object": x, "output": _out_json(v)} for x, v in sorted(T.t0.items()) if v]
    comps += [{"inputs": list(k), "output": _out_json(v)} for k, v in sorted(T.tables.items()) if v]
    return {"F1": T.F1.name, "F2": T.F2.name, "degree": T.degree, "components": comps}


def prenat_from_json(data: Mapping, F1: AFunctor, F2: AFunctor) -> PreNat:
    ring = F1.target.ring
    tables, t0 = {}, {}
    for e in data.get("components", []):
        out = {o["basis"]: coerce(ring, o["coef"]) for o in e["output"]}
        if e.get("object") is not None:
            t0[e["object"]] = out
        else:
            tables[tuple(e["inputs"])] = out
    return PreNat(F1, F2, int(data["degree"]), tables, t0)


FIXTURE_DIR = Path(__file__).with_name("fixtures")


def load_fixture(name: str, directory: str | Path | None = None) -> dict:
    base = Path(directory) if directory else FIXTURE_DIR
    path = base / (name if name.endswith(".json") else name + ".json")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# terms of the structure identities versus facets


IDENTITIES = ("assoc", "functor", "prenat-mu1", "homotopy")


@dataclass(frozen=True)
class Term:
    """One summand of a structure identity, with the facet its sign comes from."""
    text: str
    facet: object  # trees.Tree
    family: str


def _compositions(d: int, parts: int, zero_ok: Sequence[bool]) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if d == 0:
            yield ()
        return
    lo = 0 if zero_ok[0] else 1
    for first in range(lo, d + 1):
        for rest in _compositions(d - first, parts - 1, zero_ok[1:]):
            yield (first,) + rest


def _args(lo: int, hi: int) -> list[str]:
    return [f"a{i}" for i in range(lo, hi + 1)]


def _call(op: str, args: Sequence[str]) -> str:
    return f"{op}({','.join(args)})"


def _identity_terms(identity: str, d: int) -> list[Term]:
    from .trees import Leaf, Node, Tree

    def leaves(lo, hi):
        return tuple(Leaf("a", i) for i in range(lo, hi + 1))

    out: list[Term] = []
    if identity == "assoc":
        for m in range(2, d):
            for n in range(0, d - m + 1):
                inner = _call(f"mu{m}", _args(n + 1, n + m))
                text = _call(f"mu{d - m + 1}", _args(1, n) + [inner] + _args(n + m + 1, d))
                root = Node("U", leaves(1, n) + (Node("U", leaves(n + 1, n + m)),) + leaves(n + m + 1, d))
                out.append(Term(text, Tree("stable", d, 0, root), "two-vertex"))
        return out
    if identity == "functor":
        for j in range(2, d + 1):
            for i in range(0, d - j + 1):
                inner = _call(f"mu{j}", _args(i + 1, i + j))
                text = _call(f"F{d - j + 1}", _args(1, i) + [inner] + _args(i + j + 1, d))
                root = Node("C", leaves(1, i) + (Node("U", leaves(i + 1, i + j)),) + leaves(i + j + 1, d))
                out.append(Term(text, Tree("colored", d, 0, root), "unquilted-bubble"))
        for m in range(2, d + 1):
            for parts in _compositions(d, m, [False] * m):
                args, kids, pos = [], [], 1
                for p in parts:
                    args.append(_call(f"F{p}", _args(pos, pos + p - 1)))
                    kids.append(Node("C", leaves(pos, pos + p - 1)))
                    pos += p
                out.append(Term(_call(f"mu{m}", args), Tree("colored", d, 0, Node("U", tuple(kids))),
                                "quilted-bubbles"))
        return out
    if identity == "prenat-mu1":
        t1 = (Leaf("t", 1),)
        for m in range(2, d + 2):
            for k in range(m):
                zero_ok = [i == k for i in range(m)]
                for parts in _compositions(d, m, zero_ok):
                    args, kids, pos = [], [], 1
                    for slot, p in enumerate(parts):
                        blk = _args(pos, pos + p - 1)
                        if slot == k:
                            args.append(_call(f"T{p}", blk))
                            kids.append(Node("C", leaves(pos, pos + p - 1), t1))
                        else:
                            args.append(_call(f"F{'1' if slot < k else '2'}_{p}", blk))
                            kids.append(Node("C", leaves(pos, pos + p - 1)))
                        pos += p
                    out.append(Term(_call(f"mu{m}", args), Tree("seam", d, 1, Node("U", tuple(kids))),
                                    "h-product"))
        for e in range(2, d + 1):
            for i in range(0, d - e + 1):
                inner = _call(f"mu{e}", _args(i + 1, i + e))
                text = _call(f"T{d - e + 1}", _args(1, i) + [inner] + _args(i + e + 1, d))
                root = Node("C", leaves(1, i) + (Node("U", leaves(i + 1, i + e)),) + leaves(i + e + 1, d), t1)
                out.append(Term(text, Tree("seam", d, 1, root), "boundary-parenthesis"))
        return out
    if identity == "homotopy":
        # F_1 = Phi(L12) o Phi(L01), F_2 = Phi(L01 # L12), F_1 - F_2 = mu^1(T)
        for m in range(1, d + 1):
            for parts in _compositions(d, m, [False] * m):
                args, kids, pos = [], [], 1
                for p in parts:
                    args.append(_call(f"F01_{p}", _args(pos, pos + p - 1)))
                    kids.append(Node("C2", leaves(pos, pos + p - 1)))
                    pos += p
                out.append(Term(_call(f"F12_{m}", args), Tree("bicolored", d, 0, Node("C1", tuple(kids))),
                                "once-quilted-bubbles"))
        out.append(Term(_call(f"F02_{d}", _args(1, d)), Tree("bicolored", d, 0, Node("Z", leaves(1, d))),
                        "seams-together"))
        for k in range(2, d + 1):
            for i in range(0, d - k + 1):
                inner = _call(f"mu{k}", _args(i + 1, i + k))
                text = _call(f"T{d - k + 1}", _args(1, i) + [inner] + _args(i + k + 1, d))
                root = Node("B", leaves(1, i) + (Node("U", leaves(i + 1, i + k)),) + leaves(i + k + 1, d))
                out.append(Term(text, Tree("bicolored", d, 0, root), "unquilted-bubble"))
        for m in range(2, d + 1):
            for parts in _compositions(d, m, [False] * m):
                kids, blocks, pos = [], [], 1
                for p in parts:
                    blocks.append((p, _args(pos, pos + p - 1)))
                    kids.append(Node("B", leaves(pos, pos + p - 1)))
                    pos += p
                tree = Tree("bicolored", d, 0, Node("U", tuple(kids)))
                # the zero-dimensional bubble carries T; earlier ones F_1, later ones F_2
                for k in range(m):
                    args = [_call(("F1_" if s < k else "F2_" if s > k else "T") + str(p), blk)
                            for s, (p, blk) in enumerate(blocks)]
                    out.append(Term(_call(f"mu{m}", args), tree, "biquilted-bubbles"))
        return out
    raise ValueError(f"unknown identity {identity!r}")


_IDENTITY_POSET = {"assoc": ("stable", 0), "functor": ("colored", 0),
                   "prenat-mu1": ("seam", 1), "homotopy": ("bicolored", 0)}


def term_facet_correspondence(identity: str, d: int) -> dict:
    """Match identity terms to tagged facets.

    Each facet must host exactly one term, except biquilted facets, which host
    one term per bubble (the choice of the zero-dimensional bubble).
    """
    from .polytopes import build_face_poset, facet_tag

    if identity not in _IDENTITY_POSET:
        raise AInftyError(f"unknown identity {identity!r}; expected one of {IDENTITIES}")
    family, e = _IDENTITY_POSET[identity]
    poset = build_face_poset(family, d, e, covers=False)
    facets = {poset.faces[i]: facet_tag(poset.faces[i]) for i in poset.facets()}
    terms = _identity_terms(identity, d)
    hosted: dict = {}
    unmatched_terms = []
    tag_mismatch = []
    for t in terms:
        if t.facet not in facets:
            unmatched_terms.append(t.text)
            continue
        if facets[t.facet] != t.family:
            tag_mismatch.append({"term": t.text, "facet_tag": facets[t.facet], "term_tag": t.family})
        hosted.setdefault(t.facet, []).append(t.text)
    unmatched_facets = [f.expression() for f in facets if f not in hosted]
    multiplicity = []
    for f, texts in hosted.items():
        want = len(f.root.children) if facets[f] == "biquilted-bubbles" else 1
        if len(texts) != want:
            multiplicity.append({"facet": f.expression(), "terms": texts, "expected": want})
    pairs = [{"term": t.text, "facet": t.facet.expression(), "tag": t.family}
             for t in terms if t.facet in facets]
    return {"identity": identity, "d": d, "terms": len(terms), "facets": len(facets),
            "pairs": pairs, "unmatched_terms": unmatched_terms,
            "unmatched_facets": unmatched_facets, "multiplicity_errors": multiplicity,
            "tag_mismatches": tag_mismatch,
            "ok": not (unmatched_terms or unmatched_facets or multiplicity or tag_mismatch)}
