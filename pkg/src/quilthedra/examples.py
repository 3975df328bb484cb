"""Hand-built instances used by the tests, the CLI and the shipped fixtures.

path_category     paths in an acyclic graded quiver; mu^2(a, b) = (-1)^|a| ab,
                  mu^1 the Leibniz extension of a differential on arrows.
                  Oracle: associativity of concatenation.
curved_pair       two objects with disk invariants w = (1, 0) and
                  mu^1 mu^1 = (w(X) - w(Y)) Id on Hom(X, Y).
twisted           a path category transported along F = id + F^2, which
                  produces nonzero mu^3.
"""

from __future__ import annotations

import random
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import json
from pathlib import Path

from .ainfty import (FIXTURE_DIR, AFunctor, AInftyInstance, BasisElement, PreNat,
                     coerce, functor_from_json, functor_to_json, homotopic_functor,
                     instance_from_json, instance_to_json, prenat_from_json,
                     prenat_to_json, pushforward, vadd)
from . import relations as rel


@dataclass(frozen=True)
class Arrow:
    name: str
    src: str
    dst: str
    deg: int


def _paths(objects: Sequence[str], arrows: Sequence[Arrow]) -> list[tuple[str, ...]]:
    out_of: dict[str, list[Arrow]] = {}
    for a in arrows:
        out_of.setdefault(a.src, []).append(a)
    paths = []

    def grow(p, at, depth):
        if depth > len(arrows):
            raise ValueError("quiver must be acyclic")
        for a in out_of.get(at, []):
            q = p + (a,)
            paths.append(q)
            grow(q, a.dst, depth + 1)

    for x in objects:
        grow((), x, 0)
    return paths


def path_name(p) -> str:
    return ".".join(a.name for a in p)


def path_category(objects: Sequence[str], arrows: Sequence[Arrow],
                  differential: Mapping[str, Mapping[str, int]] | None = None,
                  N: int = 0, ring: str = "Z", name: str = "path", d_max: int = 4) -> AInftyInstance:
    """Graded path category with units, signed concatenation and a Leibniz differential.

    `differential` maps an arrow name to a combination of path names of one
    degree higher with the same endpoints.
    """
    differential = differential or {}
    arrows = list(arrows)
    paths = _paths(objects, arrows)
    basis = [BasisElement(f"e{x}", x, x, 0) for x in objects]
    info = {}
    for p in paths:
        nm = path_name(p)
        deg = sum(a.deg for a in p)
        basis.append(BasisElement(nm, p[0].src, p[-1].dst, deg))
        info[nm] = p
    degs = {b.name: b.deg for b in basis}
    ends = {b.name: (b.src, b.dst) for b in basis}

    def concat(x: str, y: str) -> str | None:
        if ends[x][1] != ends[y][0]:
            return None
        if x.startswith("e") and x not in info:
            return y
        if y.startswith("e") and y not in info:
            return x
        return x + "." + y

    def d_word(word: str) -> dict:
        if word not in info:
            return {}
        out: dict = {}
        p = info[word]
        sign_deg = 0
        for i, a in enumerate(p):
            for img, coef in differential.get(a.name, {}).items():
                left = path_name(p[:i])
                right = path_name(p[i + 1:])
                parts = [s for s in (left, img, right) if s]
                vadd(ring, out, {".".join(parts): coerce(ring, coef * (-1) ** sign_deg)})
            sign_deg += a.deg
        return out

    mu: dict = {}
    for b in basis:
        v = d_word(b.name)
        if v:
            mu[(b.name,)] = v
    for x in basis:
        for y in basis:
            w = concat(x.name, y.name)
            if w is not None:
                mu[(x.name, y.name)] = {w: coerce(ring, (-1) ** (degs[x.name] % 2))}
    return AInftyInstance(N, ring, tuple(objects), tuple(basis), mu, {}, name, d_max)


def quiver_fixture(ring: str = "Z") -> AInftyInstance:
    """Three objects, arrows a: 0->1 (deg 1), b: 1->2 (deg 0), c: 0->2 (deg 1); mu^1 = 0."""
    arrows = [Arrow("a", "0", "1", 1), Arrow("b", "1", "2", 0), Arrow("c", "0", "2", 1)]
    return path_category(["0", "1", "2"], arrows, ring=ring, name="quiver3")


def dg_chain(n: int = 3, ring: str = "Z") -> AInftyInstance:
    """Objects 0..n-1; Hom(i, i+1) spanned by u_i (deg 0) and v_i (deg 1) with mu^1 u_i = v_i."""
    objs = [str(i) for i in range(n)]
    arrows = []
    diff = {}
    for i in range(n - 1):
        arrows += [Arrow(f"u{i}", objs[i], objs[i + 1], 0), Arrow(f"v{i}", objs[i], objs[i + 1], 1)]
        diff[f"u{i}"] = {f"v{i}": 1}
    return path_category(objs, arrows, diff, ring=ring, name=f"dgchain{n}")


def complex_with_acyclic(ring: str = "Q") -> AInftyInstance:
    """One object; End spanned by e (deg 0), s (deg 1), r (deg 2) with mu^1 s = r.

    r, s multiply trivially with each other; e is a strict unit.  Cohomology is
    spanned by [e].
    """
    basis = (BasisElement("e", "X", "X", 0), BasisElement("s", "X", "X", 1),
             BasisElement("r", "X", "X", 2))
    mu = {("s",): {"r": 1}}
    for x, dg in (("e", 0), ("s", 1), ("r", 2)):
        mu[("e", x)] = {x: 1}
        if x != "e":
            mu[(x, "e")] = {x: (-1) ** dg}
    return AInftyInstance(0, ring, ("X",), basis, mu, {}, "acyclic-extension", 4)


def unit_only(ring: str = "Q") -> AInftyInstance:
    basis = (BasisElement("e", "X", "X", 0),)
    return AInftyInstance(0, ring, ("X",), basis, {("e", "e"): {"e": 1}}, {}, "ground", 4)


def inclusion_projection(ring: str = "Q") -> tuple[AFunctor, AFunctor]:
    """Strict functors ground -> acyclic-extension -> ground; mutually inverse on cohomology."""
    small, big = unit_only(ring), complex_with_acyclic(ring)
    inc = AFunctor(small, big, {"X": "X"}, {("e",): {"e": 1}}, "inc")
    proj = AFunctor(big, small, {"X": "X"}, {("e",): {"e": 1}}, "proj")
    return inc, proj


def curved_pair(ring: str = "Z") -> tuple[AInftyInstance, dict[str, int]]:
    """Objects X, Y with w = (1, 0); strict units and mu^0_Z = -w(Z) e_Z.

    Hom(X, Y) = <p (deg 0), q (deg 1)> with mu^1 p = q, mu^1 q = p, so
    mu^1 mu^1 = Id = (w(X) - w(Y)) Id.  Graded mod 2.
    """
    w = {"X": 1, "Y": 0}
    basis = (BasisElement("eX", "X", "X", 0), BasisElement("eY", "Y", "Y", 0),
             BasisElement("p", "X", "Y", 0), BasisElement("q", "X", "Y", 1))
    mu = {("p",): {"q": 1}, ("q",): {"p": 1},
          ("eX", "eX"): {"eX": 1}, ("eY", "eY"): {"eY": 1}}
    for x, dg in (("p", 0), ("q", 1)):
        mu[("eX", x)] = {x: 1}
        mu[(x, "eY")] = {x: (-1) ** dg}
    mu0 = {z: {f"e{z}": -w[z]} for z in ("X", "Y") if w[z]}
    return AInftyInstance(2, ring, ("X", "Y"), basis, mu, mu0, "curved-pair", 4), w


def default_twist(c: AInftyInstance, seed: int = 0, density: float = 0.5) -> dict:
    """Random F^2 entries (degree -1) avoiding units, for the gauge pushforward."""
    rng = random.Random(seed)
    out = {}
    for a in c.tuples(2):
        if any(x.startswith("e") and c.by_name[x].src == c.by_name[x].dst for x in a):
            continue
        objs = c.objects_along(a)
        want = c.reduce(sum(c.deg(x) for x in a) - 1)
        cands = [n for n in c.hom(objs[0], objs[-1]) if c.reduce(c.deg(n)) == want]
        if cands and rng.random() < density:
            out[a] = {rng.choice(cands): rng.choice([-2, -1, 1, 2])}
    return out


def twisted(c: AInftyInstance, seed: int = 0) -> tuple[AInftyInstance, AFunctor]:
    return pushforward(c, default_twist(c, seed))


def random_prenat(F1: AFunctor, F2: AFunctor, degree: int, seed: int = 0,
                  d_max: int = 3, with_t0: bool = True, density: float = 0.6) -> PreNat:
    rng = random.Random(seed)
    c0, c1 = F1.source, F1.target
    tables, t0 = {}, {}
    if with_t0:
        for x in c0.objects:
            cands = [n for n in c1.hom(F1.obj_map[x], F2.obj_map[x])
                     if c1.reduce(c1.deg(n)) == c1.reduce(degree)]
            v = {n: rng.randint(-2, 2) for n in cands if rng.random() < density}
            t0[x] = {k: c for k, c in v.items() if c}
    for d in range(1, d_max + 1):
        for a in c0.tuples(d):
            objs = c0.objects_along(a)
            want = c1.reduce(sum(c0.deg(x) for x in a) + degree - d)
            cands = [n for n in c1.hom(F1.obj_map[objs[0]], F2.obj_map[objs[-1]])
                     if c1.reduce(c1.deg(n)) == want]
            v = {n: rng.randint(-2, 2) for n in cands if rng.random() < density}
            v = {k: c for k, c in v.items() if c}
            if v:
                tables[a] = v
    return PreNat(F1, F2, degree, tables, t0)


# ---------------------------------------------------------------------------
# shipped fixtures


def unsigned_negative(c: AInftyInstance) -> AInftyInstance:
    """Drop the Koszul signs from mu^2; breaks the relations whenever odd elements compose."""
    mu = {k: ({n: abs(x) for n, x in v.items()} if len(k) == 2 else v) for k, v in c.mu.items()}
    return c.with_mu(mu)


def flipped_negative(c: AInftyInstance, key: tuple[str, ...]) -> AInftyInstance:
    mu = dict(c.mu)
    mu[key] = {n: -x for n, x in mu[key].items()}
    return c.with_mu(mu)


def sample_relations() -> dict:
    m0 = rel.FiniteSpace("M0", ("p", "r"))
    m1 = rel.FiniteSpace("M1", ("x", "y", "z"))
    m2 = rel.FiniteSpace("M2", ("q", "s"))
    L01 = rel.Correspondence(m0, m1, {("p", "x"), ("r", "y"), ("r", "z")}, 1, "L01")
    L12 = rel.Correspondence(m1, m2, {("x", "q"), ("y", "s"), ("z", "q")}, 2, "L12")
    bad01, bad12 = rel.non_embedded_example()
    good = rel.to_json([m0, m1, m2], [L01, L12])
    bad = rel.to_json([bad01.source, bad01.target, bad12.target], [bad01, bad12])
    return {"embedded": good, "non_embedded": bad}


def fixture_objects() -> dict:
    """Everything that is written to the fixture directory, keyed by file stem."""
    quiver = quiver_fixture()
    chain = dg_chain(4)
    twist, gauge = twisted(chain, 0)
    T = random_prenat(gauge, gauge, 0, seed=1, d_max=3, with_t0=False)
    gauge2 = homotopic_functor(gauge, T)
    curved, w = curved_pair()
    return {
        "quiver3": instance_to_json(quiver),
        "quiver3-unsigned": instance_to_json(_renamed(unsigned_negative(quiver), "quiver3-unsigned")),
        "dgchain4": instance_to_json(chain),
        "dgchain4-flipped": instance_to_json(_renamed(flipped_negative(chain, ("u0.u1",)),
                                                      "dgchain4-flipped")),
        "dgchain4-twisted": instance_to_json(_renamed(twist, "dgchain4-twisted")),
        "curved-pair": dict(instance_to_json(curved), w=w),
        "gauge": {"source": "dgchain4", "target": "dgchain4-twisted",
                  "functor": functor_to_json(AFunctor(chain, twist, gauge.obj_map, gauge.tables, "gauge"))},
        "homotopy": {"source": "dgchain4", "target": "dgchain4-twisted",
                     "F1": functor_to_json(AFunctor(chain, twist, gauge.obj_map, gauge.tables, "gauge")),
                     "F2": functor_to_json(AFunctor(chain, twist, gauge2.obj_map, gauge2.tables, "gauge~")),
                     "T": prenat_to_json(T)},
        "relations": sample_relations(),
    }


def _renamed(c: AInftyInstance, name: str) -> AInftyInstance:
    return AInftyInstance(c.N, c.ring, c.objects, c.basis, c.mu, c.mu0, name, c.d_max)


def write_fixtures(directory: str | Path = FIXTURE_DIR) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for stem, data in fixture_objects().items():
        path = directory / f"{stem}.json"
        path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def fixture_dir(directory: str | Path | None = None) -> Path:
    """--fixtures, then QUILTHEDRA_FIXTURES, then the shipped directory."""
    if directory:
        return Path(directory)
    env = os.environ.get("QUILTHEDRA_FIXTURES")
    return Path(env) if env else FIXTURE_DIR


def _read(stem: str, directory: str | Path | None) -> dict:
    path = fixture_dir(directory) / f"{stem}.json"
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_instance(stem: str, directory: str | Path | None = None) -> AInftyInstance:
    return instance_from_json(_read(stem, directory))


def load_curved(directory: str | Path | None = None) -> tuple[AInftyInstance, dict[str, int]]:
    data = _read("curved-pair", directory)
    return instance_from_json(data), {k: int(v) for k, v in data["w"].items()}


def load_functor(stem: str = "gauge", directory: str | Path | None = None) -> AFunctor:
    data = _read(stem, directory)
    src, tgt = load_instance(data["source"], directory), load_instance(data["target"], directory)
    return functor_from_json(data["functor"], src, tgt)


def load_homotopy(directory: str | Path | None = None) -> PreNat:
    data = _read("homotopy", directory)
    src, tgt = load_instance(data["source"], directory), load_instance(data["target"], directory)
    F1 = functor_from_json(data["F1"], src, tgt)
    F2 = functor_from_json(data["F2"], src, tgt)
    return prenat_from_json(data["T"], F1, F2)


def load_relations(directory: str | Path | None = None) -> dict:
    data = _read("relations", directory)
    return {k: rel.from_json(v) for k, v in data.items()}
