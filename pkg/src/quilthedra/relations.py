"""Finite-set model of correspondences.

Spaces are finite labelled sets and a correspondence is a relation between
two of them.  Widths and brane tags are carried along but never used in any
computation.
"""

from __future__ import annotations

import itertools
import json
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class RelationError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteSpace:
    label: str
    elements: tuple

    def __post_init__(self):
        if not self.elements:
            raise RelationError(f"space {self.label!r} is empty")
        if len(set(self.elements)) != len(self.elements):
            raise RelationError(f"space {self.label!r} has repeated elements")

    def __contains__(self, x) -> bool:
        return x in self.elements

    def __len__(self) -> int:
        return len(self.elements)


POINT = FiniteSpace("pt", ("*",))


def point_space(label: str = "pt") -> FiniteSpace:
    return FiniteSpace(label, ("*",))


def _width(w) -> Fraction:
    w = Fraction(w)
    if w <= 0:
        raise RelationError(f"width must be positive, got {w}")
    return w


@dataclass(frozen=True)
class Correspondence:
    source: FiniteSpace
    target: FiniteSpace
    relation: frozenset
    width: Fraction = Fraction(1)
    brane: str = "brane"
    admissibility: str = "unchecked"  # recorded, never verified

    def __post_init__(self):
        object.__setattr__(self, "relation", frozenset(self.relation))
        object.__setattr__(self, "width", _width(self.width))
        if not isinstance(self.brane, str) or not self.brane:
            raise RelationError("brane tag must be a nonempty string")
        for a, b in self.relation:
            if a not in self.source or b not in self.target:
                raise RelationError(f"pair {(a, b)} not in {self.source.label} x {self.target.label}")

    def restrict(self, pairs: Iterable) -> "Correspondence":
        pairs = frozenset(pairs)
        if not pairs <= self.relation:
            raise RelationError("restriction must be a sub-relation")
        return Correspondence(self.source, self.target, pairs, self.width, self.brane, self.admissibility)


def diagonal(space: FiniteSpace, width=1, brane: str = "diagonal") -> Correspondence:
    return Correspondence(space, space, frozenset((x, x) for x in space.elements), width, brane)


def transpose(L: Correspondence) -> Correspondence:
    return Correspondence(L.target, L.source, frozenset((b, a) for a, b in L.relation),
                          L.width, L.brane, L.admissibility)


def compose_relations(r01: Iterable, r12: Iterable) -> frozenset:
    """Relation composite {(x, z) : exists y with (x, y), (y, z)}."""
    by_mid: dict = {}
    for y, z in r12:
        by_mid.setdefault(y, []).append(z)
    return frozenset((x, z) for x, y in r01 for z in by_mid.get(y, ()))


@dataclass(frozen=True)
class Composite:
    relation: frozenset
    embedded: bool
    fiber_product_size: int
    fiber_product: tuple = field(repr=False, default=())

    def to_json(self) -> dict:
        return {"relation": sorted([list(p) for p in self.relation], key=repr),
                "embedded": self.embedded, "fiber_product_size": self.fiber_product_size}


def geometric_compose(L01: Correspondence, L12: Correspondence) -> Composite:
    """Fiber product over the middle space and its projection to the outer factors.

    `embedded` says whether the projection is injective on the fiber product.
    """
    if L01.target != L12.source:
        raise RelationError(f"cannot compose: {L01.target.label} != {L12.source.label}")
    by_mid: dict = {}
    for y, z in L12.relation:
        by_mid.setdefault(y, []).append(z)
    fiber = sorted(((x, y, z) for x, y in L01.relation for z in by_mid.get(y, ())), key=repr)
    image = frozenset((x, z) for x, _, z in fiber)
    return Composite(image, len(image) == len(fiber), len(fiber), tuple(fiber))


def composed_correspondence(L01: Correspondence, L12: Correspondence, width=None,
                            brane: str | None = None) -> Correspondence:
    c = geometric_compose(L01, L12)
    return Correspondence(L01.source, L12.target, c.relation,
                          L01.width if width is None else width,
                          brane or f"{L01.brane}*{L12.brane}")


@dataclass(frozen=True)
class GeneralizedCorrespondence:
    """A chain of correspondences with widths between consecutive entries.

    The empty chain lives on a single space (start == end).
    """
    start: FiniteSpace
    end: FiniteSpace
    entries: tuple = ()
    widths: tuple = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        widths = tuple(_width(w) for w in self.widths)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "widths", widths)
        if not entries:
            if self.start != self.end:
                raise RelationError("empty chain needs equal endpoints")
            if widths:
                raise RelationError("empty chain carries no widths")
            return
        if entries[0].source != self.start or entries[-1].target != self.end:
            raise RelationError("chain endpoints do not match its entries")
        for a, b in zip(entries, entries[1:]):
            if a.target != b.source:
                raise RelationError(f"chain breaks between {a.target.label} and {b.source.label}")
        if len(widths) != len(entries) - 1:
            raise RelationError("need one width between each pair of consecutive entries")

    def __len__(self) -> int:
        return len(self.entries)

    @staticmethod
    def empty(space: FiniteSpace) -> "GeneralizedCorrespondence":
        return GeneralizedCorrespondence(space, space)

    @staticmethod
    def single(L: Correspondence) -> "GeneralizedCorrespondence":
        return GeneralizedCorrespondence(L.source, L.target, (L,))

    @staticmethod
    def chain(entries: Sequence[Correspondence], widths: Sequence | None = None) -> "GeneralizedCorrespondence":
        if not entries:
            raise RelationError("use GeneralizedCorrespondence.empty for the empty chain")
        if widths is None:
            widths = [e.width for e in entries[1:]]
        return GeneralizedCorrespondence(entries[0].source, entries[-1].target, tuple(entries), tuple(widths))


def concatenate(Lplus: GeneralizedCorrespondence, Lminus: GeneralizedCorrespondence,
                eps=1) -> GeneralizedCorrespondence:
    """Lplus followed by Lminus, joined by width eps when both are nonempty."""
    if Lplus.end != Lminus.start:
        raise RelationError(f"cannot concatenate: {Lplus.end.label} != {Lminus.start.label}")
    if not Lplus.entries:
        return Lminus
    if not Lminus.entries:
        return Lplus
    return GeneralizedCorrespondence(Lplus.start, Lminus.end, Lplus.entries + Lminus.entries,
                                     Lplus.widths + (_width(eps),) + Lminus.widths)


def total_relation(L: GeneralizedCorrespondence) -> frozenset:
    rel = frozenset((x, x) for x in L.start.elements)
    for entry in L.entries:
        rel = compose_relations(rel, entry.relation)
    return rel


def phi_on_objects(L, brane: GeneralizedCorrespondence) -> GeneralizedCorrespondence:
    """Object map of the functor of L (a correspondence or a chain): append L."""
    chain = GeneralizedCorrespondence.single(L) if isinstance(L, Correspondence) else L
    if not chain.entries:
        if brane.end != chain.start:
            raise RelationError(f"brane ends in {brane.end.label}, expected {chain.start.label}")
        return brane
    return concatenate(brane, chain, chain.entries[0].width)


def replace_adjacent(L: GeneralizedCorrespondence, i: int) -> tuple[GeneralizedCorrespondence, bool]:
    """Replace entries i, i+1 by their geometric composite; also report embeddedness."""
    if not 0 <= i < len(L.entries) - 1:
        raise RelationError(f"no adjacent pair at {i}")
    a, b = L.entries[i], L.entries[i + 1]
    comp = geometric_compose(a, b)
    merged = composed_correspondence(a, b)
    entries = L.entries[:i] + (merged,) + L.entries[i + 2:]
    widths = L.widths[:i] + L.widths[i + 1:]
    return GeneralizedCorrespondence(L.start, L.end, entries, widths), comp.embedded


# ---------------------------------------------------------------------------
# enumeration helpers


def all_relations(source: FiniteSpace, target: FiniteSpace) -> Iterable[frozenset]:
    pairs = list(itertools.product(source.elements, target.elements))
    for mask in range(1 << len(pairs)):
        yield frozenset(p for k, p in enumerate(pairs) if mask >> k & 1)


def _composition_table(n: int) -> list[tuple[int, ...]]:
    """table[r][s] = index of r o s, relations on n x n encoded as bitmasks."""
    pairs = list(itertools.product(range(n), range(n)))
    code = {p: k for k, p in enumerate(pairs)}
    rels = [frozenset(p for k, p in enumerate(pairs) if mask >> k & 1) for mask in range(1 << len(pairs))]
    table = []
    for r in rels:
        row = []
        for s_ in rels:
            row.append(sum(1 << code[p] for p in compose_relations(r, s_)))
        table.append(tuple(row))
    return table


def check_composition_associative(size: int) -> dict:
    """Brute force (R01 R12) R23 == R01 (R12 R23) over all relations on `size`-element sets."""
    table = _composition_table(size)
    count = len(table)
    checked, failures = 0, []
    for r01 in range(count):
        row01 = table[r01]
        for r12 in range(count):
            left = table[row01[r12]]
            right = operator.itemgetter(*table[r12])(row01) if count > 1 else (row01[table[r12][0]],)
            checked += count
            if left != tuple(right):
                bad = next(r23 for r23 in range(count) if left[r23] != right[r23])
                failures.append([r01, r12, bad])
    return {"size": size, "checked": checked, "failures": failures}


# ---------------------------------------------------------------------------
# JSON


def to_json(spaces: Sequence[FiniteSpace], correspondences: Sequence[Correspondence]) -> dict:
    return {"spaces": [{"label": s.label, "elements": list(s.elements)} for s in spaces],
            "correspondences": [{"src": c.source.label, "dst": c.target.label,
                                 "pairs": sorted([list(p) for p in c.relation], key=repr),
                                 "width": str(c.width), "brane": c.brane}
                                for c in correspondences]}


def from_json(data: Mapping | str) -> tuple[dict[str, FiniteSpace], list[Correspondence]]:
    if isinstance(data, str):
        data = json.loads(data)
    spaces = {s["label"]: FiniteSpace(s["label"], tuple(s["elements"])) for s in data["spaces"]}
    out = []
    for c in data["correspondences"]:
        try:
            src, dst = spaces[c["src"]], spaces[c["dst"]]
        except KeyError as exc:
            raise RelationError(f"unknown space {exc.args[0]!r}") from None
        out.append(Correspondence(src, dst, frozenset(tuple(p) for p in c["pairs"]),
                                  Fraction(c.get("width", 1)), c.get("brane", "brane")))
    return spaces, out


def non_embedded_example() -> tuple[Correspondence, Correspondence]:
    """Two fiber points over one image point."""
    m0, m1, m2 = FiniteSpace("M0", ("p",)), FiniteSpace("M1", ("x", "y")), FiniteSpace("M2", ("q",))
    L01 = Correspondence(m0, m1, {("p", "x"), ("p", "y")}, 1, "L01")
    L12 = Correspondence(m1, m2, {("x", "q"), ("y", "q")}, 1, "L12")
    return L01, L12
