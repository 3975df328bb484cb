"""Face posets of the associahedron, multiplihedron, seam and bimultiplihedron families."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .gluing import stratum_codim
from .trees import (Leaf, Node, Tree, TreeError, dimension, enumerate_trees,
                    refines, validate)

FACET_TAGS = {
    "stable": ("two-vertex",),
    "colored": ("unquilted-bubble", "quilted-bubbles"),
    "seam": ("boundary-parenthesis", "seam-parenthesis", "h-product"),
    "bicolored": ("once-quilted-bubbles", "unquilted-bubble", "biquilted-bubbles",
                  "seams-together"),
}
RATIO_STRATA = ("zero", "finite", "infinite", "mixed-boundary")


class PosetError(ValueError):
    pass


@dataclass(frozen=True)
class FacePoset:
    family: str
    d: int
    e: int
    dim: int
    faces: tuple[Tree, ...]
    dims: tuple[int, ...]
    covers: tuple[tuple[int, int], ...] | None

    def index(self, tree: Tree) -> int:
        return self._lookup()[tree]

    def _lookup(self) -> dict[Tree, int]:
        return _index_table(self)

    @property
    def top(self) -> int:
        return self.dims.index(self.dim)

    def facets(self) -> list[int]:
        return [i for i, k in enumerate(self.dims) if k == self.dim - 1]

    def vertices(self) -> list[int]:
        return [i for i, k in enumerate(self.dims) if k == 0]

    def to_json(self) -> dict:
        faces = []
        for i, (t, k) in enumerate(zip(self.faces, self.dims)):
            entry = {"id": i, "tree": t.to_json(), "dim": k}
            if k == self.dim - 1:
                entry["facet_tag"] = facet_tag(t)
            faces.append(entry)
        return {"family": self.family, "d": self.d, "e": self.e, "dim": self.dim,
                "faces": faces, "covers": [list(c) for c in (self.covers or ())]}

    def to_dot(self) -> str:
        lines = [f'digraph "{self.family}_{self.d}_{self.e}" {{', "  rankdir=BT;"]
        for i, t in enumerate(self.faces):
            lines.append(f'  n{i} [label="{t.expression() or "top"}\\ndim {self.dims[i]}"];')
        for lo, hi in self.covers or ():
            lines.append(f"  n{lo} -> n{hi};")
        lines.append("}")
        return "\n".join(lines) + "\n"


_INDEX: dict[int, dict[Tree, int]] = {}


def _index_table(p: FacePoset) -> dict[Tree, int]:
    key = id(p)
    if key not in _INDEX:
        _INDEX[key] = {t: i for i, t in enumerate(p.faces)}
    return _INDEX[key]


def face_dim(tree: Tree) -> int:
    return dimension(tree.family, tree.d, tree.e) - stratum_codim(tree)


def _edge_signature(tree: Tree) -> Counter:
    return Counter(tree.leafset(c) for _, c in tree.finite_edges())


@lru_cache(maxsize=None)
def build_face_poset(family: str, d: int, e: int = 0, covers: bool = True) -> FacePoset:
    """Faces with their dimensions; covers computed from edge contraction."""
    faces = enumerate_trees(family, d, e)
    top = dimension(family, d, e)
    dims = tuple(top - stratum_codim(t) for t in faces)
    cover_list = None
    if covers:
        sigs = [_edge_signature(t) for t in faces]
        by_dim: dict[int, list[int]] = {}
        for i, k in enumerate(dims):
            by_dim.setdefault(k, []).append(i)
        cover_list = []
        for i, k in enumerate(dims):
            for j in by_dim.get(k + 1, []):
                if sigs[j] - sigs[i]:
                    continue
                if refines(faces[i], faces[j]):
                    cover_list.append((i, j))
        cover_list = tuple(cover_list)
    return FacePoset(family, d, e, top, faces, dims, cover_list)


def f_vector(p: FacePoset) -> tuple[int, ...]:
    c = Counter(p.dims)
    return tuple(c.get(k, 0) for k in range(p.dim + 1))


def euler_check(p: FacePoset) -> bool:
    return sum((-1) ** k for k in p.dims) == 1


def is_graded(p: FacePoset) -> bool:
    """Every face below the top lies under a cover chain of unit steps."""
    if p.covers is None:
        raise PosetError("poset built without covers")
    up: dict[int, list[int]] = {}
    for lo, hi in p.covers:
        up.setdefault(lo, []).append(hi)
    top = p.top
    for i, k in enumerate(p.dims):
        if k != p.dim and not up.get(i):
            return False
    # unit steps are enforced by construction; check every chain reaches the top
    seen = {top}
    frontier = [top]
    down: dict[int, list[int]] = {}
    for lo, hi in p.covers:
        down.setdefault(hi, []).append(lo)
    while frontier:
        nxt = []
        for x in frontier:
            for y in down.get(x, []):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(seen) == len(p.faces) and p.dims.count(p.dim) == 1


def _leaf_only(node) -> bool:
    return isinstance(node, Node) and all(isinstance(x, Leaf) for x in node.items())


def facet_tag(tree: Tree) -> str:
    """Facet family of a codimension-one type; anything else is a hard error."""
    r = tree.root
    kids = [x for x in r.children if isinstance(x, Node)]
    seam_nodes = [x for x in r.seam if isinstance(x, Node)]
    fam = tree.family
    tag = None
    if fam == "stable":
        if len(tree.vertices()) == 2:
            tag = "two-vertex"
    elif fam == "colored":
        if r.kind == "C" and len(kids) == 1 and kids[0].kind == "U" and _leaf_only(kids[0]):
            tag = "unquilted-bubble"
        elif r.kind == "U" and len(r.children) >= 2 and all(
                isinstance(x, Node) and x.kind == "C" and _leaf_only(x) for x in r.children):
            tag = "quilted-bubbles"
    elif fam == "seam":
        if r.kind == "C" and len(kids) == 1 and not seam_nodes and _leaf_only(kids[0]):
            tag = "boundary-parenthesis"
        elif r.kind == "C" and len(seam_nodes) == 1 and not kids and _leaf_only(seam_nodes[0]):
            tag = "seam-parenthesis"
        elif r.kind == "U" and all(
                isinstance(x, Node) and x.kind == "C" and _leaf_only(x) for x in r.children):
            tag = "h-product"
    else:
        if r.kind == "C1" and r.children and all(
                isinstance(x, Node) and x.kind == "C2" and _leaf_only(x) for x in r.children):
            tag = "once-quilted-bubbles"
        elif r.kind == "B" and len(kids) == 1 and kids[0].kind == "U" and _leaf_only(kids[0]):
            tag = "unquilted-bubble"
        elif r.kind == "U" and all(
                isinstance(x, Node) and x.kind == "B" and _leaf_only(x) for x in r.children):
            tag = "biquilted-bubbles"
        elif r.kind == "Z" and _leaf_only(r):
            tag = "seams-together"
    if tag is None or stratum_codim(tree) != 1:
        raise PosetError(f"{tree} is not a recognised facet of the {fam} family")
    return tag


def codim_tag_mismatches(p: FacePoset) -> list[str]:
    """Faces where "codimension one" and "carries a facet tag" disagree."""
    bad = []
    for t in p.faces:
        try:
            facet_tag(t)
            tagged = True
        except PosetError:
            tagged = False
        if tagged != (stratum_codim(t) == 1):
            bad.append(t.expression())
    return bad


def facet_families(p: FacePoset) -> dict[str, int]:
    out = {t: 0 for t in FACET_TAGS[p.family]}
    for i in p.facets():
        out[facet_tag(p.faces[i])] += 1
    return out


def facet_factors(tree: Tree) -> dict:
    """Product (or fiber-product) decomposition of a bimultiplihedron facet.

    Factors are written as (family, d) pairs; `shared_ratio_constraints`
    counts the equal-ratio conditions of the fiber product.
    """
    tag = facet_tag(tree)
    r = tree.root
    if tag == "once-quilted-bubbles":
        sizes = [len(x.children) for x in r.children]
        factors = [("colored", i) for i in sizes] + [("colored", len(sizes))]
        return {"tag": tag, "factors": factors, "shared_ratio_constraints": 0}
    if tag == "unquilted-bubble":
        bub = next(x for x in r.children if isinstance(x, Node))
        j = len(bub.children)
        return {"tag": tag, "factors": [("stable", j), ("bicolored", tree.d - j + 1)],
                "shared_ratio_constraints": 0}
    if tag == "biquilted-bubbles":
        sizes = [len(x.children) for x in r.children]
        return {"tag": tag, "factors": [("bicolored", i) for i in sizes] + [("stable", len(sizes))],
                "shared_ratio_constraints": len(sizes) - 1}
    return {"tag": tag, "factors": [("colored", tree.d)], "shared_ratio_constraints": 0}


def ratio_stratum(tree: Tree) -> str:
    if tree.family != "bicolored":
        raise PosetError("ratio strata are defined for the bicolored family only")
    return tree.ratio_class


# ---------------------------------------------------------------------------
# forgetful maps


def _forget(item, side: str, index: int):
    """Drop one leaf, collapse unstable vertices, shift later labels down."""
    if isinstance(item, Leaf):
        if item.side == side and item.index == index:
            return None
        if item.side == side and item.index > index:
            return Leaf(side, item.index - 1)
        return item
    kids = tuple(y for y in (_forget(x, side, index) for x in item.children) if y is not None)
    seam = tuple(y for y in (_forget(x, side, index) for x in item.seam) if y is not None)
    n = len(kids) + len(seam)
    if n == 0:
        return None
    if item.kind in ("U", "S") and n == 1:
        return (kids + seam)[0]
    return Node(item.kind, kids, seam)


def forget_leaf(tree: Tree, side: str, index: int) -> Tree:
    d, e = (tree.d - 1, tree.e) if side == "a" else (tree.d, tree.e - 1)
    n = tree.d if side == "a" else tree.e
    if not 1 <= index <= n:
        raise PosetError(f"no leaf {side}{index}")
    minimum = {"stable": 3, "colored": 2, "bicolored": 2, "seam": 2}[tree.family]
    if side == "a" and tree.d < minimum:
        raise PosetError(f"cannot forget below d={minimum - 1} in the {tree.family} family")
    root = _forget(tree.root, side, index)
    if isinstance(root, Leaf) or root is None:
        raise PosetError("forgetting leaves no vertex")
    return validate(Tree(tree.family, d, e, root))


def forget_marking(p: FacePoset, face: int | Tree, i: int) -> Tree:
    t = p.faces[face] if isinstance(face, int) else face
    return forget_leaf(t, "a", i)


def forget_seam(p: FacePoset, face: int | Tree, j: int) -> Tree:
    t = p.faces[face] if isinstance(face, int) else face
    if t.family != "seam":
        raise PosetError("seam markings exist only in the seam family")
    return forget_leaf(t, "t", j)
