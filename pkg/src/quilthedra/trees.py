"""Combinatorial types of the four tree families.

A tree is stored as a nested planar structure.  Every vertex is a `Node`
with a kind tag:

    U   unquilted disk (uncolored)
    C   quilted disk (colored, one seam)
    C1  outer quilted disk (colored by the first seam only)
    C2  inner quilted disk (colored by the second seam only)
    B   biquilted disk (both seams, finite ratio)
    Z   biquilted disk whose seams coincide (ratio zero)
    S   quilted sphere carrying seam markings

A quilted disk of the seam family keeps its boundary items in `children`
and its seam items in `seam`.  Boundary leaves are a1..ad, seam leaves
t1..te.  Leaf order fixes the planar structure, so the nested tuple is
already a canonical form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Union

FAMILIES = ("stable", "colored", "bicolored", "seam")

KIND_NAMES = {
    "U": "unquilted",
    "C": "quilted",
    "C1": "quilted-outer",
    "C2": "quilted-inner",
    "B": "biquilted",
    "Z": "biquilted-zero",
    "S": "quilted-sphere",
}

_COLORS = {
    "U": frozenset(),
    "C": frozenset("c"),
    "C1": frozenset("1"),
    "C2": frozenset("2"),
    "B": frozenset("12"),
    "Z": frozenset("12z"),
    "S": frozenset("s"),
}
_FROM_COLORS = {v: k for k, v in _COLORS.items()}
_FROM_COLORS[frozenset("cs")] = "C"


class TreeError(ValueError):
    """Invalid tree, contraction or expression."""


@dataclass(frozen=True)
class Leaf:
    side: str  # "a" boundary marking, "t" seam marking
    index: int

    @property
    def label(self) -> str:
        return f"{self.side}{self.index}"


@dataclass(frozen=True)
class Node:
    kind: str
    children: tuple = ()
    seam: tuple = ()

    def __post_init__(self):
        # subtrees are shared between enumerated trees; caching the hash keeps
        # per-node memo tables O(1) per lookup
        object.__setattr__(self, "_hash", hash((self.kind, self.children, self.seam)))

    def __hash__(self) -> int:
        return self._hash

    def items(self) -> tuple:
        """Seam items first, then boundary items (the order used for ids)."""
        return self.seam + self.children


Item = Union[Leaf, Node]


@dataclass(frozen=True)
class Vertex:
    id: int
    node: Node
    parent: int | None
    depth: int


@dataclass(frozen=True)
class Tree:
    family: str
    d: int
    e: int
    root: Node

    # -- traversal -------------------------------------------------------
    def vertices(self) -> list[Vertex]:
        return _vertices(self.root)

    def finite_edges(self) -> list[tuple[int, int]]:
        return [(v.parent, v.id) for v in self.vertices() if v.parent is not None]

    def leaves(self) -> list[tuple[str, int]]:
        """(label, vertex id) for each leaf, in traversal order."""
        out = []
        for v in self.vertices():
            out.extend((x.label, v.id) for x in v.node.items() if isinstance(x, Leaf))
        return out

    def valence(self, vid: int) -> int:
        v = self.vertices()[vid]
        return len(v.node.items()) + 1

    def colored(self, color: str = "c") -> list[int]:
        """Ids of vertices carrying the given color ("c", "1" or "2")."""
        return [v.id for v in self.vertices() if color in _COLORS[v.node.kind]]

    def leafset(self, vid: int) -> frozenset[str]:
        return _leafset(self.vertices()[vid].node)

    @property
    def ratio_class(self) -> str:
        """Global ratio class of a bicolored tree: zero, finite or infinite."""
        kinds = {v.node.kind for v in self.vertices()}
        if "Z" in kinds:
            return "zero"
        if kinds & {"C1", "C2"}:
            return "infinite"
        return "finite"

    def expression(self, style: str = "canonical") -> str:
        return to_expression(self, style)

    def __str__(self) -> str:
        return self.expression()

    def to_json(self) -> dict:
        verts = self.vertices()
        return {
            "family": self.family,
            "d": self.d,
            "e": self.e,
            "vertices": [
                {"id": v.id, "kind": KIND_NAMES[v.node.kind],
                 "colored": sorted(_COLORS[v.node.kind] - {"s"})}
                for v in verts
            ],
            "edges": [list(e) for e in self.finite_edges()],
            "leaves": [{"label": lab, "vertex": vid} for lab, vid in self.leaves()],
            "expression": self.expression(),
        }


def _vertices(root: Node) -> list[Vertex]:
    out: list[Vertex] = []

    def walk(node: Node, parent: int | None, depth: int) -> None:
        vid = len(out)
        out.append(Vertex(vid, node, parent, depth))
        for x in node.items():
            if isinstance(x, Node):
                walk(x, vid, depth + 1)

    walk(root, None, 0)
    return out


def _leafset(item: Item) -> frozenset[str]:
    if isinstance(item, Leaf):
        return frozenset([item.label])
    return frozenset().union(*(_leafset(x) for x in item.items()))


def _leaf_labels(item: Item) -> Iterator[Leaf]:
    if isinstance(item, Leaf):
        yield item
    else:
        for x in item.items():
            yield from _leaf_labels(x)


def dimension(family: str, d: int, e: int = 0) -> int:
    """Dimension of the top cell of the family."""
    return {"stable": d - 2, "colored": d - 1, "bicolored": d, "seam": d + e - 1}[family]


# ---------------------------------------------------------------------------
# validation


def violations(tree: Tree) -> list[str]:
    """Every invariant of the tree's family that fails, as readable messages."""
    fam = tree.family
    out: list[str] = []
    if fam not in FAMILIES:
        return [f"unknown family {fam!r}"]
    kinds_ok = {
        "stable": {"U"},
        "colored": {"U", "C"},
        "bicolored": {"U", "C1", "C2", "B", "Z"},
        "seam": {"U", "C", "S"},
    }[fam]
    steps = {("C1", 0): 1, ("C2", 1): 2, ("B", 0): 2, ("Z", 0): 2, ("C", 0): 2}
    final = 0 if fam == "stable" else 2

    def visit(node: Node, state: int, on_seam: bool) -> None:
        k = node.kind
        if k not in kinds_ok:
            out.append(f"vertex kind {k} not allowed in the {fam} family")
            return
        n = len(node.items())
        if k in ("U", "S") and n < 2:
            out.append(f"{KIND_NAMES[k]} vertex with {n} children is unstable")
        if k not in ("U", "S") and n < 1:
            out.append(f"{KIND_NAMES[k]} vertex without children")
        if on_seam != (k == "S"):
            out.append(f"{KIND_NAMES[k]} vertex " + ("on a seam" if on_seam else "off the seam"))
        if node.seam and k != "C":
            out.append(f"seam items attached to a {KIND_NAMES[k]} vertex")
        if k not in ("U", "S"):
            if (k, state) not in steps:
                out.append("a path crosses colored vertices out of order or twice")
                return
            state = steps[(k, state)]
        for x in node.seam:
            if isinstance(x, Leaf):
                if x.side != "t":
                    out.append(f"boundary leaf {x.label} on a seam")
            else:
                visit(x, state, True)
        for x in node.children:
            if isinstance(x, Leaf):
                if (x.side == "t") != (k == "S"):
                    out.append(f"leaf {x.label} attached to a {KIND_NAMES[k]} vertex")
                elif x.side == "a" and state != final:
                    out.append(f"leaf {x.label} is not governed by exactly one colored vertex per seam")
            else:
                visit(x, state, k == "S")

    root = tree.root
    if not isinstance(root, Node):
        return ["root must be a vertex"]
    visit(root, 0, False)
    if fam == "bicolored":
        kinds = {v.node.kind for v in _vertices(root)}
        classes = [c for c, ks in (("zero", {"Z"}), ("finite", {"B"}),
                                    ("infinite", {"C1", "C2"})) if kinds & ks]
        if len(classes) > 1:
            out.append("mixes ratio classes " + "/".join(classes))
    labels = list(_leaf_labels(root))
    a = [x.index for x in labels if x.side == "a"]
    t = [x.index for x in labels if x.side == "t"]
    for side, idx, n in (("a", a, tree.d), ("t", t, tree.e)):
        missing = sorted(set(range(1, n + 1)) - set(idx))
        extra = sorted(set(i for i in idx if not 1 <= i <= n))
        dup = sorted({i for i in idx if idx.count(i) > 1})
        if missing:
            out.append("missing " + ",".join(f"{side}{i}" for i in missing))
        if extra:
            out.append("unexpected " + ",".join(f"{side}{i}" for i in extra))
        if dup:
            out.append("repeated " + ",".join(f"{side}{i}" for i in dup))
        if not (missing or extra or dup) and idx != sorted(idx):
            out.append(f"{'boundary' if side == 'a' else 'seam'} leaves out of planar order")
    if fam != "seam" and t:
        out.append("seam leaves outside the seam family")
    return out


def validate(tree: Tree) -> Tree:
    bad = violations(tree)
    if bad:
        raise TreeError("; ".join(dict.fromkeys(bad)))
    return tree


# ---------------------------------------------------------------------------
# enumeration


def _splits(lo: int, hi: int, min_parts: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Cuts of the interval lo..hi into at least min_parts nonempty blocks."""
    n = hi - lo + 1
    for k in range(max(min_parts, 1), n + 1):
        for cuts in combinations(range(lo + 1, hi + 1), k - 1):
            bounds = (lo,) + cuts + (hi + 1,)
            yield tuple((bounds[i], bounds[i + 1] - 1) for i in range(k))


def _weak_splits(lo: int, hi: int, parts: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Cuts of lo..hi into exactly `parts` consecutive, possibly empty blocks."""
    if parts == 1:
        yield ((lo, hi),)
        return
    for first in range(lo - 1, hi + 1):
        for rest in _weak_splits(first + 1, hi, parts - 1):
            yield ((lo, first),) + rest


def _pair_splits(a: tuple[int, int], t: tuple[int, int], min_parts: int):
    """Split boundary and seam intervals jointly; every part gets some item."""
    total = (a[1] - a[0] + 1) + (t[1] - t[0] + 1)
    for k in range(max(min_parts, 1), total + 1):
        for asp in _weak_splits(a[0], a[1], k):
            for tsp in _weak_splits(t[0], t[1], k):
                if all((x[1] - x[0]) + (y[1] - y[0]) + 2 > 0 for x, y in zip(asp, tsp)):
                    yield tuple(zip(asp, tsp))


@lru_cache(maxsize=None)
def _bubbles(lo: int, hi: int) -> tuple[Item, ...]:
    """Leaf or unquilted bubble tree over boundary leaves lo..hi."""
    if lo == hi:
        return (Leaf("a", lo),)
    out = []
    for blocks in _splits(lo, hi, 2):
        for kids in product(*(_bubbles(x, y) for x, y in blocks)):
            out.append(Node("U", kids))
    return tuple(out)


@lru_cache(maxsize=None)
def _spheres(lo: int, hi: int) -> tuple[Item, ...]:
    if lo == hi:
        return (Leaf("t", lo),)
    out = []
    for blocks in _splits(lo, hi, 2):
        for kids in product(*(_spheres(x, y) for x, y in blocks)):
            out.append(Node("S", kids))
    return tuple(out)


@lru_cache(maxsize=None)
def _layer(kind: str, lo: int, hi: int) -> tuple[Node, ...]:
    """Quilted vertices of the given kind over lo..hi, with bubbles below."""
    out = []
    if kind == "C1":
        for blocks in _splits(lo, hi, 1):
            for kids in product(*(_between(x, y) for x, y in blocks)):
                out.append(Node("C1", kids))
        return tuple(out)
    for blocks in _splits(lo, hi, 1):
        for kids in product(*(_bubbles(x, y) for x, y in blocks)):
            out.append(Node(kind, kids))
    return tuple(out)


@lru_cache(maxsize=None)
def _between(lo: int, hi: int) -> tuple[Node, ...]:
    """Items strictly between the outer and inner seam layers."""
    out = list(_layer("C2", lo, hi))
    for blocks in _splits(lo, hi, 2):
        for kids in product(*(_between(x, y) for x, y in blocks)):
            out.append(Node("U", kids))
    return tuple(out)


@lru_cache(maxsize=None)
def _above(kind: str, lo: int, hi: int) -> tuple[Node, ...]:
    out = list(_layer(kind, lo, hi))
    for blocks in _splits(lo, hi, 2):
        for kids in product(*(_above(kind, x, y) for x, y in blocks)):
            out.append(Node("U", kids))
    return tuple(out)


@lru_cache(maxsize=None)
def _seam_disks(a: tuple[int, int], t: tuple[int, int]) -> tuple[Node, ...]:
    na, nt = a[1] - a[0] + 1, t[1] - t[0] + 1
    a_opts = [()] if na == 0 else [
        kids for blocks in _splits(a[0], a[1], 1)
        for kids in product(*(_bubbles(x, y) for x, y in blocks))]
    t_opts = [()] if nt == 0 else [
        kids for blocks in _splits(t[0], t[1], 1)
        for kids in product(*(_spheres(x, y) for x, y in blocks))]
    return tuple(Node("C", ak, tk) for ak in a_opts for tk in t_opts)


@lru_cache(maxsize=None)
def _seam_above(a: tuple[int, int], t: tuple[int, int]) -> tuple[Node, ...]:
    out = list(_seam_disks(a, t))
    for parts in _pair_splits(a, t, 2):
        for kids in product(*(_seam_above(x, y) for x, y in parts)):
            out.append(Node("U", kids))
    return tuple(out)


def _check_range(family: str, d: int, e: int) -> None:
    if family not in FAMILIES:
        raise TreeError(f"unknown family {family!r}")
    if family == "stable" and d < 2:
        raise TreeError("the stable family needs d >= 2")
    if d < 1:
        raise TreeError("d must be at least 1")
    if e < 0 or (e and family != "seam"):
        raise TreeError("e must be 0 outside the seam family and nonnegative inside it")


@lru_cache(maxsize=None)
def node_size(node: Node) -> int:
    """Number of vertices in the subtree below (and including) node."""
    return 1 + sum(node_size(x) for x in node.items() if isinstance(x, Node))


def _sort_key(tree: Tree):
    return (-node_size(tree.root), tree.expression())


@lru_cache(maxsize=None)
def enumerate_trees(family: str, d: int, e: int = 0) -> tuple[Tree, ...]:
    """Every combinatorial type of the family, once, in a fixed order."""
    _check_range(family, d, e)
    if family == "stable":
        roots = [r for r in _bubbles(1, d)]
    elif family == "colored":
        roots = list(_above("C", 1, d))
    elif family == "bicolored":
        roots = list(_above("B", 1, d)) + list(_above("Z", 1, d)) + list(_above("C1", 1, d))
    else:
        roots = list(_seam_above((1, d), (1, e)))
    trees = [Tree(family, d, e, r) for r in roots]
    return tuple(sorted(trees, key=_sort_key))


def enumerate(family: str, d: int, e: int = 0) -> tuple[Tree, ...]:  # noqa: A001
    return enumerate_trees(family, d, e)


def canonical(tree: Tree) -> Tree:
    """Re-canonicalize by round-tripping through the expression grammar."""
    return parse_expression(to_expression(tree), tree.family)


# ---------------------------------------------------------------------------
# contraction and refinement


def _merge_kind(kinds: Iterable[str]) -> str:
    cols = frozenset().union(*(_COLORS[k] for k in kinds))
    if cols not in _FROM_COLORS:
        raise TreeError("contraction merges incompatible vertex kinds " + ",".join(sorted(kinds)))
    return _FROM_COLORS[cols]


def _edge_children(tree: Tree, edges) -> set[int]:
    verts = tree.vertices()
    out = set()
    for e in edges:
        c = e[1] if isinstance(e, tuple) or isinstance(e, list) else e
        if not (0 < c < len(verts)):
            raise TreeError(f"{e} is not a finite edge")
        if isinstance(e, (tuple, list)) and verts[c].parent != e[0]:
            raise TreeError(f"{tuple(e)} is not a finite edge")
        out.add(c)
    return out


def contract_edges(tree: Tree, edges) -> Tree:
    """Collapse a set of finite edges at once; invalid results raise TreeError."""
    chosen = _edge_children(tree, edges)
    next_id = [0]

    def rebuild(node: Node) -> tuple[list, list, list[str]]:
        next_id[0] += 1
        kids: list = []
        seam: list = []
        kinds = [node.kind]
        for on_seam, items in ((True, node.seam), (False, node.children)):
            for x in items:
                if isinstance(x, Leaf):
                    (seam if on_seam else kids).append(x)
                    continue
                vid = next_id[0]
                ckids, cseam, ckinds = rebuild(x)
                if vid in chosen:
                    kinds.extend(ckinds)
                    if on_seam:
                        seam.extend(cseam + ckids)
                    else:
                        kids.extend(ckids)
                        seam.extend(cseam)
                else:
                    child = Node(_merge_kind(ckinds), tuple(ckids), tuple(cseam))
                    (seam if on_seam else kids).append(child)
        return kids, seam, kinds

    kids, seam, kinds = rebuild(tree.root)
    new = Tree(tree.family, tree.d, tree.e, Node(_merge_kind(kinds), tuple(kids), tuple(seam)))
    bad = violations(new)
    if bad:
        raise TreeError("contraction breaks the family invariants: " + "; ".join(dict.fromkeys(bad)))
    return new


def contract_edge(tree: Tree, edge) -> Tree:
    """Collapse one finite edge; edge is a (parent, child) id pair or a child id."""
    return contract_edges(tree, [edge])


def clear_zero(tree: Tree) -> Tree:
    """Forget that the two seams coincide (Z vertices become B vertices)."""
    def go(item: Item) -> Item:
        if isinstance(item, Leaf):
            return item
        return Node("B" if item.kind == "Z" else item.kind,
                    tuple(go(x) for x in item.children), tuple(go(x) for x in item.seam))
    return Tree(tree.family, tree.d, tree.e, go(tree.root))


def refinement_edges(fine: Tree, coarse: Tree) -> frozenset[int] | None:
    """Child ids of the edges of `fine` whose collapse gives `coarse`, or None."""
    if (fine.family, fine.d, fine.e) != (coarse.family, coarse.d, coarse.e):
        raise TreeError("refinement compares trees of different families or sizes")
    fe = fine.finite_edges()
    ce = coarse.finite_edges()
    if len(ce) > len(fe):
        return None
    if fine.family == "bicolored":
        fc, cc = fine.ratio_class, coarse.ratio_class
        if fc != cc and cc != "finite":
            return None
    f_sets: dict[frozenset, list[int]] = {}
    for _, c in fe:
        f_sets.setdefault(fine.leafset(c), []).append(c)
    need: dict[frozenset, int] = {}
    for _, c in ce:
        key = coarse.leafset(c)
        need[key] = need.get(key, 0) + 1
    choices = []
    for key, n in need.items():
        pool = f_sets.get(key, [])
        if len(pool) < n:
            return None
        choices.append(list(combinations(pool, n)))
    target = coarse
    all_children = {c for _, c in fe}
    for pick in product(*choices):
        keep = {c for group in pick for c in group}
        drop = frozenset(all_children - keep)
        try:
            got = contract_edges(fine, drop)
        except TreeError:
            continue
        if got == target or (got.family == "bicolored" and clear_zero(got) == target
                             and got.ratio_class == "zero"):
            return drop
    return None


def refines(t1: Tree, t2: Tree) -> bool:
    """True iff t2 arises from t1 by collapsing edges (t1 is a face of t2)."""
    return refinement_edges(t1, t2) is not None


# ---------------------------------------------------------------------------
# expressions
#
# Juxtaposition lists siblings, "(...)" is an unquilted vertex (a sphere on
# the seam side), "h(...)" a quilted disk, "h(t-items/a-items)" a quilted
# disk with seam markings, "h1(", "h2(", "h1h2(" and "(h1h2)(" the outer,
# inner, biquilted and zero-ratio vertices.  A top level holding a single
# vertex term is that vertex; otherwise the top level is an unquilted root.
#
# The "bracket" style writes a colored vertex with a single unquilted child
# as h(X1...Xk), the form used to label maximal bracketings.

_HEADS = {"C": "h(", "C1": "h1(", "C2": "h2(", "B": "h1h2(", "Z": "(h1h2)("}
_TOKEN = re.compile(
    r"\s+|,|\(h_?1\s*h_?2\)\(|h_?1\s*h_?2\(|h_?1\(|h_?2\(|h\(|\(|\)|/|[at]_?\d+|.")


def to_expression(tree: Tree, style: str = "canonical") -> str:
    if style not in ("canonical", "bracket"):
        raise TreeError(f"unknown expression style {style!r}")
    seam = tree.family == "seam"
    root = tree.root
    if root.kind == "U":
        return "".join(_render(x, style, seam) for x in root.children)
    return _render(root, style, seam)


@lru_cache(maxsize=None)
def _render(x: Item, style: str, seam: bool) -> str:
    if isinstance(x, Leaf):
        return x.label

    def body(items) -> str:
        return "".join(_render(y, style, seam) for y in items)

    if x.kind in ("U", "S"):
        return "(" + body(x.children) + ")"
    kids = x.children
    if style == "bracket":
        if len(kids) != 1 or x.seam:
            raise TreeError("bracket style needs colored vertices with a single child")
        if isinstance(kids[0], Node) and kids[0].kind == "U":
            kids = kids[0].children
    head = _HEADS[x.kind]
    if seam:
        return head + body(x.seam) + "/" + body(kids) + ")"
    return head + body(kids) + ")"


def _tokens(s: str) -> list[str]:
    out = []
    for m in _TOKEN.finditer(s):
        tok = m.group(0)
        if tok.isspace() or tok == ",":
            continue
        tok = re.sub(r"[\s_]", "", tok)
        out.append(tok)
    return out


def parse_expression(s: str, family: str, style: str = "canonical") -> Tree:
    """Inverse of to_expression; rejects malformed or invalid expressions."""
    if family not in FAMILIES:
        raise TreeError(f"unknown family {family!r}")
    toks = _tokens(s)
    pos = 0
    kind_of = {v: k for k, v in _HEADS.items()}

    def seq(on_seam: bool, closers: tuple[str, ...]) -> list[Item]:
        nonlocal pos
        items: list[Item] = []
        while pos < len(toks) and toks[pos] not in closers:
            items.append(item(on_seam))
        return items

    def expect(tok: str) -> None:
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            got = toks[pos] if pos < len(toks) else "end of input"
            raise TreeError(f"malformed bracketing: expected {tok!r}, got {got!r}")
        pos += 1

    def item(on_seam: bool) -> Item:
        nonlocal pos
        tok = toks[pos]
        pos += 1
        m = re.fullmatch(r"([at])(\d+)", tok)
        if m:
            return Leaf(m.group(1), int(m.group(2)))
        if tok == "(":
            kids = seq(on_seam, (")",))
            expect(")")
            return Node("S" if on_seam else "U", tuple(kids))
        if tok in kind_of:
            kind = kind_of[tok]
            if family == "colored" and kind != "C" or family == "seam" and kind != "C":
                raise TreeError(f"symbol {tok[:-1]} not used in the {family} family")
            seam_items: list[Item] = []
            if family == "seam":
                seam_items = seq(True, ("/", ")"))
                expect("/")
            kids = seq(False, (")",))
            expect(")")
            if style == "bracket" and len(kids) >= 2:
                kids = [Node("U", tuple(kids))]
            return Node(kind, tuple(kids), tuple(seam_items))
        raise TreeError(f"malformed bracketing: unexpected {tok!r}")

    top = seq(False, ())
    if pos != len(toks):
        raise TreeError("malformed bracketing: unbalanced parentheses")
    if not top:
        raise TreeError("empty expression")
    if len(top) == 1 and isinstance(top[0], Node):
        root = top[0]
    else:
        root = Node("U", tuple(top))
    labels = list(_leaf_labels(root))
    d = sum(1 for x in labels if x.side == "a")
    e = sum(1 for x in labels if x.side == "t")
    d = max([d] + [x.index for x in labels if x.side == "a"])
    e = max([e] + [x.index for x in labels if x.side == "t"])
    return validate(Tree(family, d, e, root))
