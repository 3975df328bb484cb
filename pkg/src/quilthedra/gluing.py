"""Balanced gluing parameters, stratum codimension and delay functions.

A stratum's gluing parameters are one scalar per finite edge.  For every
pair of vertices carrying the same seam, the product of the parameters
along the path joining them (exponent +1 on one side of the meeting
point, -1 on the other) must be 1.  The codimension of the stratum is
the number of edges minus the rank of these relations, plus one when the
two seams are forced together.

Delays are locally constant per (type, core edge) and stored
multiplicatively as positive rationals lambda = exp(tau).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from . import linalg
from .trees import Node, Tree, TreeError, enumerate_trees, refinement_edges


@dataclass(frozen=True)
class GluingCone:
    tree: Tree
    edges: tuple[tuple[int, int], ...]
    pairs: tuple[tuple[int, int], ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return linalg.rank([list(r) for r in self.matrix], len(self.edges))


def _seam_groups(tree: Tree) -> list[list[int]]:
    if tree.family in ("colored", "seam"):
        return [tree.colored("c")]
    if tree.family == "bicolored":
        return [tree.colored("1"), tree.colored("2")]
    return []


def _path_to_root(parents: dict[int, int | None], v: int) -> list[int]:
    out = [v]
    while parents[out[-1]] is not None:
        out.append(parents[out[-1]])
    return out


def balanced_relations(tree: Tree) -> GluingCone:
    verts = tree.vertices()
    parents = {v.id: v.parent for v in verts}
    edges = tuple(tree.finite_edges())
    col = {c: i for i, (_, c) in enumerate(edges)}
    pairs, rows = [], []
    for group in _seam_groups(tree):
        for v, w in combinations(group, 2):
            pv, pw = _path_to_root(parents, v), _path_to_root(parents, w)
            meet = next(x for x in pv if x in set(pw))
            row = [0] * len(edges)
            for x in pv[:pv.index(meet)]:
                row[col[x]] += 1
            for x in pw[:pw.index(meet)]:
                row[col[x]] -= 1
            pairs.append((v, w))
            rows.append(tuple(row))
    return GluingCone(tree, edges, tuple(pairs), tuple(rows))


def relation_rank(tree: Tree) -> int:
    """Rank of the balancing relations by exact elimination."""
    return balanced_relations(tree).rank


@lru_cache(maxsize=None)
def _kind_counts(node: Node) -> tuple[int, int, int, int, int, bool]:
    """(vertices, c-colored, 1-colored, 2-colored, both 1 and 2, has Z) below node."""
    k = node.kind
    out = [1, k == "C", k in ("C1", "B", "Z"), k in ("C2", "B", "Z"), k in ("B", "Z"), k == "Z"]
    for x in node.items():
        if isinstance(x, Node):
            sub = _kind_counts(x)
            for i in range(5):
                out[i] += sub[i]
            out[5] = out[5] or sub[5]
    return tuple(int(v) for v in out[:5]) + (bool(out[5]),)


def balanced_rank(tree: Tree) -> int:
    """Rank of the balancing relations in closed form.

    The relations are differences of root-path vectors p_v inside each seam
    group.  Distinct non-root vertices have distinct entering edges, so the
    p_v are independent (p_root = 0 only adds a total-sum-one kernel vector,
    which no difference hits).  Hence the span has dimension
    (k1 - 1) + (k2 - 1) - (s - 1), s being the vertices shared by both groups.
    """
    _, kc, k1, k2, s, _ = _kind_counts(tree.root)
    if tree.family in ("colored", "seam"):
        return max(kc - 1, 0)
    if tree.family == "bicolored":
        return max(k1 - 1, 0) + max(k2 - 1, 0) - max(s - 1, 0)
    return 0


def stratum_codim(tree: Tree) -> int:
    counts = _kind_counts(tree.root)
    zero = tree.family == "bicolored" and counts[5]
    return counts[0] - 1 - balanced_rank(tree) + int(zero)


# ---------------------------------------------------------------------------
# delay functions


def _quilted_kinds(tree: Tree) -> tuple[str, ...]:
    return ("C1",) if tree.ratio_class == "infinite" else ("B", "Z")


def designated_vertices(tree: Tree) -> list[int]:
    """The outermost quilted vertices v_1..v_k in planar order."""
    kinds = _quilted_kinds(tree)
    return [v.id for v in tree.vertices() if v.node.kind in kinds]


def core(tree: Tree) -> frozenset[int]:
    """Vertices of the smallest subtree holding the root and every designated vertex."""
    if tree.family != "bicolored":
        raise TreeError("delays are defined on bicolored types")
    parents = {v.id: v.parent for v in tree.vertices()}
    out: set[int] = set()
    for v in designated_vertices(tree):
        out.update(_path_to_root(parents, v))
    return frozenset(out)


def core_edges(tree: Tree) -> list[tuple[int, int]]:
    c = core(tree)
    return [(p, q) for p, q in tree.finite_edges() if q in c]


def _min_leaf(tree: Tree, vid: int) -> int:
    return min(int(lab[1:]) for lab in tree.leafset(vid))


@dataclass(frozen=True)
class DelayAssignment:
    tree: Tree
    lambdas: tuple[tuple[tuple[int, int], Fraction], ...]

    def table(self) -> dict[tuple[int, int], Fraction]:
        return dict(self.lambdas)

    def get(self, edge: tuple[int, int]) -> Fraction:
        return self.table()[edge]

    def with_lambda(self, edge: tuple[int, int], value) -> "DelayAssignment":
        t = self.table()
        if edge not in t:
            raise KeyError(edge)
        t[edge] = Fraction(value)
        return DelayAssignment(self.tree, tuple(sorted(t.items())))


def make_assignment(tree: Tree, values: dict | None = None) -> DelayAssignment:
    """Assignment on the core edges of `tree`; unspecified edges get lambda 1."""
    values = values or {}
    edges = core_edges(tree)
    extra = set(values) - set(edges)
    if extra:
        raise TreeError(f"{sorted(extra)} are not core edges of {tree}")
    lam = []
    for e in edges:
        x = Fraction(values.get(e, 1))
        if x <= 0:
            raise ValueError("delay multipliers must be positive")
        lam.append((e, x))
    return DelayAssignment(tree, tuple(lam))


@dataclass(frozen=True)
class DelayFamily:
    d: int
    assignments: tuple[DelayAssignment, ...]

    def replace(self, index: int, a: DelayAssignment) -> "DelayFamily":
        items = list(self.assignments)
        items[index] = a
        return DelayFamily(self.d, tuple(items))

    def to_json(self) -> dict:
        entries = []
        for i, a in enumerate(self.assignments):
            for e, x in a.lambdas:
                entries.append({"tree_id": i, "tree": a.tree.expression(), "edge": list(e),
                                "lambda": f"{x.numerator}/{x.denominator}"})
        return {"d": self.d, "entries": entries}


def construct_delays(d: int) -> DelayFamily:
    """Delays for every bicolored type with at most d leaves.

    On a finite-ratio type the core edge (p, c) gets 2^(minleaf(c) - minleaf(p)),
    a ratio of the vertex potentials 2^(minleaf - 1); all other multipliers are 1.
    Products along paths then telescope, which gives the refinement and core
    properties, and siblings get strictly increasing multipliers.
    """
    if d < 1:
        raise ValueError("d >= 1 required")
    out = []
    for n in range(1, d + 1):
        for t in enumerate_trees("bicolored", n):
            if t.ratio_class == "finite":
                vals = {(p, c): Fraction(2) ** (_min_leaf(t, c) - _min_leaf(t, p))
                        for p, c in core_edges(t)}
            else:
                vals = {}
            out.append(make_assignment(t, vals))
    return DelayFamily(d, tuple(out))


@dataclass(frozen=True)
class Violation:
    axiom: str
    tree: str
    edge: tuple[int, int] | None
    detail: str = ""

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "tree": self.tree,
                "edge": list(self.edge) if self.edge else None, "detail": self.detail}


AXIOMS = ("subtree", "refinement", "core", "ratio", "positivity")


@dataclass(frozen=True)
class DelayReport:
    checked: dict = field(default_factory=dict)
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed(self, axiom: str) -> bool:
        return any(v.axiom == axiom for v in self.violations)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked,
                "violations": [v.to_json() for v in self.violations]}


def _relabel(node: Node, shift: int) -> Node:
    def go(x):
        if isinstance(x, Node):
            return Node(x.kind, tuple(go(y) for y in x.children), tuple(go(y) for y in x.seam))
        return type(x)(x.side, x.index - shift)
    return go(node)


def _core_signature(tree: Tree):
    """The core with everything beyond the designated vertices replaced by leafsets."""
    keep = core(tree)
    verts = tree.vertices()
    desig = set(designated_vertices(tree))

    def sig(vid):
        v = verts[vid]
        kids = [x.id for x in verts if x.parent == vid and x.id in keep]
        if vid in desig:
            return ("q", tuple(sorted(tree.leafset(vid))))
        return (v.node.kind, tuple(sig(k) for k in kids))
    return sig(0)


def check_delay_compatibility(family: DelayFamily) -> DelayReport:
    found: list[Violation] = []
    checked = {a: 0 for a in AXIOMS}
    by_tree: dict[Tree, DelayAssignment] = {}
    for a in family.assignments:
        by_tree[a.tree] = a
    for n in range(1, family.d + 1):
        for t in enumerate_trees("bicolored", n):
            if t not in by_tree:
                found.append(Violation("subtree", str(t), None, "missing assignment"))
    for a in family.assignments:
        t, lam = a.tree, a.table()
        if set(lam) != set(core_edges(t)):
            found.append(Violation("core", str(t), None, "assignment not on the core edges"))
            continue
        if any(x <= 0 for x in lam.values()):
            found.append(Violation("positivity", str(t), None, "nonpositive multiplier"))
        name = str(t)
        # ratio property
        if t.ratio_class in ("zero", "infinite"):
            checked["ratio"] += 1
            for e, x in lam.items():
                if x != 1:
                    found.append(Violation("ratio", name, e, f"lambda={x} on a {t.ratio_class}-ratio type"))
            continue
        # positivity: incoming core edges in planar order increase strictly
        verts = t.vertices()
        for v in sorted(core(t)):
            kids = [(p, c) for p, c in lam if p == v]
            checked["positivity"] += 1
            for e1, e2 in zip(kids, kids[1:]):
                if not lam[e1] < lam[e2]:
                    found.append(Violation("positivity", name, e2,
                                           f"{lam[e1]} !< {lam[e2]} at vertex {v}"))
        # subtree property at every non-root core vertex
        for v in sorted(core(t)):
            if v == 0:
                continue
            node = verts[v].node
            leaves = sorted(int(s[1:]) for s in t.leafset(v))
            sub = Tree("bicolored", len(leaves), 0, _relabel(node, leaves[0] - 1))
            other = by_tree.get(sub)
            if other is None:
                continue
            checked["subtree"] += 1
            olam = other.table()
            size = len(sub.vertices())
            for (p, c), x in lam.items():
                if v <= p < v + size and v < c < v + size and c != v:
                    y = olam.get((p - v, c - v))
                    if y != x:
                        found.append(Violation("subtree", name, (p, c),
                                               f"{x} != {y} on subtree {sub}"))
    # core property
    groups: dict = {}
    for a in family.assignments:
        if a.tree.ratio_class == "finite":
            groups.setdefault((a.tree.d, _core_signature(a.tree)), []).append(a)
    for members in groups.values():
        ref = [x for _, x in members[0].lambdas]
        for a in members[1:]:
            checked["core"] += 1
            if [x for _, x in a.lambdas] != ref:
                found.append(Violation("core", str(a.tree), None,
                                       f"differs from {members[0].tree} on the shared core"))
    # refinement property between finite-ratio types
    for n in range(1, family.d + 1):
        finite = [t for t in enumerate_trees("bicolored", n)
                  if t.ratio_class == "finite" and t in by_tree]
        for fine in finite:
            for coarse in finite:
                if fine == coarse or len(coarse.finite_edges()) >= len(fine.finite_edges()):
                    continue
                drop = refinement_edges(fine, coarse)
                if drop is None:
                    continue
                checked["refinement"] += 1
                found.extend(_refinement_violations(by_tree[fine], by_tree[coarse], drop))
    return DelayReport(checked, tuple(found))


def _refinement_violations(fine: DelayAssignment, coarse: DelayAssignment, drop) -> list[Violation]:
    fverts = fine.tree.vertices()
    survivors = [v.id for v in fverts if v.id not in drop]
    to_fine = dict(enumerate(survivors))
    flam = fine.table()
    out = []
    for (p, c), x in coarse.lambdas:
        cur = to_fine[c]
        prod = Fraction(1)
        while True:
            par = fverts[cur].parent
            prod *= flam.get((par, cur), Fraction(1))
            cur = par
            if cur not in drop:
                break
        if cur != to_fine[p]:
            out.append(Violation("refinement", str(coarse.tree), (p, c), "edge correspondence broken"))
        elif prod != x:
            out.append(Violation("refinement", str(coarse.tree), (p, c),
                                 f"{x} != {prod} from refinement {fine.tree}"))
    return out


def delayed_evaluation(tree: Tree, assignment: DelayAssignment, ratios) -> tuple[Fraction, ...]:
    """Component i is ratio_i times the product of the multipliers on the root path to v_i."""
    desig = designated_vertices(tree)
    ratios = [Fraction(r) for r in ratios]
    if len(ratios) != len(desig):
        raise ValueError(f"expected {len(desig)} ratios, got {len(ratios)}")
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    return tuple(r * x for r, x in zip(ratios, path_products(tree, assignment)))


def path_products(tree: Tree, assignment: DelayAssignment) -> tuple[Fraction, ...]:
    lam = assignment.table()
    parents = {v.id: v.parent for v in tree.vertices()}
    out = []
    for v in designated_vertices(tree):
        prod = Fraction(1)
        path = _path_to_root(parents, v)
        for c, p in zip(path, path[1:]):
            prod *= lam.get((p, c), Fraction(1))
        out.append(prod)
    return tuple(out)


@dataclass(frozen=True)
class RegularityReport:
    tree: str
    k: int
    rank: int
    solution_dim: int
    distinct_products: bool

    @property
    def ok(self) -> bool:
        return self.rank == self.k - 1 and self.solution_dim == 1 and self.distinct_products


def regularity_surrogate(tree: Tree, assignment: DelayAssignment) -> RegularityReport:
    """Diagonal system in log coordinates.

    With log2 ratios x_i the diagonal is x_i + L_i = x_{i+1} + L_{i+1}, where
    L_i = log2 of the path product (an integer here, since multipliers are
    powers of two).  Full rank k-1 leaves a one-parameter solution set.
    """
    prods = path_products(tree, assignment)
    k = len(prods)
    rows = [[(1 if j == i else -1 if j == i + 1 else 0) for j in range(k)] for i in range(k - 1)]
    logs = []
    for x in prods:
        n, m = x.numerator, x.denominator
        if n & (n - 1) or m & (m - 1):
            raise ValueError("log coordinates need power-of-two multipliers")
        logs.append(n.bit_length() - m.bit_length())
    rhs = [logs[i + 1] - logs[i] for i in range(k - 1)]
    rk = linalg.rank(rows, k) if rows else 0
    sol = linalg.solve(rows, rhs, k) if rows else [Fraction(0)] * k
    dim = len(linalg.nullspace(rows, k)) if sol is not None and rows else (k if sol is not None else -1)
    return RegularityReport(str(tree), k, rk, dim, len(set(prods)) == k)


@dataclass(frozen=True)
class FormalModuliDims:
    dims: tuple[int, ...]
    k: int

    def __post_init__(self):
        if any(x < 0 for x in self.dims) or self.k < 0:
            raise ValueError("moduli dimensions must be nonnegative")


def formal_dimension(tree: Tree | None, dims: FormalModuliDims) -> int:
    """1 - k + sum of the vertex dimensions."""
    if tree is not None:
        if len(dims.dims) != len(tree.vertices()):
            raise ValueError("one dimension per vertex expected")
        if tree.family == "bicolored" and dims.k != len(tree.colored("1")) and tree.ratio_class != "infinite":
            raise ValueError("k must count the biquilted vertices")
    return 1 - dims.k + sum(dims.dims)


def zero_dimensional_bubbles(tree: Tree, dims: FormalModuliDims) -> dict:
    """Which biquilted bubbles are rigid in a configuration of total dimension 0."""
    total = formal_dimension(tree, dims)
    bubbles = [v for v in designated_vertices(tree)]
    rigid = [v for v in bubbles if dims.dims[v] == 0]
    return {"total": total, "biquilted": bubbles, "zero_dimensional": rigid,
            "exactly_one": total == 0 and len(rigid) == 1}
