from __future__ import annotations

from fractions import Fraction

import pytest

from quilthedra.gluing import (AXIOMS, DelayFamily, FormalModuliDims, balanced_rank, balanced_relations,
                               check_delay_compatibility, construct_delays, core_edges,
                               delayed_evaluation, designated_vertices, formal_dimension,
                               make_assignment, path_products, regularity_surrogate,
                               relation_rank, stratum_codim, zero_dimensional_bubbles)
from quilthedra.polytopes import build_face_poset, facet_tag
from quilthedra.trees import enumerate_trees, parse_expression


def tree(s: str, family: str):
    return parse_expression(s, family)


# -- codimension -------------------------------------------------------------


def test_codim_examples():
    assert stratum_codim(tree("(a1a2)a3", "stable")) == 1
    assert relation_rank(tree("(a1a2)a3", "stable")) == 0
    t = tree("h(a1)h(a2)", "colored")
    cone = balanced_relations(t)
    assert len(t.finite_edges()) == 2
    assert cone.rank == 1
    assert stratum_codim(t) == 1
    assert stratum_codim(tree("(h1h2)(a1)(h1h2)(a2)", "bicolored")) == 2


def test_relation_rows_follow_paths():
    t = tree("(h(a1)h(a2))h(a3)", "colored")
    cone = balanced_relations(t)
    edges = list(cone.edges)
    for (u, v), row in zip(cone.pairs, cone.matrix):
        assert set(row) <= {-1, 0, 1}
        support = {edges[k] for k, x in enumerate(row) if x}
        assert support  # distinct colored vertices are joined by a nonempty path
    assert cone.rank <= min(len(cone.matrix), len(edges))


@pytest.mark.parametrize("family,d,e", [("stable", 6, 0), ("colored", 5, 0), ("bicolored", 4, 0),
                                        ("seam", 3, 1), ("seam", 2, 2), ("seam", 3, 0)])
def test_closed_form_rank_matches_elimination(family, d, e):
    for t in enumerate_trees(family, d, e):
        assert balanced_rank(t) == relation_rank(t), t.expression()


@pytest.mark.parametrize("family,d,e", [("stable", 5, 0), ("colored", 4, 0), ("bicolored", 3, 0),
                                        ("seam", 2, 1)])
def test_dimension_matches_refinement_depth(family, d, e):
    p = build_face_poset(family, d, e)
    for lo, hi in p.covers:
        assert stratum_codim(p.faces[lo]) == stratum_codim(p.faces[hi]) + 1


# -- delays -------------------------------------------------------------------


def test_all_ones_fails_positivity_only():
    fam = construct_delays(3)
    ones = DelayFamily(3, tuple(make_assignment(a.tree) for a in fam.assignments))
    report = check_delay_compatibility(ones)
    assert {v.axiom for v in report.violations} == {"positivity"}


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_construct_delays_passes(d):
    report = check_delay_compatibility(construct_delays(d))
    assert report.ok, report.to_json()
    if d >= 2:
        assert set(report.checked) == set(AXIOMS)


def test_d1_delays_trivial():
    fam = construct_delays(1)
    for a in fam.assignments:
        assert all(x == 1 for _, x in a.lambdas)


def test_d2_biquilted_facet_has_distinct_multipliers():
    fam = construct_delays(2)
    a = next(a for a in fam.assignments if a.tree.expression() == "h1h2(a1)h1h2(a2)")
    values = [x for _, x in a.lambdas]
    assert len(values) == 2 and len(set(values)) == 2


def test_refinement_negative_control():
    fam = construct_delays(3)
    i, a = next((i, a) for i, a in enumerate(fam.assignments)
                if a.tree.expression() == "h1h2(a1)h1h2(a2)h1h2(a3)")
    edge = a.lambdas[-1][0]
    bad = fam.replace(i, a.with_lambda(edge, a.get(edge) * 3))
    report = check_delay_compatibility(bad)
    assert {v.axiom for v in report.violations} == {"refinement"}
    assert report.failed("refinement") and not report.failed("positivity")


def test_nonpositive_multiplier_rejected():
    t = tree("h1h2(a1)h1h2(a2)", "bicolored")
    with pytest.raises(ValueError):
        make_assignment(t, {core_edges(t)[0]: 0})


def test_delay_json():
    data = construct_delays(2).to_json()
    assert data["d"] == 2
    assert all(set(e) == {"tree_id", "tree", "edge", "lambda"} for e in data["entries"])
    assert all("/" in e["lambda"] for e in data["entries"])


def test_delayed_evaluation_examples():
    t = tree("h1h2(a1)h1h2(a2)", "bicolored")
    ones = make_assignment(t)
    assert delayed_evaluation(t, ones, [Fraction(3), Fraction(5)]) == (3, 5)
    e1, e2 = core_edges(t)
    a = make_assignment(t, {e1: 2, e2: 3})
    assert path_products(t, a) == (2, 3)
    assert delayed_evaluation(t, a, [Fraction(3), Fraction(2)]) == (6, 6)
    with pytest.raises(ValueError):
        delayed_evaluation(t, a, [Fraction(0), Fraction(1)])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_regularity_surrogate_on_facets(d):
    fam = construct_delays(d)
    checked = 0
    for a in fam.assignments:
        t = a.tree
        if t.d < 2 or stratum_codim(t) != 1 or facet_tag(t) != "biquilted-bubbles":
            continue
        rep = regularity_surrogate(t, a)
        assert rep.k == len(designated_vertices(t)) >= 2
        assert rep.ok, rep
        checked += 1
    assert checked > 0


def test_regularity_fails_for_equal_products():
    t = tree("h1h2(a1)h1h2(a2)", "bicolored")
    rep = regularity_surrogate(t, make_assignment(t))
    assert rep.rank == 1 and not rep.distinct_products and not rep.ok


# -- formal dimensions ---------------------------------------------------------


def test_formal_dimension_examples():
    assert formal_dimension(None, FormalModuliDims((0,), 1)) == 0
    assert formal_dimension(None, FormalModuliDims((1, 1), 2)) == 1 - 2 + 2
    t = tree("h1h2(a1)h1h2(a2)h1h2(a3)", "bicolored")
    z = zero_dimensional_bubbles(t, FormalModuliDims((0, 1, 1, 0), 3))
    assert z["total"] == 0 and z["exactly_one"]
    assert z["zero_dimensional"] == [3]


def test_formal_dimension_checks_k():
    t = tree("h1h2(a1)h1h2(a2)", "bicolored")
    with pytest.raises(ValueError):
        formal_dimension(t, FormalModuliDims((0, 0, 0), 3))
    with pytest.raises(ValueError):
        FormalModuliDims((-1,), 1)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_only_one_rigid_bubble(k):
    """Bubbles of dimension 0 or 1 over a rigid root: total 0 iff exactly one is rigid."""
    s = "".join(f"h1h2(a{i})" for i in range(1, k + 1))
    t = tree(s, "bicolored")
    for mask in range(1 << k):
        dims = (0,) + tuple(mask >> j & 1 for j in range(k))
        z = zero_dimensional_bubbles(t, FormalModuliDims(dims, k))
        assert (z["total"] == 0) == z["exactly_one"]
