from __future__ import annotations

import json

import pytest

from oracles import associahedron_f_vector, partial_bracketings
from quilthedra.gluing import stratum_codim
from quilthedra.polytopes import (FACET_TAGS, PosetError, build_face_poset, codim_tag_mismatches,
                                  euler_check, f_vector, facet_factors, facet_families,
                                  facet_tag, forget_marking, forget_seam, is_graded,
                                  ratio_stratum)
from quilthedra.trees import dimension, parse_expression, refines

# f-vectors frozen from the enumeration; small cases agree with the pictures
# (pentagon, hexagon, octagon, intervals), the stable ones with the oracle.
F_VECTORS = {
    ("stable", 4, 0): (5, 5, 1),
    ("stable", 5, 0): (14, 21, 9, 1),
    ("stable", 6, 0): (42, 84, 56, 14, 1),
    ("colored", 2, 0): (2, 1),
    ("colored", 3, 0): (6, 6, 1),
    ("colored", 4, 0): (21, 32, 13, 1),
    ("colored", 5, 0): (80, 165, 110, 25, 1),
    ("bicolored", 2, 0): (5, 5, 1),
    ("bicolored", 3, 0): (18, 27, 11, 1),
    ("bicolored", 4, 0): (75, 152, 99, 22, 1),
    ("seam", 1, 1): (2, 1),
    ("seam", 2, 1): (8, 8, 1),
    ("seam", 1, 2): (8, 8, 1),
    ("seam", 2, 2): (44, 69, 27, 1),
    ("seam", 3, 1): (36, 56, 22, 1),
}


@pytest.mark.parametrize("key,expected", sorted(F_VECTORS.items()))
def test_f_vectors(key, expected):
    p = build_face_poset(*key)
    assert f_vector(p) == expected
    assert sum(f_vector(p)) == len(p.faces)
    assert euler_check(p)


@pytest.mark.parametrize("d", range(2, 8))
def test_stable_f_vector_against_bracketing_oracle(d):
    assert f_vector(build_face_poset("stable", d, covers=False)) == associahedron_f_vector(d)


def test_stable_faces_are_partial_bracketings():
    p = build_face_poset("stable", 5, covers=False)
    assert sorted((t.expression(), p.dim - k) for t, k in zip(p.faces, p.dims)) == \
        sorted(partial_bracketings(5))


@pytest.mark.parametrize("family,d,e", [("stable", 5, 0), ("colored", 4, 0), ("bicolored", 3, 0),
                                        ("seam", 2, 1), ("seam", 1, 2), ("seam", 3, 1)])
def test_poset_structure(family, d, e):
    p = build_face_poset(family, d, e)
    assert p.dim == dimension(family, d, e)
    assert p.dims.count(p.dim) == 1
    assert is_graded(p)
    top = p.top
    covered_by: dict[int, set] = {}
    for lo, hi in p.covers:
        assert p.dims[hi] == p.dims[lo] + 1
        assert refines(p.faces[lo], p.faces[hi])
        covered_by.setdefault(lo, set()).add(hi)
    for i in p.facets():
        assert covered_by[i] == {top}


def test_vertex_codim_is_top_dimension():
    for key in [("colored", 4, 0), ("bicolored", 3, 0), ("seam", 2, 1)]:
        p = build_face_poset(*key, covers=False)
        for t, k in zip(p.faces, p.dims):
            if k == 0:
                assert stratum_codim(t) == p.dim


def test_seam_interval_faces():
    p = build_face_poset("seam", 1, 1)
    assert sorted(t.expression() for t in p.faces) == ["h(/a1)h(t1/)", "h(t1/)h(/a1)", "h(t1/a1)"]
    assert facet_families(p) == {"boundary-parenthesis": 0, "seam-parenthesis": 0, "h-product": 2}


def test_bimultiplihedron_pentagon_facets():
    p = build_face_poset("bicolored", 2)
    assert facet_families(p) == {"once-quilted-bubbles": 2, "unquilted-bubble": 1,
                                 "biquilted-bubbles": 1, "seams-together": 1}


@pytest.mark.parametrize("d", range(2, 7))
def test_multiplihedron_has_two_tags(d):
    fams = facet_families(build_face_poset("colored", d, covers=False))
    assert set(fams) == set(FACET_TAGS["colored"])
    assert all(v > 0 for v in fams.values())


def test_octagon_facets():
    fams = facet_families(build_face_poset("seam", 2, 1))
    assert fams == {"boundary-parenthesis": 1, "seam-parenthesis": 0, "h-product": 7}


def test_k300_facet_families():
    fams = facet_families(build_face_poset("bicolored", 3, covers=False))
    assert fams == {"once-quilted-bubbles": 4, "unquilted-bubble": 3, "biquilted-bubbles": 3,
                    "seams-together": 1}


@pytest.mark.parametrize("family,d,e", [("stable", 6, 0), ("colored", 5, 0), ("bicolored", 4, 0),
                                        ("seam", 3, 1), ("seam", 2, 2)])
def test_codim_one_exactly_on_tagged_faces(family, d, e):
    assert codim_tag_mismatches(build_face_poset(family, d, e, covers=False)) == []


def test_facet_tag_rejects_non_facets():
    p = build_face_poset("stable", 4, covers=False)
    with pytest.raises(PosetError):
        facet_tag(p.faces[p.top])
    with pytest.raises(PosetError):
        facet_tag(p.faces[p.vertices()[0]])


def test_facet_factors():
    p = build_face_poset("bicolored", 3, covers=False)
    seen = set()
    for i in p.facets():
        info = facet_factors(p.faces[i])
        seen.add(info["tag"])
        if info["tag"] == "biquilted-bubbles":
            k = len(p.faces[i].root.children)
            assert info["shared_ratio_constraints"] == k - 1
            assert info["factors"][-1] == ("stable", k)
        else:
            assert info["shared_ratio_constraints"] == 0
    assert seen == set(FACET_TAGS["bicolored"])


def test_ratio_strata():
    p = build_face_poset("bicolored", 2)
    strata = {t.expression(): ratio_stratum(t) for t in p.faces}
    assert strata["(h1h2)(a1a2)"] == "zero"
    assert strata["h1(h2(a1)h2(a2))"] == "infinite"
    assert strata["h1h2(a1a2)"] == "finite"
    with pytest.raises(PosetError):
        ratio_stratum(build_face_poset("stable", 3).faces[0])


# -- forgetful maps --------------------------------------------------------


def test_forget_top_and_vertex():
    p4 = build_face_poset("stable", 4)
    p3 = build_face_poset("stable", 3)
    for i in range(1, 5):
        assert forget_marking(p4, p4.top, i) == p3.faces[p3.top]
    v = parse_expression("((a1a2)a3)a4", "stable")
    assert forget_marking(p4, v, 4) == parse_expression("(a1a2)a3", "stable")


def test_forget_below_minimum():
    assert forget_marking(build_face_poset("stable", 3), 0, 1).d == 2
    p = build_face_poset("stable", 2)
    with pytest.raises(PosetError):
        forget_marking(p, p.top, 1)
    with pytest.raises(PosetError):
        forget_marking(build_face_poset("stable", 4), 0, 5)


def test_forget_seam():
    p = build_face_poset("seam", 2, 1)
    q = build_face_poset("seam", 2, 0)
    images = {forget_seam(p, i, 1) for i in range(len(p.faces))}
    assert images <= set(q.faces)
    with pytest.raises(PosetError):
        forget_seam(build_face_poset("colored", 2), 0, 1)


@pytest.mark.parametrize("family,d,e", [("stable", 6, 0), ("colored", 5, 0), ("bicolored", 4, 0),
                                        ("seam", 3, 1)])
def test_forget_marking_monotone(family, d, e):
    p = build_face_poset(family, d, e)
    for i in range(1, d + 1):
        img = [forget_marking(p, k, i) for k in range(len(p.faces))]
        for lo, hi in p.covers:
            assert refines(img[lo], img[hi])


@pytest.mark.parametrize("family,d,e", [("stable", 5, 0), ("colored", 5, 0), ("bicolored", 4, 0),
                                        ("seam", 3, 1)])
def test_forget_marking_keeps_surviving_tags(family, d, e):
    p = build_face_poset(family, d, e, covers=False)
    for k in p.facets():
        for i in range(1, d + 1):
            g = forget_marking(p, k, i)
            if stratum_codim(g) == 1:
                assert facet_tag(g) == facet_tag(p.faces[k])


# -- serialization ----------------------------------------------------------


def test_poset_json_and_dot():
    p = build_face_poset("stable", 4)
    data = p.to_json()
    assert json.loads(json.dumps(data)) == data
    assert sum(1 for f in data["faces"] if "facet_tag" in f) == 5
    dot = p.to_dot()
    assert dot.startswith('digraph "stable_4_0"')
    assert dot.count("->") == len(p.covers)
