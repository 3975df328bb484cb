from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quilthedra.examples import load_relations, sample_relations
from quilthedra.relations import (POINT, Correspondence, FiniteSpace, GeneralizedCorrespondence,
                                  RelationError, all_relations, check_composition_associative,
                                  compose_relations, composed_correspondence, concatenate, diagonal,
                                  from_json, geometric_compose, non_embedded_example,
                                  phi_on_objects, replace_adjacent, to_json, total_relation,
                                  transpose)

M = [FiniteSpace(f"M{i}", tuple(f"m{i}_{k}" for k in range(n))) for i, n in enumerate((2, 3, 2, 3))]


def corr(i: int):
    src, dst = M[i], M[i + 1]
    pairs = [(a, b) for a in src.elements for b in dst.elements]
    return st.sets(st.sampled_from(pairs)).map(
        lambda rel: Correspondence(src, dst, frozenset(rel), 1, f"L{i}{i + 1}"))


def brute_compose(r, s):
    return frozenset((x, z) for x, y in r for y2, z in s if y == y2)


# -- finite spaces and single correspondences ----------------------------------------


def test_space_validation():
    with pytest.raises(RelationError):
        FiniteSpace("empty", ())
    with pytest.raises(RelationError):
        FiniteSpace("twice", ("a", "a"))
    assert len(POINT) == 1 and "*" in POINT


def test_correspondence_validation():
    with pytest.raises(RelationError):
        Correspondence(M[0], M[1], {("nope", "m1_0")})
    with pytest.raises(RelationError):
        Correspondence(M[0], M[1], set(), width=0)
    with pytest.raises(RelationError):
        Correspondence(M[0], M[1], set(), brane="")
    L = Correspondence(M[0], M[1], {("m0_0", "m1_0"), ("m0_1", "m1_1")})
    assert L.restrict({("m0_0", "m1_0")}).relation == {("m0_0", "m1_0")}
    with pytest.raises(RelationError):
        L.restrict({("m0_0", "m1_2")})
    assert L.admissibility == "unchecked"


@settings(max_examples=100, deadline=None)
@given(corr(0), corr(1))
def test_composition_matches_brute_force(L01, L12):
    assert compose_relations(L01.relation, L12.relation) == brute_compose(L01.relation, L12.relation)
    c = geometric_compose(L01, L12)
    assert c.relation == brute_compose(L01.relation, L12.relation)
    assert c.fiber_product_size == len(c.fiber_product) >= len(c.relation)
    assert c.embedded == (c.fiber_product_size == len(c.relation))


@settings(max_examples=100, deadline=None)
@given(corr(0))
def test_transpose_is_an_involution(L):
    assert transpose(transpose(L)) == L


@settings(max_examples=100, deadline=None)
@given(corr(0), corr(1))
def test_transpose_reverses_composition(L01, L12):
    lhs = transpose(composed_correspondence(L01, L12)).relation
    rhs = geometric_compose(transpose(L12), transpose(L01)).relation
    assert lhs == rhs


@settings(max_examples=100, deadline=None)
@given(corr(0))
def test_diagonal_is_a_unit(L):
    left = geometric_compose(diagonal(L.source), L)
    right = geometric_compose(L, diagonal(L.target))
    assert left.relation == right.relation == L.relation
    assert left.embedded and right.embedded


@settings(max_examples=100, deadline=None)
@given(corr(0), corr(1), corr(2))
def test_composition_associative(L01, L12, L23):
    a = composed_correspondence(composed_correspondence(L01, L12), L23).relation
    b = composed_correspondence(L01, composed_correspondence(L12, L23)).relation
    assert a == b


@settings(max_examples=100, deadline=None)
@given(corr(0), corr(1))
def test_embeddedness_is_monotone(L01, L12):
    """Shrinking an embedded composition keeps it embedded."""
    if geometric_compose(L01, L12).embedded:
        for pair in L01.relation:
            assert geometric_compose(L01.restrict(L01.relation - {pair}), L12).embedded


def test_non_embedded_example():
    L01, L12 = non_embedded_example()
    c = geometric_compose(L01, L12)
    assert c.relation == {("p", "q")}
    assert c.fiber_product_size == 2 and not c.embedded
    assert c.to_json() == {"relation": [["p", "q"]], "embedded": False, "fiber_product_size": 2}


def test_compose_needs_matching_spaces():
    with pytest.raises(RelationError):
        geometric_compose(diagonal(M[0]), diagonal(M[1]))


@pytest.mark.parametrize("size,count", [(1, 2), (2, 16)])
def test_all_relations_count(size, count):
    X = FiniteSpace("X", tuple(range(size)))
    rels = list(all_relations(X, X))
    assert len(rels) == len(set(rels)) == count


@pytest.mark.parametrize("size", [1, 2, 3])
def test_exhaustive_associativity(size):
    r = check_composition_associative(size)
    n = 2 ** (size * size)
    assert r["checked"] == n ** 3
    assert r["failures"] == []


# -- generalized correspondences -----------------------------------------------------


def test_chain_validation():
    with pytest.raises(RelationError):
        GeneralizedCorrespondence(M[0], M[1])
    with pytest.raises(RelationError):
        GeneralizedCorrespondence.chain([diagonal(M[0]), diagonal(M[1])])
    with pytest.raises(RelationError):
        GeneralizedCorrespondence(M[0], M[0], (diagonal(M[0]), diagonal(M[0])), ())
    with pytest.raises(RelationError):
        GeneralizedCorrespondence.chain([])


@settings(max_examples=60, deadline=None)
@given(corr(0), corr(1), corr(2))
def test_concatenation(L01, L12, L23):
    G = GeneralizedCorrespondence
    a, b, c = G.single(L01), G.single(L12), G.single(L23)
    ab = concatenate(a, b, Fraction(1, 2))
    assert len(ab) == 2 and ab.widths == (Fraction(1, 2),)
    assert concatenate(concatenate(a, b), c) == concatenate(a, concatenate(b, c))
    assert concatenate(G.empty(M[0]), a) == a == concatenate(a, G.empty(M[1]))
    assert total_relation(concatenate(ab, c)) == \
        compose_relations(compose_relations(L01.relation, L12.relation), L23.relation)
    with pytest.raises(RelationError):
        concatenate(a, c)


@settings(max_examples=60, deadline=None)
@given(corr(0), corr(1), corr(2))
def test_replacing_adjacent_entries_keeps_total_relation(L01, L12, L23):
    L = GeneralizedCorrespondence.chain([L01, L12, L23])
    for i in (0, 1):
        merged, embedded = replace_adjacent(L, i)
        assert len(merged) == 2 and len(merged.widths) == 1
        assert total_relation(merged) == total_relation(L)
        assert embedded == geometric_compose(L.entries[i], L.entries[i + 1]).embedded
    with pytest.raises(RelationError):
        replace_adjacent(L, 2)


def test_total_relation_of_empty_chain_is_diagonal():
    assert total_relation(GeneralizedCorrespondence.empty(M[1])) == diagonal(M[1]).relation


def test_phi_on_objects_is_functorial():
    L01 = Correspondence(M[0], M[1], {("m0_0", "m1_1")}, 2)
    L12 = Correspondence(M[1], M[2], {("m1_1", "m2_0")}, 3)
    brane = GeneralizedCorrespondence.empty(M[0])
    one = phi_on_objects(L12, phi_on_objects(L01, brane))
    two = phi_on_objects(concatenate(GeneralizedCorrespondence.single(L01),
                                     GeneralizedCorrespondence.single(L12), L12.width), brane)
    assert one == two
    assert phi_on_objects(GeneralizedCorrespondence.empty(M[0]), brane) == brane
    with pytest.raises(RelationError):
        phi_on_objects(L12, brane)


# -- JSON and fixtures -------------------------------------------------------------------


def test_json_round_trip():
    L01, L12 = non_embedded_example()
    spaces = [L01.source, L01.target, L12.target]
    data = to_json(spaces, [L01, L12])
    back_spaces, back = from_json(json.dumps(data))
    assert back == [L01, L12]
    assert list(back_spaces.values()) == spaces


def test_json_unknown_space():
    with pytest.raises(RelationError, match="unknown space"):
        from_json({"spaces": [], "correspondences": [{"src": "A", "dst": "B", "pairs": []}]})


def test_shipped_relations_match_generator():
    shipped = load_relations()
    built = sample_relations()
    assert set(shipped) == set(built) == {"embedded", "non_embedded"}
    for key, data in built.items():
        assert shipped[key][1] == from_json(data)[1]
