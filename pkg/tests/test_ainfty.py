from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from quilthedra.ainfty import (HOMOTOPY_DEGREE, AFunctor, AInftyError, AInftyInstance, BasisElement,
                               PreNat, check_ainfty, check_curvature_floer, check_functor,
                               cohomology_functor, compose_functors, compose_homotopies,
                               functor_from_json, functor_to_json, hom_cohomology,
                               homotopic_functor, homotopy_report, identity_functor,
                               instance_from_json, instance_to_json, is_homotopy, mat_mul,
                               mu1_prenat, mu2_prenat, opposite_sign_check, prenat_from_json,
                               prenat_to_json, term_facet_correspondence)
from quilthedra.examples import (complex_with_acyclic, curved_pair, dg_chain,
                                 inclusion_projection, load_curved, load_functor, load_homotopy,
                                 load_instance, quiver_fixture, random_prenat, twisted)


def flip(c: AInftyInstance, key: tuple[str, ...]) -> AInftyInstance:
    mu = dict(c.mu)
    mu[key] = {n: -x for n, x in mu[key].items()}
    return c.with_mu(mu)


# -- A-infinity relations -----------------------------------------------------


@pytest.mark.parametrize("stem", ["quiver3", "dgchain4", "dgchain4-twisted"])
def test_shipped_instances_satisfy_relations(stem):
    r = check_ainfty(load_instance(stem))
    assert r.ok and r.checked > 0


@pytest.mark.parametrize("stem", ["quiver3-unsigned", "dgchain4-flipped"])
def test_shipped_negatives_fail(stem):
    r = check_ainfty(load_instance(stem))
    assert not r.ok
    assert r.to_json()["residual_count"] == len(r.residuals)


def test_single_sign_flip_detected_at_arity_three():
    q = quiver_fixture()
    r = check_ainfty(flip(q, ("e0", "a")))
    assert not r.ok
    assert {x.arity for x in r.residuals} == {3}


def test_opposite_convention_rejected():
    """The unshifted sign rule does not hold for the same tables."""
    assert check_ainfty(dg_chain(3)).ok
    assert not opposite_sign_check(dg_chain(3)).ok
    assert not opposite_sign_check(quiver_fixture()).ok


@pytest.mark.parametrize("ring", ["Z", "Q", "GF2"])
def test_rings(ring):
    assert check_ainfty(dg_chain(3, ring)).ok


def test_instance_validation():
    b = (BasisElement("x", "A", "A", 0),)
    with pytest.raises(AInftyError):
        AInftyInstance(0, "R", ("A",), b)
    with pytest.raises(AInftyError):
        AInftyInstance(3, "Z", ("A",), b)
    with pytest.raises(AInftyError):
        AInftyInstance(0, "Z", ("A",), b + b)
    with pytest.raises(AInftyError):
        AInftyInstance(0, "Z", ("A",), (BasisElement("x", "A", "B", 0),))
    with pytest.raises(AInftyError, match="degree"):
        AInftyInstance(0, "Z", ("A",), b, {("x",): {"x": 1}})


def test_d_max_cannot_exceed_tables():
    with pytest.raises(AInftyError):
        check_ainfty(dg_chain(3), d_max=9)


# -- curvature ------------------------------------------------------------------


def test_curved_pair():
    c, w = curved_pair()
    assert check_ainfty(c).ok
    assert check_curvature_floer(c, w).ok
    assert load_curved()[1] == w


def test_removing_curvature_leaves_mu1_squared():
    c, _ = curved_pair()
    r = check_ainfty(c.with_mu(c.mu, {}))
    got = {x.inputs: x.value for x in r.residuals}
    for name in ("p", "q"):
        twice = c.apply([c.apply([{name: 1}])])
        assert got[(name,)] == twice
    assert set(got) == {("p",), ("q",)}


def test_wrong_potential_fails():
    c, _ = curved_pair()
    assert not check_curvature_floer(c, {"X": 0, "Y": 0}).ok


# -- functors --------------------------------------------------------------------


def test_gauge_functor():
    F = load_functor("gauge")
    assert check_functor(F).ok
    assert check_functor(identity_functor(F.source)).ok


def test_perturbed_functor_fails():
    F = load_functor("gauge")
    k = next(k for k in F.tables if len(k) == 2)
    tables = dict(F.tables)
    tables[k] = {n: x + 1 for n, x in tables[k].items()}
    r = check_functor(AFunctor(F.source, F.target, F.obj_map, tables))
    assert not r.ok
    assert min(x.arity for x in r.residuals) == 2


def test_functor_validation():
    c = dg_chain(3)
    with pytest.raises(AInftyError, match="object map"):
        AFunctor(c, c, {"0": "0"}, {})
    with pytest.raises(AInftyError):
        AFunctor(c, c, {x: x for x in c.objects}, {("u0",): {"v0": 1}})


def test_composition_associative_on_the_nose():
    c = dg_chain(3)
    c1, F = twisted(c, 1)
    c2, G = twisted(c1, 2)
    c3, H = twisted(c2, 3)
    left = compose_functors(H, compose_functors(G, F, 3), 3)
    right = compose_functors(compose_functors(H, G, 3), F, 3)
    for d in range(1, 4):
        for a in c.tuples(d):
            assert left.component(a) == right.component(a)
    assert check_functor(left, 3).ok


def test_identity_is_unit_for_composition():
    F = load_functor("gauge")
    for G in (compose_functors(identity_functor(F.target), F), compose_functors(F, identity_functor(F.source))):
        for d in range(1, 4):
            for a in F.source.tuples(d):
                assert G.component(a) == F.component(a)


# -- transformations ----------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(-1, 2))
def test_mu1_squares_to_zero(seed, degree):
    F = load_functor("gauge")
    S = random_prenat(F, F, degree, seed=seed, d_max=3)
    assert mu1_prenat(mu1_prenat(S, 3), 3).is_zero()


def test_identity_transformation_is_a_unit():
    F = identity_functor(dg_chain(4))
    unit = PreNat(F, F, 0, {}, {x: {f"e{x}": 1} for x in F.source.objects})
    assert mu1_prenat(unit, 3).is_zero()
    for g in (0, 1, -1, 2):
        T = random_prenat(F, F, g, seed=g + 10, d_max=3)
        left = mu2_prenat(T, unit, 3)
        right = mu2_prenat(unit, T, 3)
        sign = -1 if g % 2 else 1
        for d in range(1, 4):
            for a in F.source.tuples(d):
                assert left.component(a) == {k: sign * v for k, v in T.component(a).items()}
                assert right.component(a) == T.component(a)


def test_shipped_homotopy():
    T = load_homotopy()
    assert T.degree == HOMOTOPY_DEGREE
    assert is_homotopy(T)
    assert homotopy_report(T).checked > 0


def test_homotopic_functor_is_a_functor():
    F = load_functor("gauge")
    T = random_prenat(F, F, 0, seed=5, d_max=3, with_t0=False)
    G = homotopic_functor(F, T)
    assert check_functor(G).ok
    assert is_homotopy(PreNat(F, G, 0, T.tables))


def test_homotopies_compose():
    F = load_functor("gauge")
    T1 = random_prenat(F, F, 0, seed=1, d_max=3, with_t0=False)
    G = homotopic_functor(F, T1)
    T2 = random_prenat(G, G, 0, seed=2, d_max=3, with_t0=False)
    H = homotopic_functor(G, T2)
    T = compose_homotopies(PreNat(F, G, 0, T1.tables), PreNat(G, H, 0, T2.tables), 3)
    assert is_homotopy(T, d_max=3)


def test_homotopy_needs_degree_zero():
    F = load_functor("gauge")
    with pytest.raises(AInftyError):
        is_homotopy(random_prenat(F, F, 1, seed=0))
    with pytest.raises(AInftyError):
        homotopic_functor(F, random_prenat(F, F, 0, seed=0, with_t0=True, density=1.0))


def test_broken_homotopy_detected():
    T = load_homotopy()
    k = next(iter(T.tables))
    tables = dict(T.tables)
    tables[k] = {n: x + 1 for n, x in tables[k].items()}
    assert not is_homotopy(PreNat(T.F1, T.F2, T.degree, tables, T.t0))


# -- cohomology ------------------------------------------------------------------------


def test_identity_induces_identity_matrices():
    q = quiver_fixture("Q")
    H = cohomology_functor(identity_functor(q))
    assert H.well_defined
    for key, m in H.matrices.items():
        n = H.dims_source[key]
        assert m == tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def test_acyclic_extension_cohomology():
    dims = {g: h.dim for g, h in hom_cohomology(complex_with_acyclic(), "X", "X").items()}
    assert dims == {0: 1, 1: 0, 2: 0}


def test_inclusion_projection_inverse_on_cohomology():
    inc, proj = inclusion_projection()
    for F in (compose_functors(proj, inc), compose_functors(inc, proj)):
        H = cohomology_functor(F)
        assert H.well_defined
        assert all(m == ((1,),) for m in H.matrices.values() if m)


def test_cohomology_is_functorial():
    c = dg_chain(3, "Q")
    c1, F = twisted(c, 1)
    c2, G = twisted(c1, 2)
    HF, HG = cohomology_functor(F), cohomology_functor(G)
    HGF = cohomology_functor(compose_functors(G, F))
    for key, m in HGF.matrices.items():
        x, y, g = key
        mid = (F.obj_map[x], F.obj_map[y], g)
        assert m == mat_mul("Q", HG.matrices[mid], HF.matrices[key])


def test_cohomology_needs_a_field():
    with pytest.raises(AInftyError):
        cohomology_functor(identity_functor(quiver_fixture("Z")))


# -- JSON --------------------------------------------------------------------------------


def test_json_round_trips():
    c = dg_chain(3)
    data = instance_to_json(c)
    back = instance_from_json(json.loads(json.dumps(data)))
    # the schema groups the basis by Hom space, so only the basis order may change
    assert set(back.basis) == set(c.basis)
    assert (back.mu, back.mu0, back.objects, back.N, back.ring) == (c.mu, c.mu0, c.objects, c.N, c.ring)
    assert instance_to_json(back) == data
    F = load_functor("gauge")
    assert functor_from_json(functor_to_json(F), F.source, F.target) == F
    T = load_homotopy()
    back = prenat_from_json(prenat_to_json(T), T.F1, T.F2)
    assert back.tables == T.tables and back.degree == T.degree


# -- terms versus facets -------------------------------------------------------------------

TERM_COUNTS = {
    ("assoc", 3): 2, ("assoc", 4): 5, ("assoc", 5): 9, ("assoc", 6): 14,
    ("functor", 2): 2, ("functor", 3): 6, ("functor", 4): 13, ("functor", 5): 25,
    ("prenat-mu1", 2): 8, ("prenat-mu1", 3): 22, ("prenat-mu1", 4): 53,
    ("homotopy", 2): 6, ("homotopy", 3): 15, ("homotopy", 4): 34,
}


@pytest.mark.parametrize("key,terms", sorted(TERM_COUNTS.items()))
def test_term_facet_correspondence(key, terms):
    r = term_facet_correspondence(*key)
    assert r["ok"], r
    assert r["terms"] == terms
    assert not r["unmatched_terms"] and not r["unmatched_facets"]
    assert not r["multiplicity_errors"] and not r["tag_mismatches"]


def test_homotopy_facets_host_several_terms():
    r = term_facet_correspondence("homotopy", 3)
    assert r["facets"] == 11 and r["terms"] == 15


def test_unknown_identity():
    with pytest.raises(AInftyError):
        term_facet_correspondence("pentagonator", 3)
