import random
from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from bellctx import (
    bell_to_ctx,
    check_local,
    check_no_signalling,
    check_noncontextual,
    ctx_to_bell,
    embed_repeated_preparations,
    nc_polytope,
    validate_behaviour,
    verify_certificate,
)
from bellctx.catalogue import (
    FIVE_PREP_FACET,
    five_preparation_contextual,
    five_preparation_scenario,
    pr_box,
    split_model,
)
from bellctx.classicality import (
    Budget,
    OntologicalModel,
    deterministic_model_assignments,
    local_vertex_count,
    local_vertices,
    polytope_self_check,
    response_function_atlas,
    verify_facet,
)
from bellctx.core import BellScenario, CtxScenario
from bellctx.errors import BudgetExceeded
from bellctx.polytope import convex_hull
from bellctx.sampling import random_nc_behaviour, random_ns_form_behaviour

from oracles import fine_local
from strategies import local_correlations, ns_correlations

CHSH = BellScenario((2, 2), (2, 2))


@pytest.fixture(scope="module")
def five_prep():
    return nc_polytope(five_preparation_scenario())


# ------------------------------------------------------------------ Bell side


def test_local_vertex_counts():
    assert len(local_vertices(CHSH)) == 16
    sc = BellScenario((2, 2, 1), (2, 2))
    assert local_vertex_count(sc) == 16 and len(local_vertices(sc)) == 16
    assert all(check_no_signalling(v).residual == 0 for v in local_vertices(sc))


def test_vertex_budget():
    with pytest.raises(BudgetExceeded):
        local_vertices(CHSH, Budget(vertices=15))


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("BELLCTX_BUDGET", "7")
    assert Budget.from_env() == Budget(7, 7)
    assert Budget.from_env(9) == Budget(9, 9)
    monkeypatch.delenv("BELLCTX_BUDGET")
    assert Budget.from_env() == Budget()


def test_deterministic_vertex_is_its_own_model():
    for v in local_vertices(CHSH):
        verdict = check_local(v)
        assert verdict.member and len(verdict.weights) == 1 and verdict.weights[0][2] == 1


def test_pr_box_violates_a_chsh_facet():
    p = pr_box()
    verdict = check_local(p)
    assert not verdict.member
    assert verify_certificate(p, verdict).ok
    ineq = verdict.inequality
    values = [ineq.evaluate(v) for v in local_vertices(CHSH)]
    assert min(values) == 0
    # CH form: deterministic points take the values {0, 1} on (bound - CH) and the PR box -1/2
    assert ineq.violation / max(values) == F(1, 2)
    hull = convex_hull([v.values() for v in local_vertices(CHSH)])
    cells = list(CHSH.cells())
    assert hull.canonical([ineq.coefficients[c] for c in cells], ineq.constant) in set(hull.facets)


def test_local_facets_of_chsh_scenario():
    hull = convex_hull([v.values() for v in local_vertices(CHSH)])
    n = CHSH.num_cells()
    positivity = {hull.canonical([int(i == j) for j in range(n)], 0) for i in range(n)}
    facets = set(hull.facets)
    assert hull.dimension == 8
    assert len(facets) == 24 and len(facets & positivity) == 16


@given(ns_correlations(CHSH))
def test_locality_matches_chsh_oracle(p):
    verdict = check_local(p)
    assert verdict.member == fine_local(p)
    assert verify_certificate(p, verdict).ok


@settings(max_examples=25)
@given(local_correlations())
def test_local_mixtures_are_members(p):
    verdict = check_local(p)
    assert verdict.member and verify_certificate(p, verdict).ok


# --------------------------------------------------------- contextuality side


def test_atlas_sizes():
    assert response_function_atlas((2, 2)) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert len(response_function_atlas((3,))) == 3
    assert len(response_function_atlas((2, 2, 2))) == 8
    with pytest.raises(BudgetExceeded):
        response_function_atlas((2, 2, 2), Budget(atlas=7))


def test_unconstrained_single_preparation_polytope():
    poly = nc_polytope(CtxScenario(("1",), (2,)))
    assert poly.dimension == 1
    assert {(f.coefficients, f.constant) for f in poly.facets} == {((1,), 0), ((-1,), 1)}
    assert all(f.positivity for f in poly.facets)


def test_pr_image_is_contextual():
    q = bell_to_ctx(pr_box()).behaviour
    verdict = check_noncontextual(q)
    assert not verdict.member and verdict.inequality.violation > 0
    assert verify_certificate(q, verdict).ok
    poly = nc_polytope(q.scenario)
    assert verify_certificate(q, verdict, vertices=poly.vertices).ok


def test_five_preparation_polytope(five_prep):
    poly = five_prep
    assert len(poly.facets) == 60 and poly.positivity_count == 20 and poly.dimension == 6
    assert polytope_self_check(poly)
    assert all(verify_facet(poly, f).ok for f in poly.facets)
    quoted = poly.canonical(*FIVE_PREP_FACET)
    q = five_preparation_contextual()
    violated = poly.violated_facets(q)
    assert [(f.coefficients, f.constant) for f, _ in violated] == [quoted]
    assert violated[0][1] == F(1, 40)
    assert not poly.contains(q)


def test_quoted_facet_has_the_printed_coefficients(five_prep):
    coeffs, const = FIVE_PREP_FACET
    normal, c = five_prep.canonical(coeffs, const)
    named = {five_prep.coordinates[i]: v for i, v in enumerate(normal) if v}
    # the printed coordinates are all free ones, so canonicalisation leaves the form unchanged
    assert named == {k: int(v) for k, v in coeffs.items()} and c == const


def test_lp_certificate_is_valid_on_the_polytope(five_prep):
    q = five_preparation_contextual()
    verdict = check_noncontextual(q)
    check = verify_certificate(q, verdict, vertices=five_prep.vertices)
    assert check.ok, check.defects


def test_polytope_vertices_are_members(five_prep):
    sc = five_preparation_scenario()
    coords = five_prep.coordinates
    for v in five_prep.vertices[:20]:
        table = {}
        for (label, y, b), val in zip(coords, v):
            table[label, y, 1], table[label, y, 2] = val, 1 - val
        q = validate_behaviour(table, sc)
        verdict = check_noncontextual(q)
        assert verdict.member and verify_certificate(q, verdict).ok


def test_split_behaviour_and_hand_model():
    emb = embed_repeated_preparations(five_preparation_scenario(), five_preparation_contextual())
    model = split_model(emb.scenario)
    check = verify_certificate(emb.behaviour, model)
    assert check.ok and check.counts == {"normalisations": 7, "equivalence_equalities": 8, "data_equalities": 14}
    # the same table read without swapping the two measurements is not a model of q'_c
    unswapped = OntologicalModel(deterministic_model_assignments(((2, 1, 2, 1), (2, 2, 1, 1))), model.measures)
    assert not verify_certificate(emb.behaviour, unswapped).ok


def test_model_defects_are_located():
    emb = embed_repeated_preparations(five_preparation_scenario(), five_preparation_contextual())
    model = split_model(emb.scenario)
    measures = dict(model.measures)
    measures["3"] = (F(-1, 10),) + measures["3"][1:]
    check = verify_certificate(emb.behaviour, OntologicalModel(model.assignments, measures))
    assert not check.ok
    assert any(d.startswith("preparation 3, ontic state 0: negative weight") for d in check.defects)


def test_local_defects_are_located():
    p = pr_box()
    verdict = check_local(p)
    ineq = verdict.inequality
    check = verify_certificate(p, replace(verdict, inequality=replace(ineq, violation=ineq.violation + 1)))
    assert not check.ok and any("claimed violation" in d for d in check.defects)


@given(st.integers(0, 2**32), st.booleans())
def test_nc_membership_matches_chsh_oracle_through_the_map(seed, nc):
    rng = random.Random(seed)
    if nc:
        q = random_nc_behaviour(rng, (2, 2), (2, 2))
    else:
        q = random_ns_form_behaviour(rng, (2, 2), (2, 2))
    p = ctx_to_bell(q)
    verdict = check_noncontextual(q)
    assert verdict.member == fine_local(p)
    assert verify_certificate(q, verdict).ok
    if nc:
        assert verdict.member


@settings(max_examples=25)
@given(local_correlations())
def test_local_images_are_noncontextual(p):
    q = bell_to_ctx(p).behaviour
    verdict = check_noncontextual(q)
    assert verdict.member and verify_certificate(q, verdict).ok
