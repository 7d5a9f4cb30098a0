#!/usr/bin/env python3
"""
Tests for the truncated Fock-space model and the randomized identity checks
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import algebras
from coxeter import clique_splittings, identity, normalize
from errors import InputError, ResourceCapError
from fock import (
    VertexModel,
    build_space,
    clique_parts_sum,
    conditional_expectation,
    expectation,
    fock_dimension,
    lambda_part,
    lambda_vertex,
    model_for,
    modular_J,
    projection_e,
    reduced_operator,
    reduced_tensor,
    state,
    tensor_operator,
)
from fock_checks import (
    _random_split,
    random_combination,
    random_tensor,
    run_trials,
    verify_commutator_star,
    verify_expectation_triple,
    verify_iterated_expectation,
)
from graph_core import SimpleGraph, complete_graph, cycle_graph, link, star

TOL = 1e-10
TRIALS = 200


def commutative(g: SimpleGraph, d: int = 2) -> dict:
    return {v: VertexModel.uniform(d) for v in g.vertices}


def matrices(g: SimpleGraph, n: int = 2) -> dict:
    return {v: VertexModel.matrix(n) for v in g.vertices}


def star_and_rest(space, v: str):
    around = star(space.graph, v).members
    return around, frozenset(space.graph.vertices) - {v}


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(2024)


# Vertex models

def test_hecke_model_weights():
    model = VertexModel.hecke(0.5)
    assert_allclose(model.weights, [2 / 3, 1 / 3])
    assert model.dimension == 2
    with pytest.raises(InputError):
        VertexModel.hecke(1.5)


@pytest.mark.parametrize("weights", [[0.5, 0.6], [1.0, 0.0], [0.2, 0.3, 0.4]])
def test_invalid_states_are_rejected(weights):
    with pytest.raises(InputError):
        VertexModel.diagonal(weights)


def test_scalar_models_are_rejected():
    with pytest.raises(InputError, match="scalar"):
        VertexModel.uniform(1)


@pytest.mark.parametrize(
    "model",
    [VertexModel.uniform(3), VertexModel.hecke(0.3), VertexModel.matrix(2), VertexModel.matrix(2, [0.3, 0.7])],
    ids=["uniform3", "hecke", "M2", "M2-weighted"],
)
def test_gns_basis_is_orthonormal_and_starts_at_the_unit(model):
    gram = np.array([[model.inner(bj, bi) for bj in model.basis] for bi in model.basis])
    assert_allclose(gram, np.eye(model.dimension), atol=1e-12)
    assert_allclose(model.basis[0], np.eye(model.size), atol=1e-12)


@pytest.mark.parametrize("model", [VertexModel.uniform(3), VertexModel.matrix(2, [0.3, 0.7])], ids=["uniform3", "M2-weighted"])
def test_left_multiplication_matches_the_product(model, rng):
    a, b = model.random_element(rng), model.random_element(rng)
    assert_allclose(model.left(a) @ model.coordinates(b), model.coordinates(a @ b), atol=1e-12)
    rebuilt = sum(c * basis for c, basis in zip(model.coordinates(a), model.basis))
    assert_allclose(rebuilt, a, atol=1e-12)


def test_centered_elements_have_zero_state(rng):
    model = VertexModel.matrix(3)
    assert abs(model.state(model.random_element(rng, centered=True))) < 1e-12


def test_commutative_models_accept_only_diagonal_elements():
    with pytest.raises(InputError, match="diagonal"):
        VertexModel.uniform(2).check_element(np.array([[0, 1], [0, 0]]))


def test_conjugation_needs_a_trace():
    with pytest.raises(InputError, match="tracial"):
        VertexModel.matrix(2, [0.3, 0.7]).conjugation()


def test_models_for_vertex_algebras():
    assert_allclose(model_for(algebras.hecke(0.5)).weights, [2 / 3, 1 / 3])
    assert_allclose(model_for(algebras.two_dim(0.25)).weights, [0.25, 0.75])
    assert model_for(algebras.matrix(3)).dimension == 9
    stand_in = model_for(algebras.ii1(), stand_in_dim=4)
    assert stand_in.commutative and stand_in.dimension == 4


# Space construction

def test_fock_dimension_of_an_edge():
    g = complete_graph(2)
    space = build_space(g, commutative(g), 2)
    assert space.dimension == 4
    assert fock_dimension(g, commutative(g), space.words) == 4
    assert [w.length for w, _ in space.basis] == [0, 1, 1, 2]


def test_fock_dimension_counts_legs():
    g = complete_graph(2)
    space = build_space(g, matrices(g), 2)
    assert space.dimension == 1 + 3 + 3 + 9


def test_fock_cap_is_enforced():
    g = cycle_graph(5)
    with pytest.raises(ResourceCapError) as caught:
        build_space(g, commutative(g), 6, cap=10)
    assert caught.value.cap == "fock"
    assert caught.value.limit == 10


def test_enumeration_cap_reaches_the_word_list():
    g = cycle_graph(5)
    with pytest.raises(ResourceCapError) as caught:
        build_space(g, commutative(g), 4, enumeration_cap=3)
    assert caught.value.cap == "enumeration"


def test_build_space_rejects_bad_requests():
    g = cycle_graph(4)
    with pytest.raises(InputError, match="no vertex model"):
        build_space(g, {"1": VertexModel.uniform(2)}, 2)
    with pytest.raises(InputError):
        build_space(g, commutative(g), -1)


# Vertex actions

def test_adjacent_vertices_commute_exactly(rng):
    g = complete_graph(2)
    space = build_space(g, matrices(g), 2)
    a = space.models["1"].random_element(rng)
    b = space.models["2"].random_element(rng)
    x, y = lambda_vertex(space, "1", a), lambda_vertex(space, "2", b)
    assert np.abs((x @ y - y @ x).matrix).max() == 0.0


def test_lambda_is_multiplicative_and_star_preserving(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g, 3), 4)
    model = space.models["1"]
    a, b = model.random_element(rng), model.random_element(rng)
    product = (lambda_vertex(space, "1", a) @ lambda_vertex(space, "1", b)).matrix
    direct = lambda_vertex(space, "1", a @ b).matrix
    cols = space.domain(2)
    assert_allclose(product[:, cols], direct[:, cols], atol=1e-12)

    adjoint = lambda_vertex(space, "1", a).adjoint().matrix
    starred = lambda_vertex(space, "1", a.conj().T).matrix
    cols = space.domain(1)
    assert_allclose(adjoint[:, cols], starred[:, cols], atol=1e-12)


def test_vertex_state_is_preserved(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g), 3)
    a = space.models["2"].random_element(rng)
    assert state(space, lambda_vertex(space, "2", a)) == pytest.approx(space.models["2"].state(a))


def test_reduced_products_are_free(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g), 3)
    elements = [space.models[v].random_element(rng, centered=True) for v in ("1", "3", "1")]
    x = reduced_operator(space, ["1", "3", "1"], elements)
    assert abs(state(space, x)) < 1e-12


def test_reduced_tensor_validation(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g), 1)
    centered = space.models["1"].random_element(rng, centered=True)
    with pytest.raises(InputError, match="reduced"):
        reduced_tensor(space, ["1", "1"], [centered, centered])
    with pytest.raises(InputError, match="state-zero"):
        reduced_tensor(space, ["1"], [np.eye(2)])
    with pytest.raises(InputError, match="one element per letter"):
        reduced_tensor(space, ["1"], [])
    with pytest.raises(InputError, match="beyond depth"):
        reduced_operator(space, ["1", "3"], [centered, centered])
    with pytest.raises(InputError):
        lambda_vertex(space, "9", centered)


# Clique splittings

def test_operator_is_the_sum_of_its_clique_parts(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g, 3), 4)
    for word in space.words:
        if not 0 < word.length <= 2:
            continue
        t = random_tensor(space, word, rng)
        whole = tensor_operator(space, t).matrix
        parts = clique_parts_sum(space, t, clique_splittings(word)).matrix
        cols = space.domain(word.length)
        assert np.abs(whole[:, cols] - parts[:, cols]).max() < 1e-12


def test_lambda_part_rejects_other_triples(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g), 2)
    t = reduced_tensor(space, ["1"], [space.models["1"].random_element(rng, centered=True)])
    e = identity(g)
    with pytest.raises(InputError, match="clique splitting"):
        lambda_part(space, (e, e, e), t)


# Conditional expectations

def test_expectation_keeps_the_supported_terms(rng):
    g = cycle_graph(5)
    space = build_space(g, commutative(g), 3)
    words = [w for w in space.words if 0 < w.length <= 2]
    terms = [random_tensor(space, words[i], rng) for i in rng.choice(len(words), 6, replace=False)]
    total = space.zero()
    for t in terms:
        total = total + tensor_operator(space, t)
    lam = {"1", "2", "3"}
    omega = space.omega()
    assert_allclose(
        conditional_expectation(space, lam, terms).apply(omega),
        expectation(space, lam, total).apply(omega),
        atol=1e-12,
    )


@pytest.mark.parametrize("n", [4, 5])
def test_expectations_compose_to_the_link(n, rng):
    g = cycle_graph(n)
    space = build_space(g, commutative(g), 3)
    around, rest = star_and_rest(space, "1")
    omega = space.omega()
    for _ in range(5):
        x = random_combination(space, space.words, rng, terms=4)
        composed = expectation(space, around, expectation(space, rest, x))
        direct = expectation(space, link(g, ["1"]).members, x)
        assert_allclose(composed.apply(omega), direct.apply(omega), atol=1e-12)


def test_projection_e_is_an_orthogonal_projection():
    g = cycle_graph(4)
    space = build_space(g, matrices(g), 2)
    e = projection_e(space, {"1", "2"}).matrix
    assert_allclose(e @ e, e, atol=1e-14)
    assert_allclose(e, e.conj().T, atol=1e-14)
    assert_allclose(projection_e(space, g.vertices).matrix, np.eye(space.dimension))
    vacuum = projection_e(space, ()).matrix
    assert np.linalg.matrix_rank(vacuum) == 1
    assert_allclose(vacuum, np.outer(space.omega(), space.omega()))


def test_expectation_onto_the_empty_subgraph_is_the_state(rng):
    g = cycle_graph(5)
    space = build_space(g, {v: VertexModel.hecke(0.4) for v in g.vertices}, 3)
    x = random_combination(space, space.words, rng, terms=4)
    assert_allclose(expectation(space, (), x).matrix, state(space, x) * np.eye(space.dimension), atol=1e-12)


def test_expectation_is_a_bimodule_map(rng):
    g = cycle_graph(5)
    space = build_space(g, commutative(g), 4)
    lam = {"1", "2", "3"}
    inside = [w for w in space.words if w.support <= lam and w.length <= 1]
    short = [w for w in space.words if w.length <= 2]
    omega = space.omega()
    for _ in range(5):
        y, z = random_combination(space, inside, rng), random_combination(space, inside, rng)
        x = random_combination(space, short, rng, terms=4)
        lhs = expectation(space, lam, y @ x @ z).apply(omega)
        rhs = (y @ expectation(space, lam, x) @ z).apply(omega)
        assert_allclose(lhs, rhs, atol=1e-12)


# Modular conjugation

def test_modular_conjugation_is_an_involution_fixing_the_vacuum():
    g = cycle_graph(4)
    space = build_space(g, matrices(g), 2)
    J = modular_J(space)
    assert J.antilinear
    assert_allclose(J.apply(space.omega()), space.omega(), atol=1e-12)
    square = J @ J
    assert not square.antilinear
    assert_allclose(square.matrix, np.eye(space.dimension), atol=1e-12)


def test_modular_conjugation_reverses_words(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g, 3), 3)
    a1 = space.models["1"].random_element(rng, centered=True)
    a3 = space.models["3"].random_element(rng, centered=True)
    x = reduced_operator(space, ["1", "3"], [a1, a3])
    reversed_x = reduced_operator(space, ["3", "1"], [a3.conj().T, a1.conj().T])
    omega = space.omega()
    assert_allclose(modular_J(space).apply(x.apply(omega)), reversed_x.apply(omega), atol=1e-12)


@pytest.mark.parametrize(
    "g, models, depth",
    [
        (cycle_graph(4), matrices(cycle_graph(4)), 2),
        (cycle_graph(5), {v: VertexModel.hecke(0.4) for v in cycle_graph(5).vertices}, 3),
    ],
    ids=["Z4-M2", "Z5-hecke"],
)
def test_modular_conjugation_is_antiunitary(g, models, depth, rng):
    space = build_space(g, models, depth)
    J = modular_J(space)
    xi = rng.normal(size=space.dimension) + 1j * rng.normal(size=space.dimension)
    eta = rng.normal(size=space.dimension) + 1j * rng.normal(size=space.dimension)
    assert np.vdot(J.apply(xi), J.apply(eta)) == pytest.approx(np.vdot(eta, xi), abs=1e-10)


def test_modular_conjugation_needs_traces():
    g = complete_graph(2)
    models = {"1": VertexModel.hecke(0.5), "2": VertexModel.matrix(2, [0.3, 0.7])}
    space = build_space(g, models, 2)
    with pytest.raises(InputError, match="tracial"):
        modular_J(space)


# Randomized checks

SPACES = [
    ("K2", complete_graph(2), commutative, 3),
    ("Z4", cycle_graph(4), commutative, 3),
    ("Z5", cycle_graph(5), commutative, 3),
    ("K2-M2", complete_graph(2), matrices, 2),
]


@pytest.fixture(scope="module", params=SPACES, ids=[s[0] for s in SPACES])
def space(request):
    _, g, make, depth = request.param
    return build_space(g, make(g), depth)


def test_expectation_triple_holds(space):
    around, rest = star_and_rest(space, "1")
    report = verify_expectation_triple(space, around, rest, trials=TRIALS, seed=1)
    assert report.passed
    assert report.max_residual < TOL
    assert report.trials == TRIALS


def test_iterated_expectation_holds(space):
    around, rest = star_and_rest(space, "1")
    report = verify_iterated_expectation(space, around, rest, trials=TRIALS, seed=2)
    assert report.passed
    assert report.max_residual < TOL


@pytest.mark.parametrize("make", [commutative, matrices], ids=["commutative", "M2"])
def test_expectation_checks_on_opposite_corners_of_a_square(make):
    g = cycle_graph(4)
    space = build_space(g, make(g), 3 if make is commutative else 2)
    triple = verify_expectation_triple(space, {"1"}, {"3"}, trials=TRIALS, seed=6)
    iterated = verify_iterated_expectation(space, {"1"}, {"3"}, trials=TRIALS, seed=7)
    assert triple.passed and triple.max_residual < TOL
    assert iterated.passed and iterated.max_residual < TOL
    assert triple.details == {"gamma1": ["1"], "gamma2": ["3"]}


def test_commutator_lives_on_the_star(space):
    report = verify_commutator_star(space, "1", trials=TRIALS, seed=3)
    assert report.passed
    assert report.max_residual < TOL
    assert report.details["vertex"] == "1"


def test_expectation_triple_with_hecke_states():
    g = cycle_graph(5)
    space = build_space(g, {v: VertexModel.hecke(0.4) for v in g.vertices}, 3)
    report = verify_expectation_triple(space, {"1", "2"}, {"2", "3", "4"}, trials=10, seed=5)
    assert report.passed


def test_commutator_check_requirements():
    g = cycle_graph(4)
    shallow = build_space(g, commutative(g), 1)
    with pytest.raises(InputError, match="depth"):
        verify_commutator_star(shallow, "1")
    weighted = build_space(g, {v: VertexModel.matrix(2, [0.3, 0.7]) for v in g.vertices}, 2)
    with pytest.raises(InputError, match="tracial"):
        verify_commutator_star(weighted, "1")
    hecke = build_space(g, {v: VertexModel.hecke(0.5) for v in g.vertices}, 2)
    assert verify_commutator_star(hecke, "1", trials=5, seed=4).passed
    with pytest.raises(InputError, match="unknown vertex"):
        verify_commutator_star(build_space(g, commutative(g), 2), "7")


def test_reports_do_not_depend_on_the_worker_count():
    g = cycle_graph(5)
    space = build_space(g, commutative(g), 3)
    around, rest = star_and_rest(space, "1")
    serial = verify_expectation_triple(space, around, rest, trials=8, seed=11, workers=1)
    threaded = verify_expectation_triple(space, around, rest, trials=8, seed=11, workers=4)
    assert serial.to_dict() == threaded.to_dict()


def draw(rng: np.random.Generator) -> float:
    return float(rng.random())


def test_run_trials_is_seeded():
    assert run_trials(draw, 5, seed=9) == run_trials(draw, 5, seed=9, workers=3)
    assert run_trials(draw, 5, seed=9) != run_trials(draw, 5, seed=10)
    with pytest.raises(InputError):
        run_trials(draw, 0, seed=9)
    with pytest.raises(InputError):
        run_trials(draw, 3, seed=9, workers=0)


def test_splits_that_never_reduce_are_reported(rng):
    g = cycle_graph(4)
    space = build_space(g, commutative(g), 3)
    one = normalize(g, ["1"])
    assert _random_split(rng, [one], [one], [one], 3) is None
    e = identity(g)
    assert _random_split(rng, [e], [one], [e], 3) == (e, one, e)
    around, rest = star_and_rest(space, "1")
    report = verify_iterated_expectation(space, around, rest, trials=10, seed=8)
    assert report.details["degenerate_splits"] == 0


def test_report_serialization(space):
    report = verify_commutator_star(space, "2", trials=2, seed=0)
    data = report.to_dict()
    assert set(data) == {"identity", "passed", "trials", "max_residual", "tolerance", "seed", "depth", "dimension", "details"}
    assert data["identity"] == "commutator_star"
    assert data["dimension"] == space.dimension
