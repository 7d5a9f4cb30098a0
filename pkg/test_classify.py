#!/usr/bin/env python3
"""
Tests for vertex algebra metadata and the structural classification of graph products
"""

import itertools
import random

import networkx as nx
import pytest

import algebras
from algebras import FLAG_NAMES, VertexAlgebra
from classify import (
    IsoStatus,
    amenable_graph_product,
    atomic_graph_product,
    cartan_absence,
    diffuse_graph_product,
    free_product_decomposition,
    freely_indecomposable,
    full_report,
    ii1_factor,
    in_C_rigid,
    isomorphism_obstruction,
    prime,
    prime_factorization,
    strongly_solid,
)
from errors import InputError, ResourceCapError
from graph_core import (
    SimpleGraph,
    complete_graph,
    cycle_graph,
    disjoint_union,
    edgeless_graph,
    is_connected,
    is_irreducible,
    join,
)
from verdicts import TriState, Verdict

YES, NO, UNKNOWN = Verdict.YES, Verdict.NO, Verdict.UNKNOWN


def c_vertex() -> VertexAlgebra:
    """A strong (AO) non-amenable II1 factor such as a free group factor."""
    return algebras.ii1(in_C_vertex=TriState.yes(), strongly_solid=TriState.yes())


def hyperfinite() -> VertexAlgebra:
    return algebras.ii1(amenable=TriState.yes(), separable_predual=TriState.yes())


def everywhere(g: SimpleGraph, make) -> dict:
    return {v: make() for v in g.vertices}


FIGURE_ONE = join(cycle_graph(5, "a"), cycle_graph(5, "b"))


# Vertex algebras

def test_hecke_vertex_flags():
    a = algebras.hecke(0.5)
    assert a.dimension == 2
    assert a.two_dim_alpha == pytest.approx(2 / 3)
    assert a.has_trace_zero_unitary.is_no
    assert algebras.hecke(1.0).has_trace_zero_unitary.is_yes
    assert a.amenable.is_yes and a.atomic.is_yes and a.diffuse.is_no


def test_two_dim_vertex_matches_hecke():
    a = algebras.two_dim(0.25)
    assert a.hecke_q == pytest.approx(1 / 3)
    assert algebras.two_dim(0.5).has_trace_zero_unitary.is_yes


def test_c_vertex_derivations():
    a = c_vertex()
    assert a.amenable.is_no
    assert a.prime.is_yes
    assert a.in_C_vertex.is_yes
    assert a.diffuse.is_yes and a.dimension is None


def test_custom_requires_consistent_flags():
    with pytest.raises(InputError, match="diffuse = yes requires infinite dimension"):
        algebras.custom(4, diffuse=TriState.yes())
    with pytest.raises(InputError, match="amenable algebras are strongly solid"):
        algebras.custom(None, amenable=TriState.yes(), strongly_solid=TriState.no())
    with pytest.raises(InputError, match="scalar"):
        algebras.custom(1)


def test_matrix_rejects_scalars():
    with pytest.raises(InputError):
        algebras.matrix(1)


def test_refine_only_fills_unknown_flags():
    a = algebras.ii1()
    refined = algebras.refine(a, strongly_solid=TriState.yes("shown elsewhere"))
    assert refined.strongly_solid.is_yes
    with pytest.raises(InputError, match="already"):
        algebras.refine(refined, strongly_solid=TriState.no())


def test_refine_derives_class_membership_again():
    a = algebras.ii1()
    assert a.in_C_vertex.is_unknown
    yes = TriState.yes("shown elsewhere")
    member = algebras.refine(a, strong_AO=yes, amenable=TriState.no("shown elsewhere"), separable_predual=yes)
    assert member.in_C_vertex.is_yes
    assert algebras.refine(a, amenable=yes).in_C_vertex.is_no
    assert algebras.refine(a, separable_predual=yes).in_C_vertex.is_unknown
    decided = algebras.ii1(in_C_vertex=TriState.no("known"))
    assert algebras.refine(decided, separable_predual=yes).in_C_vertex.verdict is NO


# Amenability, atomicity, diffuseness

def test_amenable_examples():
    dihedral = edgeless_graph(2)
    assert amenable_graph_product(dihedral, everywhere(dihedral, lambda: algebras.hecke(0.5))).verdict is YES
    three = edgeless_graph(3)
    assert amenable_graph_product(three, everywhere(three, lambda: algebras.hecke(1.0))).verdict is NO
    k2 = complete_graph(2)
    assert amenable_graph_product(k2, everywhere(k2, hyperfinite)).verdict is YES


def test_amenable_needs_two_dimensional_pairs():
    dihedral = edgeless_graph(2)
    desc = {"1": algebras.matrix(2), "2": algebras.hecke(1.0)}
    assert amenable_graph_product(dihedral, desc).verdict is NO


def test_atomic_examples():
    k3 = complete_graph(3)
    assert atomic_graph_product(k3, everywhere(k3, lambda: algebras.matrix(2))).verdict is YES
    z4 = cycle_graph(4)
    assert atomic_graph_product(z4, everywhere(z4, lambda: algebras.hecke(0.5))).verdict is NO
    k2 = complete_graph(2)
    vague = algebras.custom(None, amenable=TriState.yes(), atomic=TriState.unknown("open"),
                            diffuse=TriState.unknown("open"), strongly_solid=TriState.yes())
    assert atomic_graph_product(k2, {"1": algebras.matrix(2), "2": vague}).verdict is UNKNOWN


def test_diffuse_examples():
    three = edgeless_graph(3)
    assert diffuse_graph_product(three, everywhere(three, lambda: algebras.hecke(1.0))).verdict is YES
    dihedral = edgeless_graph(2)
    assert diffuse_graph_product(dihedral, everywhere(dihedral, lambda: algebras.hecke(0.5))).verdict is NO
    z5 = cycle_graph(5)
    assert diffuse_graph_product(z5, everywhere(z5, c_vertex)).verdict is YES


def test_diffuse_on_complete_graphs():
    k2 = complete_graph(2)
    assert diffuse_graph_product(k2, {"1": c_vertex(), "2": algebras.matrix(3)}).verdict is YES
    assert diffuse_graph_product(k2, {"1": algebras.matrix(2), "2": algebras.matrix(3)}).verdict is NO


def test_diffuse_outside_criteria_is_unknown():
    dihedral = edgeless_graph(2)
    desc = {"1": algebras.hecke(0.5), "2": algebras.matrix(2)}
    verdict = diffuse_graph_product(dihedral, desc)
    assert verdict.verdict is UNKNOWN
    assert "outside" in verdict.provenance


def test_empty_graph_product_is_scalar():
    empty = SimpleGraph.from_edges([])
    assert amenable_graph_product(empty, {}).verdict is YES
    assert atomic_graph_product(empty, {}).verdict is YES
    assert diffuse_graph_product(empty, {}).verdict is NO
    assert strongly_solid(empty, {}).verdict is YES


def test_missing_descriptor_is_an_input_error():
    with pytest.raises(InputError, match="no vertex algebra"):
        amenable_graph_product(edgeless_graph(2), {"1": algebras.hecke(0.5)})


# Strong solidity

def test_strong_solidity_examples():
    three = edgeless_graph(3)
    assert strongly_solid(three, everywhere(three, lambda: algebras.hecke(1.0))).verdict is YES

    k2 = complete_graph(2)
    free_group = c_vertex()
    assert strongly_solid(k2, {"1": free_group, "2": hyperfinite()}).verdict is NO
    assert strongly_solid(k2, {"1": free_group, "2": algebras.matrix(2)}).verdict is YES


def test_strong_solidity_sweep_cap():
    big = edgeless_graph(5)
    with pytest.raises(ResourceCapError) as caught:
        strongly_solid(big, everywhere(big, lambda: algebras.hecke(1.0)), cap=4)
    assert caught.value.limit == 4


POOL = (
    lambda: algebras.hecke(0.3),
    lambda: algebras.hecke(1.0),
    lambda: algebras.matrix(2),
    c_vertex,
    hyperfinite,
)


def random_instance(rng: random.Random, max_vertices: int):
    n = rng.randint(1, max_vertices)
    labels = [str(i) for i in range(1, n + 1)]
    edges = [pair for pair in itertools.combinations(labels, 2) if rng.random() < 0.5]
    g = SimpleGraph.from_edges(labels, edges)
    return g, {v: rng.choice(POOL)() for v in labels}


def test_strong_solidity_is_hereditary():
    rng = random.Random(7)
    solid = 0
    for _ in range(500):
        g, desc = random_instance(rng, 8)
        if not strongly_solid(g, desc).is_yes:
            continue
        solid += 1
        for size in range(1, len(g) + 1):
            for members in itertools.combinations(g.vertices, size):
                assert strongly_solid(g.induced(members), desc).is_yes, members
    assert solid > 0


def test_amenable_products_are_never_reported_not_strongly_solid():
    rng = random.Random(19)
    for _ in range(300):
        g, desc = random_instance(rng, 6)
        if amenable_graph_product(g, desc).is_yes:
            assert not strongly_solid(g, desc).is_no
        if atomic_graph_product(g, desc).is_yes:
            assert not diffuse_graph_product(g, desc).is_yes


# Factoriality and primeness

def test_prime_examples():
    z5 = cycle_graph(5)
    assert prime(z5, everywhere(z5, c_vertex)).verdict is YES
    k2 = complete_graph(2)
    assert prime(k2, everywhere(k2, c_vertex)).verdict is NO
    g = join(cycle_graph(5), SimpleGraph.from_edges(["m"]))
    desc = everywhere(cycle_graph(5), c_vertex)
    desc["m"] = algebras.matrix(2)
    assert ii1_factor(g, desc).verdict is YES
    assert prime(g, desc).verdict is YES


def test_prime_of_single_vertex_uses_its_flag():
    single = SimpleGraph.from_edges(["v"])
    assert prime(single, {"v": c_vertex()}).verdict is YES
    assert prime(single, {"v": hyperfinite()}).verdict is NO


def test_prime_of_hecke_irreducible_graph():
    z5 = cycle_graph(5)
    assert prime(z5, everywhere(z5, lambda: algebras.hecke(1.0))).verdict is YES


def test_prime_biconditional_with_ii1_vertices():
    rng = random.Random(31)
    for _ in range(150):
        g, _ = random_instance(rng, 7)
        if len(g) < 2:
            continue
        desc = {v: rng.choice((c_vertex, hyperfinite))() for v in g.vertices}
        assert prime(g, desc).is_yes == is_irreducible(g)


def test_ii1_factor_assumption_overrides():
    dihedral = edgeless_graph(2)
    desc = everywhere(dihedral, lambda: algebras.hecke(0.5))
    assert ii1_factor(dihedral, desc, assume=True).verdict is YES
    assert ii1_factor(dihedral, desc, assume=False).verdict is NO


def test_freely_indecomposable_examples():
    z5 = cycle_graph(5)
    assert freely_indecomposable(z5, everywhere(z5, c_vertex)).verdict is YES
    two = disjoint_union(cycle_graph(5, "a"), cycle_graph(5, "b"))
    assert freely_indecomposable(two, everywhere(two, c_vertex)).verdict is NO
    desc = everywhere(z5, c_vertex)
    desc["3"] = algebras.matrix(2)
    assert freely_indecomposable(z5, desc).verdict is UNKNOWN


def test_freely_indecomposable_iff_connected():
    for graph in nx.graph_atlas_g():
        if not 2 <= graph.number_of_nodes() <= 6:
            continue
        labels = [str(v) for v in graph.nodes]
        g = SimpleGraph.from_edges(labels, [(str(u), str(v)) for u, v in graph.edges])
        assert freely_indecomposable(g, everywhere(g, c_vertex)).is_yes == is_connected(g)


def test_cartan_absence_examples():
    z6 = cycle_graph(6)
    assert cartan_absence(z6, everywhere(z6, c_vertex)).verdict is YES
    k3 = complete_graph(3)
    assert cartan_absence(k3, everywhere(k3, c_vertex)).verdict is UNKNOWN
    desc = everywhere(z6, c_vertex)
    desc["4"] = algebras.hecke(0.5)
    assert cartan_absence(z6, desc).verdict is UNKNOWN


def test_disconnected_graphs_have_infinite_radius_for_cartan():
    two = disjoint_union(cycle_graph(3, "a"), cycle_graph(3, "b"))
    assert cartan_absence(two, everywhere(two, c_vertex)).verdict is YES


# Monotonicity under refinement

OPEN_FLAGS = ("amenable", "strongly_solid", "has_trace_zero_unitary", "is_II1_factor", "separable_predual")


def random_open_vertex(rng: random.Random) -> VertexAlgebra:
    flags = {"atomic": TriState.no(), "diffuse": TriState.yes()}
    for name in OPEN_FLAGS:
        flags[name] = rng.choice((TriState.yes(), TriState.no(), TriState.unknown("open")))
    return algebras.custom(None, **flags)


def verdicts(g: SimpleGraph, desc) -> dict:
    return {
        "amenable": amenable_graph_product(g, desc),
        "atomic": atomic_graph_product(g, desc),
        "diffuse": diffuse_graph_product(g, desc),
        "strongly_solid": strongly_solid(g, desc),
        "ii1_factor": ii1_factor(g, desc),
        "prime": prime(g, desc),
        "freely_indecomposable": freely_indecomposable(g, desc),
        "cartan_free": cartan_absence(g, desc),
        "in_C_rigid": in_C_rigid(g, desc),
    }


def test_refining_unknown_flags_never_flips_a_decisive_verdict():
    rng = random.Random(1234)
    checked = 0
    while checked < 150:
        g, desc = random_instance(rng, 5)
        try:
            for v in g.vertices:
                if rng.random() < 0.5:
                    desc[v] = random_open_vertex(rng)
        except InputError:
            continue
        before = verdicts(g, desc)
        refined = dict(desc)
        try:
            for v, a in desc.items():
                changes = {
                    name: rng.choice((TriState.yes("refined"), TriState.no("refined")))
                    for name in OPEN_FLAGS
                    if getattr(a, name).is_unknown
                }
                refined[v] = algebras.refine(a, **changes)
        except InputError:
            continue
        after = verdicts(g, refined)
        for name, state in before.items():
            if state.is_decisive:
                assert after[name].verdict is state.verdict, name
        checked += 1


# Factorizations and isomorphism obstructions

def test_prime_factorization_examples():
    records = prime_factorization(FIGURE_ONE, everywhere(FIGURE_ONE, c_vertex))
    assert [set(r.subset.members) for r in records] == [
        {f"a{i}" for i in range(1, 6)},
        {f"b{i}" for i in range(1, 6)},
    ]
    assert all(r.verdict.is_yes for r in records)
    assert all("unique" in r.provenance for r in records)

    k3 = complete_graph(3)
    records = prime_factorization(k3, everywhere(k3, c_vertex))
    assert [len(r.subset) for r in records] == [1, 1, 1]
    z5 = cycle_graph(5)
    assert len(prime_factorization(z5, everywhere(z5, c_vertex))) == 1


def test_prime_factorization_outside_rigid_class():
    z4 = cycle_graph(4)
    records = prime_factorization(z4, everywhere(z4, c_vertex))
    assert all("outside C_Rigid" in r.provenance for r in records)


def test_free_product_decomposition_examples():
    two = disjoint_union(cycle_graph(5, "a"), cycle_graph(5, "b"))
    records = free_product_decomposition(two, everywhere(two, c_vertex))
    assert len(records) == 2
    assert all(r.verdict.is_yes for r in records)

    z6 = cycle_graph(6)
    assert len(free_product_decomposition(z6, everywhere(z6, c_vertex))) == 1

    mixed = disjoint_union(cycle_graph(4, "a"), cycle_graph(5, "b"))
    records = free_product_decomposition(mixed, everywhere(mixed, c_vertex))
    assert [len(r.subset) for r in records] == [4, 5]
    assert "component not rigid" in records[0].provenance
    assert "component not rigid" not in records[1].provenance


def test_isomorphism_obstruction_examples():
    z5, z6, z4 = cycle_graph(5), cycle_graph(6), cycle_graph(4)
    result = isomorphism_obstruction(z5, everywhere(z5, c_vertex), z6, everywhere(z6, c_vertex))
    assert result.status is IsoStatus.NOT_ISOMORPHIC

    result = isomorphism_obstruction(z4, everywhere(z4, c_vertex), z4, everywhere(z4, c_vertex))
    assert result.status is IsoStatus.INAPPLICABLE

    result = isomorphism_obstruction(z5, everywhere(z5, c_vertex), z4, everywhere(z4, c_vertex))
    assert result.status is IsoStatus.INAPPLICABLE

    result = isomorphism_obstruction(z5, everywhere(z5, c_vertex), z5, everywhere(z5, c_vertex))
    assert result.status is IsoStatus.NO_OBSTRUCTION
    assert result.count == 10 and not result.truncated


def test_isomorphism_listing_is_capped():
    z5 = cycle_graph(5)
    result = isomorphism_obstruction(z5, everywhere(z5, c_vertex), z5, everywhere(z5, c_vertex), list_cap=3)
    assert result.count == 3 and result.truncated


def test_isomorphism_obstruction_needs_c_vertex_algebras():
    z5 = cycle_graph(5)
    result = isomorphism_obstruction(z5, everywhere(z5, hyperfinite), z5, everywhere(z5, c_vertex))
    assert result.status is IsoStatus.INAPPLICABLE


# Aggregate report

def test_full_report_on_figure_one_graph():
    report = full_report(FIGURE_ONE, everywhere(FIGURE_ONE, c_vertex))
    assert report.rigid
    assert report.properties["prime"].verdict is NO
    assert report.properties["strongly_solid"].verdict is NO
    assert report.properties["cartan_free"].verdict is UNKNOWN
    assert len(report.irreducible_components) == 2
    assert report.consistency_problems() == []
    data = report.to_dict()
    assert data["graph"]["radius"] == 2
    assert list(data["properties"]) == [
        "amenable", "atomic", "diffuse", "strongly_solid", "ii1_factor",
        "prime", "freely_indecomposable", "cartan_free", "in_C_rigid",
    ]


def test_full_report_single_c_vertex():
    single = SimpleGraph.from_edges(["v"])
    report = full_report(single, {"v": c_vertex()})
    assert report.properties["prime"].verdict is YES
    assert report.properties["freely_indecomposable"].verdict is UNKNOWN


def test_full_report_empty_graph():
    report = full_report(SimpleGraph.from_edges([]), {})
    assert report.properties["amenable"].verdict is YES
    assert report.properties["atomic"].verdict is YES
    assert report.irreducible_components == []
    assert all(state.provenance for state in report.properties.values() if state.is_unknown)
