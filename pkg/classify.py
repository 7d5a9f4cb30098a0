"""Structural verdicts for graph products M_Γ = *_{v,Γ} (M_v, τ_v).

Every public function takes the graph and a mapping from vertex id to
:class:`algebras.VertexAlgebra` and answers with a :class:`TriState`. The
decision procedures are partial: when the hypotheses of a criterion cannot be
established from the vertex metadata the answer is Unknown with a note saying
which hypothesis is missing.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from algebras import VertexAlgebra
from config import settings
from coxeter import hecke_sum_converges
from errors import InputError, ResourceCapError
from graph_core import (
    SimpleGraph,
    Vertex,
    VertexSubset,
    connected_components,
    core,
    find_isomorphism,
    irreducible_components,
    is_complete,
    is_connected,
    is_irreducible,
    is_rigid,
    iter_isomorphisms,
    link,
    radius,
    sort_vertices,
)
from verdicts import TriState, all_of, any_of, implies

logger = logging.getLogger(__name__)

Descriptors = Mapping[Vertex, VertexAlgebra]

OUTSIDE_C_RIGID = "outside C_Rigid: uniqueness not asserted"


def _check_descriptors(g: SimpleGraph, desc: Descriptors) -> None:
    missing = [v for v in g.vertices if v not in desc]
    if missing:
        raise InputError(f"no vertex algebra for vertex id(s): {', '.join(missing)}")


def _label(vertices: Iterable[Vertex]) -> str:
    return "{" + ",".join(sort_vertices(vertices)) + "}"


def _flags(g: SimpleGraph, desc: Descriptors, name: str) -> List[TriState]:
    return [getattr(desc[v], name).with_note(f"{v}: {getattr(desc[v], name).provenance or name}") for v in g.vertices]


# Amenability, atomicity, diffuseness

def amenable_graph_product(g: SimpleGraph, desc: Descriptors) -> TriState:
    """Amenable iff every vertex is amenable and non-adjacent pairs are 2-dimensional with full link."""
    _check_descriptors(g, desc)
    if len(g) == 0:
        return TriState.yes("the empty graph product is ℂ")
    vertices = all_of(_flags(g, desc, "amenable"), "every vertex algebra amenable")
    pairs = TriState.yes("non-adjacent pairs span infinite dihedral factors")
    for v, w in itertools.combinations(g.vertices, 2):
        if g.adjacent(v, w):
            continue
        if desc[v].dimension != 2 or desc[w].dimension != 2:
            pairs = TriState.no(f"non-adjacent {v},{w} not both 2-dimensional")
            break
        if link(g, {v, w}).members != g.vertex_set - {v, w}:
            pairs = TriState.no(f"Link({{{v},{w}}}) misses part of the rest of the graph")
            break
    return all_of([vertices, pairs], "amenability criterion")


def atomic_graph_product(g: SimpleGraph, desc: Descriptors) -> TriState:
    """Atomic iff the graph is complete and every vertex algebra is atomic."""
    _check_descriptors(g, desc)
    if len(g) == 0:
        return TriState.yes("the empty graph product is ℂ")
    if not is_complete(g):
        return TriState.no("atomicity criterion: graph is not complete")
    return all_of(_flags(g, desc, "atomic"), "atomicity criterion")


def diffuse_graph_product(g: SimpleGraph, desc: Descriptors) -> TriState:
    """Partial decision of diffuseness; Unknown outside the known criteria."""
    _check_descriptors(g, desc)
    if len(g) == 0:
        return TriState.no("the empty graph product is ℂ")
    algebras = [desc[v] for v in g.vertices]

    if all(a.hecke_q is not None for a in algebras):
        converges = hecke_sum_converges(g, {v: desc[v].hecke_q for v in g.vertices})
        return converges.negate(f"Hecke criterion: {converges.provenance}")

    complete = is_complete(g)
    some_diffuse = any(a.diffuse.is_yes for a in algebras)
    if complete:
        if some_diffuse:
            return TriState.yes("tensor product with a diffuse vertex algebra")
        if all(a.atomic.is_yes for a in algebras):
            return TriState.no("tensor product of atomic algebras is atomic")

    haar = all(a.has_trace_zero_unitary.is_yes for a in algebras)
    if haar and (some_diffuse or not complete):
        reason = "a diffuse vertex" if some_diffuse else "incomplete graph"
        return TriState.yes(f"trace-zero unitaries at every vertex and {reason}")
    return TriState.unknown("outside the diffuseness criteria")


# Strong solidity

@dataclass
class _SweepCache:
    """Memoized sub-verdicts keyed by vertex set."""
    g: SimpleGraph
    desc: Descriptors
    amenable: Dict[FrozenSet[Vertex], TriState] = field(default_factory=dict)
    diffuse: Dict[FrozenSet[Vertex], TriState] = field(default_factory=dict)
    atomic: Dict[FrozenSet[Vertex], TriState] = field(default_factory=dict)

    def _get(self, table: dict, members: FrozenSet[Vertex], fn) -> TriState:
        if members not in table:
            table[members] = fn(self.g.induced(members), self.desc)
        return table[members]

    def is_amenable(self, members: FrozenSet[Vertex]) -> TriState:
        return self._get(self.amenable, members, amenable_graph_product)

    def is_diffuse(self, members: FrozenSet[Vertex]) -> TriState:
        return self._get(self.diffuse, members, diffuse_graph_product)

    def is_atomic(self, members: FrozenSet[Vertex]) -> TriState:
        return self._get(self.atomic, members, atomic_graph_product)


def strongly_solid(g: SimpleGraph, desc: Descriptors, cap: Optional[int] = None) -> TriState:
    """Sweep every non-empty induced subgraph Λ and test the link conditions.

    Strongly solid iff every vertex algebra is strongly solid and, for every
    Λ with M_Λ non-amenable, M_Link(Λ) is not diffuse, and moreover atomic
    when M_Λ is diffuse.
    """
    _check_descriptors(g, desc)
    cap = settings.resolved_caps().sweep_cap if cap is None else cap
    if len(g) > cap:
        raise ResourceCapError("subgraph sweep", cap, len(g))
    if len(g) == 0:
        return TriState.yes("ℂ is strongly solid")

    start = time.time()
    conditions = [all_of(_flags(g, desc, "strongly_solid"), "every vertex algebra strongly solid")]
    cache = _SweepCache(g, desc)
    visited = 0
    failed = conditions[0].is_no
    for size in range(1, len(g) + 1):
        if failed:
            break
        for subset in itertools.combinations(g.vertices, size):
            visited += 1
            members = frozenset(subset)
            amenable = cache.is_amenable(members)
            if amenable.is_yes:
                continue
            non_amenable = amenable.negate()
            around = link(g, members).members
            name = _label(members)
            conditions.append(implies(
                non_amenable,
                cache.is_diffuse(around).negate(),
                f"Link({name}) must not be diffuse",
            ))
            conditions.append(implies(
                all_of([non_amenable, cache.is_diffuse(members)], f"M_{name} non-amenable and diffuse"),
                cache.is_atomic(around),
                f"Link({name}) must be atomic",
            ))
            if conditions[-1].is_no or conditions[-2].is_no:
                failed = True
                break
    logger.debug(f"🔎 strong solidity sweep visited {visited} subgraphs in {time.time() - start:.2f}s")
    return all_of(conditions, "strong solidity criterion")


# Factoriality and primeness

def _all_ii1(g: SimpleGraph, desc: Descriptors) -> bool:
    return all(desc[v].is_II1_factor.is_yes for v in g.vertices)


def _all_haar(g: SimpleGraph, desc: Descriptors) -> bool:
    return all(desc[v].has_trace_zero_unitary.is_yes for v in g.vertices)


def _finite_factor(a: VertexAlgebra) -> TriState:
    if not a.is_finite_dimensional:
        return TriState.no("infinite-dimensional")
    return a.is_factor


def ii1_factor(g: SimpleGraph, desc: Descriptors, assume: Optional[bool] = None) -> TriState:
    """Whether M_Γ is a II1 factor, as far as the vertex metadata allows.

    ``assume`` is the document's ``assume_II1_factor`` and overrides the derivation.
    """
    _check_descriptors(g, desc)
    if assume is not None:
        return TriState.from_bool(assume, "asserted by the input document")
    if len(g) == 0:
        return TriState.no("ℂ is not a II1 factor")
    if _all_ii1(g, desc):
        return TriState.yes("graph products of II1 factors are II1 factors")
    if len(g) == 1:
        return desc[g.vertices[0]].is_II1_factor
    if is_irreducible(g):
        if len(g) >= 3 and _all_haar(g, desc):
            return TriState.yes("irreducible graph on at least 3 vertices with trace-zero unitaries")
        return TriState.unknown("factoriality undetermined for this irreducible graph")

    parts = []
    ii1_parts = []
    for component in irreducible_components(g):
        sub = component.induced()
        ii1_state = ii1_factor(sub, desc)
        ii1_parts.append(ii1_state)
        if len(sub) == 1:
            finite = _finite_factor(desc[sub.vertices[0]])
        else:
            finite = TriState.no("several vertices")
        parts.append(any_of([ii1_state, finite], f"component {_label(component)} is a factor"))
    return all_of(
        [all_of(parts, "every tensor factor is a factor"), any_of(ii1_parts, "some tensor factor is II1")],
        "tensor decomposition over irreducible components",
    )


def prime(g: SimpleGraph, desc: Descriptors, assume_ii1: Optional[bool] = None) -> TriState:
    """Primeness of M_Γ by the II1-vertex, irreducible-graph and component criteria."""
    _check_descriptors(g, desc)
    if len(g) == 0:
        return TriState.unknown("primeness is not defined for ℂ")
    if len(g) == 1:
        state = desc[g.vertices[0]].prime
        return state.with_note(f"single vertex: {state.provenance}" if state.provenance else "single vertex")
    if _all_ii1(g, desc):
        return TriState.from_bool(is_irreducible(g), "II1 vertices: prime iff the graph is irreducible")
    if len(g) >= 3 and is_irreducible(g) and _all_haar(g, desc):
        return TriState.yes("irreducible graph on at least 3 vertices with trace-zero unitaries")

    factor = ii1_factor(g, desc, assume_ii1)
    if factor.is_no:
        return TriState.no(f"not a II1 factor: {factor.provenance}")
    if factor.is_unknown:
        return TriState.unknown(f"II1 factoriality undetermined: {factor.provenance}")
    if is_irreducible(g):
        return TriState.unknown("irreducible graph outside the primeness criteria")

    candidates = []
    for component in irreducible_components(g):
        rest = g.vertex_set - component.members
        rest_finite = all(desc[v].is_finite_dimensional for v in rest) and is_complete(g.induced(rest))
        candidates.append(all_of(
            [prime(component.induced(), desc), TriState.from_bool(rest_finite, "remaining vertices finite-dimensional")],
            f"component {_label(component)} prime with finite-dimensional complement",
        ))
    return any_of(candidates, "component primeness criterion")


def freely_indecomposable(g: SimpleGraph, desc: Descriptors) -> TriState:
    """For II1 vertices with separable predual: indecomposable as a free product iff connected."""
    _check_descriptors(g, desc)
    if len(g) < 2:
        return TriState.unknown("free indecomposability criterion needs at least two vertices")
    hypotheses = all_of(
        _flags(g, desc, "is_II1_factor") + _flags(g, desc, "separable_predual"),
        "II1 vertices with separable predual",
    )
    if not hypotheses.is_yes:
        return TriState.unknown(f"hypotheses unmet: {hypotheses.provenance}")
    return TriState.from_bool(is_connected(g), "free indecomposability iff the graph is connected")


def cartan_absence(g: SimpleGraph, desc: Descriptors) -> TriState:
    """Yes when radius ≥ 3 and every vertex is a II1 factor; the criterion is one-directional."""
    _check_descriptors(g, desc)
    r = radius(g)
    if r >= 3 and len(g) > 0 and _all_ii1(g, desc):
        return TriState.yes(f"radius {r} ≥ 3 with II1 vertices")
    if r < 3:
        return TriState.unknown(f"radius {r} < 3: no Cartan criterion applies")
    return TriState.unknown("Cartan criterion needs II1 vertex algebras")


def in_C_rigid(g: SimpleGraph, desc: Descriptors) -> TriState:
    """Rigid non-empty graph whose vertex algebras all belong to C_Vertex."""
    _check_descriptors(g, desc)
    if len(g) == 0:
        return TriState.no("empty graph")
    if not is_rigid(g):
        return TriState.no("graph is not rigid")
    return all_of(_flags(g, desc, "in_C_vertex"), "rigid graph with C_Vertex vertices")


# Factorizations

@dataclass(frozen=True)
class FactorRecord:
    """One tensor or free factor M_Λ of a decomposition."""
    subset: VertexSubset
    verdict: TriState
    provenance: str

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.subset.sorted()),
            "verdict": self.verdict.to_dict(),
            "provenance": self.provenance,
        }


def prime_factorization(g: SimpleGraph, desc: Descriptors) -> List[FactorRecord]:
    """Irreducible components, each tagged with its primeness."""
    _check_descriptors(g, desc)
    rigid_class = in_C_rigid(g, desc)
    note = (
        "unique up to permutation and amplification within C_Rigid"
        if rigid_class.is_yes
        else OUTSIDE_C_RIGID
    )
    return [
        FactorRecord(component, prime(component.induced(), desc), note)
        for component in irreducible_components(g)
    ]


def free_product_decomposition(g: SimpleGraph, desc: Descriptors) -> List[FactorRecord]:
    """Connected components, each tagged with free indecomposability."""
    _check_descriptors(g, desc)
    unique = len(g) >= 2 and in_C_rigid(g, desc).is_yes
    records = []
    for component in connected_components(g):
        sub = component.induced()
        if unique:
            note = "unique up to permutation and unitary conjugacy within C_Rigid"
        else:
            note = OUTSIDE_C_RIGID
            if not is_rigid(sub):
                note += "; component not rigid"
        records.append(FactorRecord(component, freely_indecomposable(sub, desc), note))
    return records


# Isomorphism obstruction

class IsoStatus(Enum):
    NOT_ISOMORPHIC = "not_isomorphic"
    NO_OBSTRUCTION = "no_obstruction"
    INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class IsoCheckResult:
    status: IsoStatus
    provenance: str
    isomorphisms: Tuple[Dict[Vertex, Vertex], ...] = ()
    truncated: bool = False

    @property
    def count(self) -> int:
        return len(self.isomorphisms)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "provenance": self.provenance,
            "isomorphism_count": self.count,
            "truncated": self.truncated,
            "isomorphisms": [dict(sorted(m.items())) for m in self.isomorphisms],
        }


def isomorphism_obstruction(
    g: SimpleGraph,
    desc_g: Descriptors,
    h: SimpleGraph,
    desc_h: Descriptors,
    list_cap: Optional[int] = None,
) -> IsoCheckResult:
    """Within C_Rigid, M_Γ ≅ M_Λ forces a graph isomorphism Γ ≅ Λ."""
    list_cap = settings.isomorphism_list_cap if list_cap is None else list_cap
    for name, graph, desc in (("first", g, desc_g), ("second", h, desc_h)):
        membership = in_C_rigid(graph, desc)
        if not membership.is_yes:
            return IsoCheckResult(
                IsoStatus.INAPPLICABLE,
                f"{name} input not in C_Rigid: {membership.provenance}",
            )
    if find_isomorphism(g, h) is None:
        return IsoCheckResult(IsoStatus.NOT_ISOMORPHIC, "no graph isomorphism exists between rigid graphs")
    found = []
    truncated = False
    for iso in iter_isomorphisms(g, h):
        if len(found) == list_cap:
            truncated = True
            break
        found.append(iso.as_dict())
    logger.info(f"🔁 {len(found)}{'+' if truncated else ''} graph isomorphisms listed")
    return IsoCheckResult(
        IsoStatus.NO_OBSTRUCTION,
        "no obstruction: any isomorphism forces M_v ≅ N_α(v)^t_v for some graph isomorphism α",
        tuple(found),
        truncated,
    )


# Aggregate report

PROPERTY_ORDER = (
    "amenable",
    "atomic",
    "diffuse",
    "strongly_solid",
    "ii1_factor",
    "prime",
    "freely_indecomposable",
    "cartan_free",
    "in_C_rigid",
)


@dataclass(frozen=True)
class StructureReport:
    """Everything the classifier can say about one graph product."""
    graph: SimpleGraph
    properties: Dict[str, TriState]
    irreducible_components: List[FactorRecord]
    connected_components: List[FactorRecord]
    core_classes: Dict[Vertex, Vertex]
    core_graph: SimpleGraph

    @property
    def rigid(self) -> bool:
        return is_rigid(self.graph)

    def consistency_problems(self) -> List[str]:
        p = self.properties
        problems = []
        if p["atomic"].is_yes and p["diffuse"].is_yes:
            problems.append("atomic and diffuse at once")
        if p["amenable"].is_yes and p["strongly_solid"].is_no:
            problems.append("amenable but not strongly solid")
        if p["prime"].is_yes and p["ii1_factor"].is_no and len(self.graph) > 1:
            problems.append("prime but not a II1 factor")
        return problems

    def graph_facts(self) -> dict:
        r = radius(self.graph)
        return {
            "vertices": list(self.graph.vertices),
            "edges": [list(e) for e in self.graph.sorted_edges()],
            "rigid": self.rigid,
            "irreducible": is_irreducible(self.graph),
            "connected": is_connected(self.graph),
            "complete": is_complete(self.graph),
            "radius": "inf" if r == float("inf") else r,
            "core": {
                "vertices": list(self.core_graph.vertices),
                "edges": [list(e) for e in self.core_graph.sorted_edges()],
                "classes": dict(sorted(self.core_classes.items())),
            },
        }

    def to_dict(self) -> dict:
        return {
            "graph": self.graph_facts(),
            "properties": {name: self.properties[name].to_dict() for name in PROPERTY_ORDER},
            "irreducible_components": [r.to_dict() for r in self.irreducible_components],
            "connected_components": [r.to_dict() for r in self.connected_components],
        }


def full_report(
    g: SimpleGraph,
    desc: Descriptors,
    assume_ii1: Optional[bool] = None,
    sweep_cap: Optional[int] = None,
) -> StructureReport:
    _check_descriptors(g, desc)
    start = time.time()
    logger.info(f"🧮 classifying graph product over {len(g)} vertices")
    properties = {
        "amenable": amenable_graph_product(g, desc),
        "atomic": atomic_graph_product(g, desc),
        "diffuse": diffuse_graph_product(g, desc),
        "strongly_solid": strongly_solid(g, desc, sweep_cap),
        "ii1_factor": ii1_factor(g, desc, assume_ii1),
        "prime": prime(g, desc, assume_ii1),
        "freely_indecomposable": freely_indecomposable(g, desc),
        "cartan_free": cartan_absence(g, desc),
        "in_C_rigid": in_C_rigid(g, desc),
    }
    core_graph, classes = core(g)
    report = StructureReport(
        graph=g,
        properties=properties,
        irreducible_components=prime_factorization(g, desc),
        connected_components=free_product_decomposition(g, desc),
        core_classes=classes,
        core_graph=core_graph,
    )
    for problem in report.consistency_problems():
        logger.warning(f"⚠️ inconsistent verdicts: {problem}")
    logger.info(f"✅ classification finished in {time.time() - start:.2f}s")
    return report
