"""Finite simple graphs and the graph-theoretic predicates used by the classifier.

Vertex subsets always carry induced-subgraph semantics.  Set-valued results are
sorted with :func:`vertex_key` so that reports are byte-stable.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from errors import InputError

logger = logging.getLogger(__name__)

Vertex = str
INFINITE_RADIUS = math.inf


def vertex_key(vertex: Vertex) -> Tuple[int, Union[int, str], str]:
    """Natural ordering: numeric ids by value, then everything else by text."""
    if vertex.isascii() and vertex.isdigit():
        return (0, int(vertex), vertex)
    return (1, vertex, vertex)


def sort_vertices(vertices: Iterable[Vertex]) -> Tuple[Vertex, ...]:
    return tuple(sorted(vertices, key=vertex_key))


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph without loops or multiple edges."""
    vertices: Tuple[Vertex, ...]
    edges: FrozenSet[FrozenSet[Vertex]] = field(default_factory=frozenset)

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("vertex identifiers must be pairwise distinct")
        ordered = sort_vertices(self.vertices)
        object.__setattr__(self, "vertices", ordered)
        known = set(ordered)
        for edge in self.edges:
            if len(edge) != 2:
                raise InputError(f"self-edge on {sorted(edge)[0]}")
            for vertex in edge:
                if vertex not in known:
                    raise InputError(f"edge refers to unknown vertex '{vertex}'")

    @classmethod
    def from_edges(cls, vertices: Iterable[Vertex], edges: Iterable[Sequence[Vertex]] = ()) -> "SimpleGraph":
        pairs = set()
        for edge in edges:
            u, v = edge
            if u == v:
                raise InputError(f"self-edge on {u}")
            pairs.add(frozenset((str(u), str(v))))
        return cls(tuple(str(v) for v in vertices), frozenset(pairs))

    @cached_property
    def neighbors(self) -> Dict[Vertex, FrozenSet[Vertex]]:
        table: Dict[Vertex, set] = {v: set() for v in self.vertices}
        for edge in self.edges:
            u, v = tuple(edge)
            table[u].add(v)
            table[v].add(u)
        return {v: frozenset(ns) for v, ns in table.items()}

    @cached_property
    def vertex_set(self) -> FrozenSet[Vertex]:
        return frozenset(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self.vertex_set

    def adjacent(self, u: Vertex, v: Vertex) -> bool:
        return v in self.neighbors[u]

    def commute(self, u: Vertex, v: Vertex) -> bool:
        """Distinct adjacent generators commute in the Coxeter group."""
        return u != v and v in self.neighbors[u]

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors[v])

    def check_vertices(self, vertices: Iterable[Vertex]) -> FrozenSet[Vertex]:
        members = frozenset(vertices)
        unknown = members - self.vertex_set
        if unknown:
            raise InputError(f"unknown vertex id(s): {', '.join(sort_vertices(unknown))}")
        return members

    def subset(self, vertices: Iterable[Vertex] = ()) -> "VertexSubset":
        return VertexSubset(self, self.check_vertices(vertices))

    def all_vertices(self) -> "VertexSubset":
        return VertexSubset(self, self.vertex_set)

    def induced(self, vertices: Iterable[Vertex]) -> "SimpleGraph":
        members = self.check_vertices(vertices)
        kept = frozenset(e for e in self.edges if e <= members)
        return SimpleGraph(sort_vertices(members), kept)

    def relabel(self, mapping: Mapping[Vertex, Vertex]) -> "SimpleGraph":
        return SimpleGraph(
            tuple(mapping[v] for v in self.vertices),
            frozenset(frozenset(mapping[v] for v in e) for e in self.edges),
        )

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(tuple(e) for e in self.edges)
        return graph

    def sorted_edges(self) -> List[Tuple[Vertex, Vertex]]:
        pairs = [tuple(sort_vertices(e)) for e in self.edges]
        return sorted(pairs, key=lambda p: (vertex_key(p[0]), vertex_key(p[1])))


@dataclass(frozen=True)
class VertexSubset:
    """A set of vertices of ``parent``, read as an induced subgraph."""
    parent: SimpleGraph = field(repr=False, compare=False, hash=False)
    members: FrozenSet[Vertex] = frozenset()

    def __post_init__(self):
        unknown = self.members - self.parent.vertex_set
        if unknown:
            raise InputError(f"unknown vertex id(s): {', '.join(sort_vertices(unknown))}")

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self.members

    def sorted(self) -> Tuple[Vertex, ...]:
        return sort_vertices(self.members)

    def complement(self) -> "VertexSubset":
        return VertexSubset(self.parent, self.parent.vertex_set - self.members)

    def induced(self) -> SimpleGraph:
        return self.parent.induced(self.members)

    def __repr__(self) -> str:
        return "{" + ", ".join(self.sorted()) + "}"


@dataclass(frozen=True)
class GraphIsomorphism:
    """Bijection between vertex sets preserving adjacency and non-adjacency."""
    source: SimpleGraph = field(repr=False)
    target: SimpleGraph = field(repr=False)
    mapping: Tuple[Tuple[Vertex, Vertex], ...] = ()

    def __post_init__(self):
        if not self.is_valid():
            raise InputError("mapping is not a graph isomorphism")

    def as_dict(self) -> Dict[Vertex, Vertex]:
        return dict(self.mapping)

    def is_valid(self) -> bool:
        table = dict(self.mapping)
        if len(self.source) != len(self.target) or set(table) != self.source.vertex_set:
            return False
        if set(table.values()) != self.target.vertex_set:
            return False
        for u, v in itertools.combinations(self.source.vertices, 2):
            if self.source.adjacent(u, v) != self.target.adjacent(table[u], table[v]):
                return False
        return True


SubsetLike = Union[VertexSubset, Iterable[Vertex]]


def _members(g: SimpleGraph, s: SubsetLike) -> FrozenSet[Vertex]:
    if isinstance(s, VertexSubset):
        return g.check_vertices(s.members)
    return g.check_vertices(s)


def link(g: SimpleGraph, s: SubsetLike) -> VertexSubset:
    """Common neighbours of ``s``; the link of the empty set is the whole graph."""
    members = _members(g, s)
    common = set(g.vertices)
    for v in members:
        common &= g.neighbors[v]
    return VertexSubset(g, frozenset(common))


def star(g: SimpleGraph, v: Vertex) -> VertexSubset:
    if v not in g:
        raise InputError(f"unknown vertex id '{v}'")
    return VertexSubset(g, g.neighbors[v] | {v})


def is_rigid(g: SimpleGraph) -> bool:
    """Every vertex is recovered as the link of its own link."""
    return all(link(g, link(g, {v})).members == {v} for v in g.vertices)


def is_clique(g: SimpleGraph, s: SubsetLike) -> bool:
    members = sort_vertices(_members(g, s))
    return all(g.adjacent(u, v) for u, v in itertools.combinations(members, 2))


def is_complete(g: SimpleGraph) -> bool:
    return is_clique(g, g.vertices)


def is_connected(g: SimpleGraph) -> bool:
    return len(connected_components(g)) <= 1


def _splits_as_join(g: SimpleGraph, members: FrozenSet[Vertex]) -> bool:
    return link(g, members).members == g.vertex_set - members


def is_irreducible(g: SimpleGraph) -> bool:
    """No partition into two non-empty parts with the second the link of the first.

    The sweep only visits subsets containing the first vertex, since the join
    condition is symmetric in the two parts.
    """
    if len(g) <= 1:
        return True
    first, rest = g.vertices[0], g.vertices[1:]
    for size in range(len(rest)):
        for extra in itertools.combinations(rest, size):
            if _splits_as_join(g, frozenset((first,) + extra)):
                return False
    return True


def _component_order(parts: Iterable[Iterable[Vertex]], g: SimpleGraph) -> List[VertexSubset]:
    subsets = [VertexSubset(g, frozenset(p)) for p in parts]
    return sorted(subsets, key=lambda s: vertex_key(s.sorted()[0]))


def connected_components(g: SimpleGraph) -> List[VertexSubset]:
    return _component_order(nx.connected_components(g.to_networkx()), g)


def irreducible_components(g: SimpleGraph) -> List[VertexSubset]:
    """Connected components of the non-commutation graph (complement of ``g``)."""
    pieces = _component_order(nx.connected_components(nx.complement(g.to_networkx())), g)
    for piece in pieces:
        if not _splits_as_join(g, piece.members):
            raise AssertionError(f"component {piece!r} is not a join factor")
    return pieces


def _escape_label(part: Vertex) -> str:
    return part.replace("\\", "\\\\").replace(",", "\\,")


def graph_product_vertex(v: Vertex, s: Vertex) -> Vertex:
    """Label ``(v,s)``; commas and backslashes inside the ids are escaped so labels never collide."""
    return f"({_escape_label(v)},{_escape_label(s)})"


def graph_product_of_graphs(pi: SimpleGraph, parts: Mapping[Vertex, SimpleGraph]) -> SimpleGraph:
    """Replace every vertex ``v`` of ``pi`` by the graph ``parts[v]``.

    Vertices inside one part keep their adjacency; vertices of different parts
    are adjacent exactly when their base vertices are adjacent in ``pi``.
    """
    _check_parts(pi, parts)
    vertices = [graph_product_vertex(v, s) for v in pi.vertices for s in parts[v].vertices]
    edges = []
    for v in pi.vertices:
        for s, t in parts[v].sorted_edges():
            edges.append((graph_product_vertex(v, s), graph_product_vertex(v, t)))
    for v, w in pi.sorted_edges():
        for s in parts[v].vertices:
            for t in parts[w].vertices:
                edges.append((graph_product_vertex(v, s), graph_product_vertex(w, t)))
    return SimpleGraph.from_edges(vertices, edges)


def _check_parts(pi: SimpleGraph, parts: Mapping[Vertex, SimpleGraph]) -> None:
    missing = [v for v in pi.vertices if v not in parts]
    if missing:
        raise InputError(f"no part graph for vertex id(s): {', '.join(missing)}")
    empty = [v for v in pi.vertices if len(parts[v]) == 0]
    if empty:
        raise InputError(f"empty part graph for vertex id(s): {', '.join(empty)}")


def rigid_product_criterion(pi: SimpleGraph, parts: Mapping[Vertex, SimpleGraph]) -> bool:
    """Rigidity of the graph product of graphs, read off from ``pi`` and the parts."""
    _check_parts(pi, parts)
    if not all(is_rigid(parts[v]) for v in pi.vertices):
        return False
    return all(
        link(pi, link(pi, {v})).members == {v} or len(parts[v]) >= 2
        for v in pi.vertices
    )


@dataclass(frozen=True)
class CoreDecomposition:
    """``graph`` rebuilt as a graph product of complete graphs over its core."""
    core: SimpleGraph
    classes: Dict[Vertex, Vertex]
    parts: Dict[Vertex, SimpleGraph]
    witness: GraphIsomorphism


def core(g: SimpleGraph) -> Tuple[SimpleGraph, Dict[Vertex, Vertex]]:
    """Quotient by equality of stars; returns the core and each vertex's class id.

    A class is named after its least member, so class ids are always vertex ids of ``g``.
    """
    by_star: Dict[FrozenSet[Vertex], List[Vertex]] = {}
    for v in g.vertices:
        by_star.setdefault(star(g, v).members, []).append(v)
    classes: Dict[Vertex, Vertex] = {}
    for members in by_star.values():
        name = sort_vertices(members)[0]
        for v in members:
            classes[v] = name
    names = sort_vertices(set(classes.values()))
    edges = [(a, b) for a, b in itertools.combinations(names, 2) if g.adjacent(a, b)]
    return SimpleGraph.from_edges(names, edges), classes


def complete_graph(n: int, prefix: str = "") -> SimpleGraph:
    labels = [f"{prefix}{i}" for i in range(1, n + 1)]
    return SimpleGraph.from_edges(labels, itertools.combinations(labels, 2))


def core_reconstruction(g: SimpleGraph) -> CoreDecomposition:
    """Core plus complete parts, with a validated isomorphism back to ``g``."""
    pi, classes = core(g)
    members: Dict[Vertex, List[Vertex]] = {c: [] for c in pi.vertices}
    for v in g.vertices:
        members[classes[v]].append(v)
    parts = {c: complete_graph(len(vs)) for c, vs in members.items()}
    product = graph_product_of_graphs(pi, parts)
    mapping = tuple(
        (v, graph_product_vertex(c, str(i)))
        for c, vs in members.items()
        for i, v in enumerate(vs, start=1)
    )
    witness = GraphIsomorphism(g, product, mapping)
    logger.debug(f"🧩 core of {len(g)} vertices has {len(pi)} classes")
    return CoreDecomposition(core=pi, classes=classes, parts=parts, witness=witness)


def radius(g: SimpleGraph) -> Union[int, float]:
    """Smallest eccentricity; 0 for the empty graph and infinite when disconnected."""
    if len(g) == 0:
        return 0
    if not is_connected(g):
        return INFINITE_RADIUS
    return int(nx.radius(g.to_networkx()))


def iter_isomorphisms(g1: SimpleGraph, g2: SimpleGraph) -> Iterator[GraphIsomorphism]:
    """All isomorphisms ``g1 -> g2`` by degree-pruned backtracking, in a fixed order."""
    if len(g1) != len(g2) or len(g1.edges) != len(g2.edges):
        return
    if sorted(map(g1.degree, g1.vertices)) != sorted(map(g2.degree, g2.vertices)):
        return
    candidates = {u: [v for v in g2.vertices if g2.degree(v) == g1.degree(u)] for u in g1.vertices}
    order = sorted(g1.vertices, key=lambda u: (len(candidates[u]), -g1.degree(u), vertex_key(u)))
    mapping: Dict[Vertex, Vertex] = {}
    used: set = set()

    def extend(index: int) -> Iterator[Dict[Vertex, Vertex]]:
        if index == len(order):
            yield dict(mapping)
            return
        u = order[index]
        for v in candidates[u]:
            if v in used:
                continue
            if any(g1.adjacent(u, w) != g2.adjacent(v, mw) for w, mw in mapping.items()):
                continue
            mapping[u] = v
            used.add(v)
            yield from extend(index + 1)
            del mapping[u]
            used.discard(v)

    for found in extend(0):
        pairs = tuple((u, found[u]) for u in g1.vertices)
        yield GraphIsomorphism(g1, g2, pairs)


def find_isomorphism(g1: SimpleGraph, g2: SimpleGraph) -> Optional[GraphIsomorphism]:
    return next(iter_isomorphisms(g1, g2), None)


# Factories for the graphs that appear throughout the tests and examples

def cycle_graph(n: int, prefix: str = "") -> SimpleGraph:
    """The cycle Z_n on ``1..n``; Z_2 is a single edge and Z_1 a single vertex."""
    labels = [f"{prefix}{i}" for i in range(1, n + 1)]
    if n <= 2:
        return SimpleGraph.from_edges(labels, [labels] if n == 2 else [])
    return SimpleGraph.from_edges(labels, [(labels[i], labels[(i + 1) % n]) for i in range(n)])


def path_graph(n: int, prefix: str = "") -> SimpleGraph:
    labels = [f"{prefix}{i}" for i in range(1, n + 1)]
    return SimpleGraph.from_edges(labels, zip(labels, labels[1:]))


def edgeless_graph(n: int, prefix: str = "") -> SimpleGraph:
    return SimpleGraph.from_edges([f"{prefix}{i}" for i in range(1, n + 1)])


def disjoint_union(g1: SimpleGraph, g2: SimpleGraph) -> SimpleGraph:
    if g1.vertex_set & g2.vertex_set:
        raise InputError("graphs share vertex ids")
    return SimpleGraph(g1.vertices + g2.vertices, g1.edges | g2.edges)


def join(g1: SimpleGraph, g2: SimpleGraph) -> SimpleGraph:
    """Disjoint union plus every edge between the two vertex sets."""
    union = disjoint_union(g1, g2)
    cross = frozenset(frozenset((u, v)) for u in g1.vertices for v in g2.vertices)
    return SimpleGraph(union.vertices, union.edges | cross)
