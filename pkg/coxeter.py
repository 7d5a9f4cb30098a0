"""Right-angled Coxeter group W_Γ: normal forms, enumeration and growth series.

Elements are stored in Cartier–Foata form: successive layers of pairwise
commuting letters, every letter pushed as far left as the relations allow.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import settings
from errors import InputError, ResourceCapError
from graph_core import SimpleGraph, SubsetLike, Vertex, VertexSubset, link, sort_vertices, vertex_key
from verdicts import TriState

logger = logging.getLogger(__name__)

Letter = Vertex
Layer = Tuple[Letter, ...]


@dataclass(frozen=True)
class NormalWord:
    """A group element in Cartier–Foata normal form."""
    graph: SimpleGraph = field(repr=False, compare=False, hash=False)
    layers: Tuple[Layer, ...] = ()

    @property
    def letters(self) -> Tuple[Letter, ...]:
        """The canonical reduced expression: layers concatenated in order."""
        return tuple(itertools.chain.from_iterable(self.layers))

    @property
    def length(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def support(self) -> FrozenSet[Letter]:
        return frozenset(self.letters)

    def sort_key(self) -> Tuple:
        return (self.length, tuple(tuple(vertex_key(v) for v in layer) for layer in self.layers))

    def __str__(self) -> str:
        if not self.layers:
            return "e"
        return "·".join("".join(layer) if len(layer) == 1 else "(" + " ".join(layer) + ")" for layer in self.layers)


def identity(g: SimpleGraph) -> NormalWord:
    return NormalWord(g, ())


def _check_letters(g: SimpleGraph, seq: Iterable[Letter]) -> List[Letter]:
    letters = [str(v) for v in seq]
    unknown = sorted({v for v in letters if v not in g}, key=vertex_key)
    if unknown:
        raise InputError(f"unknown letter(s): {', '.join(unknown)}")
    return letters


def _reduce(g: SimpleGraph, letters: Sequence[Letter]) -> List[Letter]:
    """Left-to-right cancellation; each new letter deletes the latest copy it can reach."""
    out: List[Letter] = []
    for v in letters:
        for i in range(len(out) - 1, -1, -1):
            if out[i] == v:
                del out[i]
                break
            if not g.commute(out[i], v):
                out.append(v)
                break
        else:
            out.append(v)
    return out


def _layer_of(g: SimpleGraph, layers: Sequence[Sequence[Letter]], v: Letter) -> int:
    """First layer that ``v`` can occupy when appended on the right."""
    for k in range(len(layers) - 1, -1, -1):
        if any(not g.commute(u, v) for u in layers[k]):
            return k + 1
    return 0


def _layers_from_reduced(g: SimpleGraph, letters: Sequence[Letter]) -> Tuple[Layer, ...]:
    layers: List[List[Letter]] = []
    for v in letters:
        k = _layer_of(g, layers, v)
        if k == len(layers):
            layers.append([v])
        else:
            layers[k].append(v)
    return tuple(sort_vertices(layer) for layer in layers)


def normalize(g: SimpleGraph, seq: Iterable[Letter]) -> NormalWord:
    return NormalWord(g, _layers_from_reduced(g, _reduce(g, _check_letters(g, seq))))


def _same_graph(w1: NormalWord, w2: NormalWord) -> SimpleGraph:
    if w1.graph is not w2.graph and w1.graph != w2.graph:
        raise InputError("words live in different Coxeter groups")
    return w1.graph


def multiply(w1: NormalWord, w2: NormalWord) -> NormalWord:
    g = _same_graph(w1, w2)
    return NormalWord(g, _layers_from_reduced(g, _reduce(g, w1.letters + w2.letters)))


def inverse(w: NormalWord) -> NormalWord:
    return NormalWord(w.graph, _layers_from_reduced(w.graph, w.letters[::-1]))


def length(w: NormalWord) -> int:
    return w.length


def is_reduced(g: SimpleGraph, seq: Sequence[Letter]) -> bool:
    letters = _check_letters(g, seq)
    return len(_reduce(g, letters)) == len(letters)


def first_letters(w: NormalWord) -> FrozenSet[Letter]:
    """Letters ``u`` with ``|u·w| = |w| - 1``: exactly the first layer."""
    return frozenset(w.layers[0]) if w.layers else frozenset()


def last_letters(w: NormalWord) -> FrozenSet[Letter]:
    """Letters ``u`` with ``|w·u| = |w| - 1``."""
    letters = w.letters
    terminal = set()
    for v in set(letters):
        last = max(i for i, x in enumerate(letters) if x == v)
        if all(w.graph.commute(v, x) for x in letters[last + 1:]):
            terminal.add(v)
    return frozenset(terminal)


def append_letter(w: NormalWord, v: Letter) -> NormalWord:
    """``w·v`` when it is longer than ``w``; otherwise the cancelled word."""
    if v in last_letters(w):
        return multiply(w, NormalWord(w.graph, ((v,),)))
    layers = [list(layer) for layer in w.layers]
    k = _layer_of(w.graph, layers, v)
    if k == len(layers):
        layers.append([v])
    else:
        layers[k].append(v)
    return NormalWord(w.graph, tuple(sort_vertices(layer) for layer in layers))


def _members(w: NormalWord, lam: SubsetLike) -> FrozenSet[Vertex]:
    if isinstance(lam, VertexSubset):
        return w.graph.check_vertices(lam.members)
    return w.graph.check_vertices(lam)


def membership_W(w: NormalWord, lam: SubsetLike) -> bool:
    """``v·w`` is reduced for every ``v`` in ``lam``."""
    return not (first_letters(w) & _members(w, lam))


def membership_W_prime(w: NormalWord, lam: SubsetLike) -> bool:
    """``w·v`` is reduced for every ``v`` in ``lam``."""
    return not (last_letters(w) & _members(w, lam))


def in_subgroup(w: NormalWord, lam: SubsetLike) -> bool:
    """Membership in the special subgroup generated by ``lam``."""
    return w.support <= _members(w, lam)


def link_of_word(w: NormalWord) -> VertexSubset:
    return link(w.graph, w.support)


def is_clique_word(w: NormalWord) -> bool:
    """At most one layer; the identity counts as the empty clique word."""
    return len(w.layers) <= 1


def starts_with(w: NormalWord, u: NormalWord) -> bool:
    return multiply(inverse(u), w).length == w.length - u.length


def ends_with(w: NormalWord, u: NormalWord) -> bool:
    return multiply(w, inverse(u)).length == w.length - u.length


def prefixes(w: NormalWord) -> List[NormalWord]:
    """Every ``u`` such that ``w = u·(u⁻¹w)`` is reduced, sorted canonically."""
    found: Dict[Tuple[Layer, ...], NormalWord] = {(): identity(w.graph)}
    frontier = [identity(w.graph)]
    while frontier:
        grown = []
        for p in frontier:
            rest = multiply(inverse(p), w)
            for x in sort_vertices(first_letters(rest)):
                q = append_letter(p, x)
                if q.layers not in found:
                    found[q.layers] = q
                    grown.append(q)
        frontier = grown
    return sorted(found.values(), key=NormalWord.sort_key)


def clique_splittings(w: NormalWord) -> List[Tuple[NormalWord, NormalWord, NormalWord]]:
    """The triples ``(w1, w2, w3)`` with ``w = w1·w2·w3`` reduced and ``w2`` a clique word."""
    g = w.graph
    triples = []
    for w1 in prefixes(w):
        rest = multiply(inverse(w1), w)
        heads = sort_vertices(first_letters(rest))
        for size in range(len(heads) + 1):
            for clique in itertools.combinations(heads, size):
                w2 = NormalWord(g, (tuple(clique),) if clique else ())
                w3 = multiply(w2, rest)
                triples.append((w1, w2, w3))
    return triples


def enumerate_up_to(g: SimpleGraph, max_length: int, cap: Optional[int] = None) -> List[NormalWord]:
    """All elements of length at most ``max_length``, shortest first, canonical order within a length."""
    if max_length < 0:
        raise InputError("maximal word length must be non-negative")
    cap = settings.resolved_caps().enumeration_cap if cap is None else cap
    start = time.time()
    level = [identity(g)]
    words = list(level)
    for n in range(1, max_length + 1):
        seen: Dict[Tuple[Layer, ...], NormalWord] = {}
        for w in level:
            terminal = last_letters(w)
            for v in g.vertices:
                if v in terminal:
                    continue
                u = append_letter(w, v)
                seen.setdefault(u.layers, u)
        level = sorted(seen.values(), key=NormalWord.sort_key)
        if len(words) + len(level) > cap:
            raise ResourceCapError("enumeration", cap, len(words) + len(level))
        if not level:
            break
        words.extend(level)
    logger.debug(f"📚 enumerated {len(words)} elements up to length {max_length} in {time.time() - start:.2f}s")
    return words


@dataclass(frozen=True)
class CombinatoricsReport:
    """Outcome of the exhaustive start/end-letter equivalence check."""
    passed: bool
    checked: int
    counterexample: Optional[Dict[str, str]] = None

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "counterexample": self.counterexample}


def verify_combinatorics_lemma(
    g: SimpleGraph,
    gamma1: SubsetLike,
    gamma2: SubsetLike,
    max_length: int,
    cap: Optional[int] = None,
) -> CombinatoricsReport:
    """Check ``u⁻¹wu′ ∈ W_{Γ2}`` ⇔ ``u = u′`` and ``w ∈ W_{Γ1∩Γ2∩Link(u)}`` exhaustively.

    ``w`` ranges over W_{Γ1}; ``u, u′`` over words that neither start with a
    letter of Γ1 nor end with a letter of Γ2.
    """
    g1 = g.check_vertices(gamma1.members if isinstance(gamma1, VertexSubset) else gamma1)
    g2 = g.check_vertices(gamma2.members if isinstance(gamma2, VertexSubset) else gamma2)
    words = enumerate_up_to(g, max_length, cap)
    inner = [w for w in words if w.support <= g1]
    outer = [u for u in words if not (first_letters(u) & g1) and not (last_letters(u) & g2)]
    checked = 0
    for u in outer:
        u_inv = inverse(u)
        allowed = g1 & g2 & link_of_word(u).members
        for u2 in outer:
            for w in inner:
                checked += 1
                lhs = multiply(multiply(u_inv, w), u2).support <= g2
                rhs = u.layers == u2.layers and w.support <= allowed
                if lhs != rhs:
                    return CombinatoricsReport(
                        passed=False,
                        checked=checked,
                        counterexample={"u": str(u), "u_prime": str(u2), "w": str(w)},
                    )
    return CombinatoricsReport(passed=True, checked=checked)


@dataclass(frozen=True)
class GrowthTable:
    """Element counts per length and, optionally, the q-weighted sums."""
    counts: Tuple[int, ...]
    weighted: Optional[Tuple[float, ...]] = None

    def to_dict(self) -> dict:
        data = {"counts": list(self.counts)}
        if self.weighted is not None:
            data["weighted"] = list(self.weighted)
        return data


def growth_counts_bfs(g: SimpleGraph, max_length: int, cap: Optional[int] = None) -> GrowthTable:
    counts = [0] * (max_length + 1)
    for w in enumerate_up_to(g, max_length, cap):
        counts[w.length] += 1
    return GrowthTable(tuple(counts))


def cliques(g: SimpleGraph) -> List[Layer]:
    """Non-empty cliques, each sorted, ordered by size then canonically."""
    found = [sort_vertices(c) for c in nx.enumerate_all_cliques(g.to_networkx())]
    return sorted(found, key=lambda c: (len(c), tuple(vertex_key(v) for v in c)))


def layer_successor_allowed(g: SimpleGraph, previous: Layer, following: Layer) -> bool:
    """Whether ``following`` can be the next Cartier–Foata layer after ``previous``."""
    return all(
        v not in previous and any(not g.adjacent(u, v) for u in previous)
        for v in following
    )


def _check_weights(g: SimpleGraph, q: Optional[Mapping[Vertex, float]]) -> Dict[Vertex, float]:
    q = dict(q or {})
    unknown = [v for v in q if v not in g]
    if unknown:
        raise InputError(f"weights given for unknown vertices: {', '.join(unknown)}")
    weights = {v: float(q.get(v, 1.0)) for v in g.vertices}
    for v, value in weights.items():
        if not 0.0 < value <= 1.0:
            raise InputError(f"Hecke parameter for '{v}' must lie in (0, 1], got {value}")
    return weights


def _transfer(g: SimpleGraph, weights: Mapping[Vertex, float]):
    states = cliques(g)
    weight = [float(np.prod([weights[v] for v in c])) for c in states]
    successors = [
        [j for j, t in enumerate(states) if layer_successor_allowed(g, s, t)]
        for s in states
    ]
    return states, weight, successors


def growth_counts_transfer(
    g: SimpleGraph, max_length: int, q: Optional[Mapping[Vertex, float]] = None
) -> GrowthTable:
    """Counts and q-weighted sums per length via the layer transfer matrix."""
    weights = _check_weights(g, q)
    states, weight, successors = _transfer(g, weights)
    counts = [[0] * len(states) for _ in range(max_length + 1)]
    sums = [[0.0] * len(states) for _ in range(max_length + 1)]
    for i, c in enumerate(states):
        if len(c) <= max_length:
            counts[len(c)][i] += 1
            sums[len(c)][i] += weight[i]
    for n in range(1, max_length + 1):
        for i in range(len(states)):
            if not counts[n][i]:
                continue
            for j in successors[i]:
                m = n + len(states[j])
                if m <= max_length:
                    counts[m][j] += counts[n][i]
                    sums[m][j] += sums[n][i] * weight[j]
    total_counts = [1] + [sum(row) for row in counts[1:]]
    total_sums = [1.0] + [sum(row) for row in sums[1:]]
    return GrowthTable(tuple(total_counts[: max_length + 1]), tuple(total_sums[: max_length + 1]))


def transfer_spectral_radius(g: SimpleGraph, q: Optional[Mapping[Vertex, float]] = None) -> float:
    weights = _check_weights(g, q)
    states, weight, successors = _transfer(g, weights)
    if not states:
        return 0.0
    matrix = np.zeros((len(states), len(states)))
    for i, targets in enumerate(successors):
        for j in targets:
            matrix[i, j] = weight[j]
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def hecke_sum_converges(g: SimpleGraph, q: Optional[Mapping[Vertex, float]] = None) -> TriState:
    """Whether the sum of ``q_w`` over all of W_Γ is finite."""
    weights = _check_weights(g, q)
    if all(g.adjacent(u, v) for u, v in itertools.combinations(g.vertices, 2)):
        return TriState.yes("finite group: complete graph")
    rho = transfer_spectral_radius(g, weights)
    tol = settings.spectral_tolerance
    if rho < 1.0 - tol:
        return TriState.yes(f"transfer matrix spectral radius {rho:.12g} < 1")
    if rho > 1.0 + tol:
        return TriState.no(f"transfer matrix spectral radius {rho:.12g} > 1")
    if all(value == 1.0 for value in weights.values()):
        return TriState.no("q ≡ 1 counts elements of an infinite group")
    return TriState.unknown(f"spectral radius {rho:.12g} within {tol:g} of 1")


def hecke_alpha(q: float) -> float:
    """Weight of the larger minimal projection of the two-dimensional Hecke algebra."""
    if not 0.0 < q <= 1.0:
        raise InputError(f"Hecke parameter must lie in (0, 1], got {q}")
    return 1.0 / (1.0 + q)


def hecke_q_from_alpha(alpha: float) -> float:
    """Inverse of :func:`hecke_alpha`, symmetric under ``alpha ↔ 1 - alpha``."""
    if not 0.0 < alpha < 1.0:
        raise InputError(f"state weight must lie in (0, 1), got {alpha}")
    return min(alpha, 1.0 - alpha) / max(alpha, 1.0 - alpha)


def coxeter_group_amenable(g: SimpleGraph) -> bool:
    """No induced copy of three isolated vertices or of an edge plus an isolated vertex."""
    for triple in itertools.combinations(g.vertices, 3):
        edges = sum(g.adjacent(u, v) for u, v in itertools.combinations(triple, 2))
        if edges <= 1:
            return False
    return True
