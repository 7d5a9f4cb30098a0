"""Truncated Fock-space model of a graph product of finite-dimensional algebras.

The space H_Γ = ⊕_w H̊_w is cut off at word length ``depth``. A basis vector is
a reduced word together with one index into H̊_v per letter; letters are
labelled ``(v, k)`` for the k-th occurrence of ``v``, which does not depend on
the reduced expression chosen, so shuffles never need explicit unitaries.

Operators are dense numpy matrices carrying a word-length budget ``k``: they
raise lengths by at most ``k`` and are exact on vectors of length ``≤ depth - k``.
"""

import itertools
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from algebras import VertexAlgebra
from config import settings
from coxeter import (
    NormalWord,
    enumerate_up_to,
    first_letters,
    inverse,
    is_clique_word,
    is_reduced,
    multiply,
    normalize,
)
from errors import InputError, ResourceCapError
from graph_core import SimpleGraph, SubsetLike, Vertex, VertexSubset

logger = logging.getLogger(__name__)

Label = Tuple[Vertex, int]


# Vertex models

@dataclass(frozen=True, eq=False)
class VertexModel:
    """A finite-dimensional algebra of n×n matrices with a faithful state.

    ``commutative`` models are the diagonal matrices; otherwise the full matrix
    algebra. The state is ``x ↦ Tr(diag(weights)·x)``.
    """
    size: int
    weights: Tuple[float, ...]
    commutative: bool
    basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.size < 1 or len(self.weights) != self.size:
            raise InputError("state weights must match the model size")
        if any(w <= 0 for w in self.weights):
            raise InputError("vertex state must be faithful (all weights > 0)")
        if not np.isclose(sum(self.weights), 1.0, atol=1e-12):
            raise InputError(f"state weights must sum to 1, got {sum(self.weights)}")
        if self.dimension < 2:
            raise InputError("scalar vertex models are not allowed")
        object.__setattr__(self, "basis", self._orthonormal_basis())

    @classmethod
    def diagonal(cls, weights: Sequence[float]) -> "VertexModel":
        return cls(len(weights), tuple(float(w) for w in weights), True)

    @classmethod
    def uniform(cls, d: int) -> "VertexModel":
        return cls.diagonal([1.0 / d] * d)

    @classmethod
    def hecke(cls, q: float) -> "VertexModel":
        """ℂ² with weights ``1/(1+q)``, ``q/(1+q)``."""
        if not 0.0 < q <= 1.0:
            raise InputError(f"Hecke parameter must lie in (0, 1], got {q}")
        return cls.diagonal([1.0 / (1.0 + q), q / (1.0 + q)])

    @classmethod
    def matrix(cls, n: int, weights: Optional[Sequence[float]] = None) -> "VertexModel":
        """M_n with the normalized trace, or with the density ``diag(weights)``."""
        weights = [1.0 / n] * n if weights is None else [float(w) for w in weights]
        return cls(n, tuple(weights), False)

    @property
    def dimension(self) -> int:
        """Dimension of the algebra, hence of H_v."""
        return self.size if self.commutative else self.size * self.size

    @property
    def is_tracial(self) -> bool:
        return self.commutative or np.allclose(self.weights, self.weights[0], atol=1e-15)

    @property
    def density(self) -> np.ndarray:
        return np.diag(np.asarray(self.weights, dtype=complex))

    def state(self, x: np.ndarray) -> complex:
        return complex(np.trace(self.density @ x))

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        """GNS inner product ``⟨x, y⟩ = φ(y* x)``."""
        return self.state(y.conj().T @ x)

    def _units(self) -> List[np.ndarray]:
        units = [np.eye(self.size, dtype=complex)]
        cells = [(i, i) for i in range(self.size)] if self.commutative else list(itertools.product(range(self.size), repeat=2))
        for i, j in cells:
            unit = np.zeros((self.size, self.size), dtype=complex)
            unit[i, j] = 1.0
            units.append(unit)
        return units

    def _orthonormal_basis(self) -> np.ndarray:
        found: List[np.ndarray] = []
        for unit in self._units():
            v = unit.copy()
            for b in found:
                v = v - self.inner(v, b) * b
            norm = np.sqrt(max(self.inner(v, v).real, 0.0))
            if norm > 1e-12:
                found.append(v / norm)
        if len(found) != self.dimension:
            raise AssertionError(f"expected {self.dimension} basis elements, found {len(found)}")
        return np.array(found)

    def check_element(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.size, self.size):
            raise InputError(f"expected a {self.size}×{self.size} element, got shape {a.shape}")
        if self.commutative and not np.allclose(a, np.diag(np.diag(a))):
            raise InputError("element of a commutative model must be diagonal")
        return a

    def coordinates(self, a: np.ndarray) -> np.ndarray:
        """Coordinates of ``aΩ_v`` in the orthonormal basis; index 0 is Ω_v."""
        a = self.check_element(a)
        return np.array([self.inner(a, b) for b in self.basis])

    def left(self, a: np.ndarray) -> np.ndarray:
        """Matrix of left multiplication by ``a`` on H_v."""
        a = self.check_element(a)
        return np.array([[self.inner(a @ bj, bi) for bj in self.basis] for bi in self.basis])

    def conjugation(self) -> np.ndarray:
        """``C`` with ``J_v ξ = C·conj(ξ)``, where ``J_v(xΩ_v) = x*Ω_v``."""
        if not self.is_tracial:
            raise InputError("modular conjugation is implemented for tracial vertex states only")
        return np.array([[self.inner(bj.conj().T, bi) for bj in self.basis] for bi in self.basis])

    def random_element(self, rng: np.random.Generator, centered: bool = False) -> np.ndarray:
        shape = self.size if self.commutative else (self.size, self.size)
        values = rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape)
        a = np.diag(values) if self.commutative else values
        if centered:
            a = a - self.state(a) * np.eye(self.size)
        return a


def model_for(algebra: VertexAlgebra, stand_in_dim: int = 2) -> VertexModel:
    """Finite model of a vertex algebra; infinite ones get a uniform commutative stand-in."""
    if algebra.two_dim_alpha is not None:
        return VertexModel.diagonal([algebra.two_dim_alpha, 1.0 - algebra.two_dim_alpha])
    if algebra.matrix_size is not None:
        return VertexModel.matrix(algebra.matrix_size)
    if algebra.dimension is not None:
        return VertexModel.uniform(algebra.dimension)
    logger.debug(f"🎭 using a {stand_in_dim}-dimensional commutative stand-in for a {algebra.kind} vertex")
    return VertexModel.uniform(stand_in_dim)


# Operators

@dataclass(frozen=True, eq=False)
class OperatorRep:
    """Dense operator ``ξ ↦ M ξ`` (or ``M conj(ξ)`` when antilinear) with a length budget."""
    matrix: np.ndarray
    budget: int
    antilinear: bool = False

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ (vector.conj() if self.antilinear else vector)

    def __matmul__(self, other: "OperatorRep") -> "OperatorRep":
        right = other.matrix.conj() if self.antilinear else other.matrix
        return OperatorRep(self.matrix @ right, self.budget + other.budget, self.antilinear != other.antilinear)

    def __add__(self, other: "OperatorRep") -> "OperatorRep":
        if self.antilinear != other.antilinear:
            raise InputError("cannot add a linear and an antilinear operator")
        return OperatorRep(self.matrix + other.matrix, max(self.budget, other.budget), self.antilinear)

    def __sub__(self, other: "OperatorRep") -> "OperatorRep":
        return self + other.scaled(-1.0)

    def scaled(self, c: complex) -> "OperatorRep":
        return OperatorRep(c * self.matrix, self.budget, self.antilinear)

    def adjoint(self) -> "OperatorRep":
        if self.antilinear:
            raise InputError("adjoints are only taken of linear operators")
        return OperatorRep(self.matrix.conj().T, self.budget)


def commutator(x: OperatorRep, y: OperatorRep) -> OperatorRep:
    return x @ y - y @ x


# The truncated space

def labels(word: NormalWord) -> Tuple[Label, ...]:
    """Leg labels of ``word`` in the order of its canonical letters."""
    seen: Counter = Counter()
    out = []
    for v in word.letters:
        out.append((v, seen[v]))
        seen[v] += 1
    return tuple(out)


class TruncatedFockSpace:
    """Orthonormal basis of ⊕_{|w| ≤ depth} H̊_w, words by length then canonical form."""

    def __init__(self, graph: SimpleGraph, models: Mapping[Vertex, VertexModel], depth: int):
        self.graph = graph
        self.models = dict(models)
        self.depth = depth
        self.words: List[NormalWord] = []
        self.basis: List[Tuple[NormalWord, Tuple[int, ...]]] = []
        self._index: Dict[Tuple[Tuple, Tuple[int, ...]], int] = {}
        self._labels: Dict[Tuple, Tuple[Label, ...]] = {}
        self._first: Dict[Tuple, frozenset] = {}

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def tracial(self) -> bool:
        return all(m.is_tracial for m in self.models.values())

    def labels_of(self, word: NormalWord) -> Tuple[Label, ...]:
        if word.layers not in self._labels:
            self._labels[word.layers] = labels(word)
        return self._labels[word.layers]

    def first_of(self, word: NormalWord) -> frozenset:
        if word.layers not in self._first:
            self._first[word.layers] = first_letters(word)
        return self._first[word.layers]

    def lookup(self, word: NormalWord, legs: Mapping[Label, int]) -> int:
        key = (word.layers, tuple(legs[label] for label in self.labels_of(word)))
        return self._index[key]

    def omega(self) -> np.ndarray:
        vector = np.zeros(self.dimension, dtype=complex)
        vector[0] = 1.0
        return vector

    def lengths(self) -> np.ndarray:
        return np.array([w.length for w, _ in self.basis])

    def domain(self, budget: int) -> np.ndarray:
        """Indices of basis vectors on which an operator of this budget is exact."""
        return np.flatnonzero(self.lengths() <= self.depth - budget)

    def mask(self, predicate) -> np.ndarray:
        return np.array([1.0 if predicate(w) else 0.0 for w, _ in self.basis])

    def identity(self) -> OperatorRep:
        return OperatorRep(np.eye(self.dimension, dtype=complex), 0)

    def zero(self) -> OperatorRep:
        return OperatorRep(np.zeros((self.dimension, self.dimension), dtype=complex), 0)

    def check_budget(self, op: OperatorRep) -> OperatorRep:
        if op.budget > self.depth:
            raise InputError(f"operator raises word length by up to {op.budget}, beyond depth {self.depth}")
        return op


def _check_models(g: SimpleGraph, models: Mapping[Vertex, VertexModel]) -> None:
    missing = [v for v in g.vertices if v not in models]
    if missing:
        raise InputError(f"no vertex model for vertex id(s): {', '.join(missing)}")


def fock_dimension(g: SimpleGraph, models: Mapping[Vertex, VertexModel], words: Iterable[NormalWord]) -> int:
    return sum(int(np.prod([models[v].dimension - 1 for v in w.letters])) for w in words)


def build_space(
    g: SimpleGraph,
    models: Mapping[Vertex, VertexModel],
    depth: int,
    cap: Optional[int] = None,
    enumeration_cap: Optional[int] = None,
) -> TruncatedFockSpace:
    """Enumerate the basis of the depth-``depth`` truncation."""
    _check_models(g, models)
    if depth < 0:
        raise InputError("truncation depth must be non-negative")
    caps = settings.resolved_caps()
    cap = caps.fock_dimension_cap if cap is None else cap
    start = time.time()
    words = enumerate_up_to(g, depth, caps.enumeration_cap if enumeration_cap is None else enumeration_cap)
    total = fock_dimension(g, models, words)
    if total > cap:
        raise ResourceCapError("fock", cap, total)
    space = TruncatedFockSpace(g, models, depth)
    space.words = words
    for w in words:
        ranges = [range(1, models[v].dimension) for v in w.letters]
        for legs in itertools.product(*ranges):
            space._index[(w.layers, legs)] = len(space.basis)
            space.basis.append((w, legs))
    logger.info(f"🏗️ Fock space of dimension {space.dimension} at depth {depth} built in {time.time() - start:.2f}s")
    return space


# Vertex actions

def _letter(space: TruncatedFockSpace, v: Vertex) -> NormalWord:
    return NormalWord(space.graph, ((v,),))


def _shift(legs: Mapping[Label, int], v: Vertex, delta: int) -> Dict[Label, int]:
    return {(x, k + delta if x == v else k): i for (x, k), i in legs.items()}


def lambda_operator(space: TruncatedFockSpace, v: Vertex, op: np.ndarray) -> OperatorRep:
    """``U_v (op ⊗ 1) U_v*`` for an operator ``op`` on H_v, via H_Γ ≅ H_v ⊗ H(v)."""
    if v not in space.models:
        raise InputError(f"unknown vertex id '{v}'")
    d = space.models[v].dimension
    op = np.asarray(op, dtype=complex)
    if op.shape != (d, d):
        raise InputError(f"operator on H_{v} must be {d}×{d}")
    letter = _letter(space, v)
    matrix = np.zeros((space.dimension, space.dimension), dtype=complex)
    for col, (word, legs) in enumerate(space.basis):
        current = dict(zip(space.labels_of(word), legs))
        if v in space.first_of(word):
            i = current.pop((v, 0))
            shorter = multiply(letter, word)
            rest = _shift(current, v, -1)
            for j in range(d):
                if op[j, i] == 0:
                    continue
                if j == 0:
                    target = space.lookup(shorter, rest)
                else:
                    target = space.lookup(word, {**current, (v, 0): j})
                matrix[target, col] += op[j, i]
        else:
            matrix[col, col] += op[0, 0]
            if word.length + 1 > space.depth:
                continue
            longer = multiply(letter, word)
            grown = _shift(current, v, 1)
            for j in range(1, d):
                if op[j, 0] != 0:
                    matrix[space.lookup(longer, {**grown, (v, 0): j}), col] += op[j, 0]
    return OperatorRep(matrix, 1)


def lambda_vertex(space: TruncatedFockSpace, v: Vertex, a: np.ndarray) -> OperatorRep:
    """λ_v(a) for an element ``a`` of the vertex model."""
    if v not in space.models:
        raise InputError(f"unknown vertex id '{v}'")
    return lambda_operator(space, v, space.models[v].left(a))


def starts_with_projection(space: TruncatedFockSpace, v: Vertex) -> np.ndarray:
    """Diagonal of P_v, the projection onto words starting with ``v``."""
    return space.mask(lambda w: v in space.first_of(w))


# Reduced operators

@dataclass(frozen=True, eq=False)
class ReducedTensor:
    """``coefficient · a_1⋯a_n`` with ``a_i`` state-zero, along a reduced word."""
    word: NormalWord
    factors: Tuple[Tuple[Label, np.ndarray], ...]
    coefficient: complex = 1.0

    @property
    def support(self) -> frozenset:
        return self.word.support


def reduced_tensor(
    space: TruncatedFockSpace,
    letters: Sequence[Vertex],
    elements: Sequence[np.ndarray],
    coefficient: complex = 1.0,
) -> ReducedTensor:
    letters = [str(v) for v in letters]
    if len(letters) != len(elements):
        raise InputError("one element per letter is required")
    if not is_reduced(space.graph, letters):
        raise InputError(f"letters {' '.join(letters)} do not form a reduced word")
    tol = settings.tolerance
    seen: Counter = Counter()
    by_label: Dict[Label, np.ndarray] = {}
    for v, a in zip(letters, elements):
        model = space.models[v]
        a = model.check_element(a)
        if abs(model.state(a)) > tol * max(1.0, float(np.abs(a).max())):
            raise InputError(f"element at letter {v} is not state-zero")
        by_label[(v, seen[v])] = a
        seen[v] += 1
    word = normalize(space.graph, letters)
    ordered = tuple((label, by_label[label]) for label in space.labels_of(word))
    return ReducedTensor(word, ordered, complex(coefficient))


def tensor_operator(space: TruncatedFockSpace, t: ReducedTensor) -> OperatorRep:
    op = space.identity().scaled(t.coefficient)
    for (v, _), a in t.factors:
        op = op @ lambda_vertex(space, v, a)
    return op


def reduced_operator(
    space: TruncatedFockSpace,
    letters: Sequence[Vertex],
    elements: Sequence[np.ndarray],
) -> OperatorRep:
    """λ(a_1)⋯λ(a_n) for state-zero ``a_i`` along the reduced word ``letters``."""
    return space.check_budget(tensor_operator(space, reduced_tensor(space, letters, elements)))


def _in_splittings(word: NormalWord, triple: Sequence[NormalWord]) -> bool:
    w1, w2, w3 = triple
    product = multiply(multiply(w1, w2), w3)
    return (
        product.layers == word.layers
        and w1.length + w2.length + w3.length == word.length
        and is_clique_word(w2)
    )


def lambda_part(
    space: TruncatedFockSpace,
    triple: Sequence[NormalWord],
    t: ReducedTensor,
) -> OperatorRep:
    """The piece of λ(a) creating ``w1``, acting diagonally on ``w2`` and annihilating ``w3``."""
    if len(triple) != 3 or not _in_splittings(t.word, triple):
        raise InputError("triple is not a clique splitting of the tensor's word")
    w1, w2, w3 = triple
    factors = dict(t.factors)
    offsets: Counter = Counter()
    op = space.identity().scaled(t.coefficient)
    for part, piece in enumerate((w1, w2, w3)):
        local: Counter = Counter()
        for v in piece.letters:
            label = (v, offsets[v] + local[v])
            local[v] += 1
            p = starts_with_projection(space, v)
            left = p if part < 2 else 1.0 - p
            right = 1.0 - p if part == 0 else p
            core = lambda_vertex(space, v, factors[label]).matrix
            op = op @ OperatorRep(left[:, None] * core * right[None, :], 1)
        offsets.update(local)
    return op


# Expectations

def _members(space: TruncatedFockSpace, lam: SubsetLike) -> frozenset:
    if isinstance(lam, VertexSubset):
        return space.graph.check_vertices(lam.members)
    return space.graph.check_vertices(lam)


def projection_e(space: TruncatedFockSpace, lam: SubsetLike) -> OperatorRep:
    """Orthogonal projection onto ⊕_{w ∈ W_Λ} H̊_w."""
    members = _members(space, lam)
    return OperatorRep(np.diag(space.mask(lambda w: w.support <= members)).astype(complex), 0)


def conditional_expectation(
    space: TruncatedFockSpace,
    lam: SubsetLike,
    terms: Sequence[ReducedTensor],
) -> OperatorRep:
    """E_Λ of a sum of reduced tensors: the terms supported in Λ survive."""
    members = _members(space, lam)
    result = space.zero()
    for t in terms:
        if t.support <= members:
            result = result + tensor_operator(space, t)
    return space.check_budget(result)


def expand(space: TruncatedFockSpace, vector: np.ndarray, tol: Optional[float] = None) -> List[ReducedTensor]:
    """Reduced tensors ``x_i`` with ``Σ x_i Ω = vector``."""
    tol = settings.tolerance if tol is None else tol
    terms = []
    for i in np.flatnonzero(np.abs(vector) > tol):
        word, legs = space.basis[i]
        factors = tuple(
            (label, space.models[label[0]].basis[leg])
            for label, leg in zip(space.labels_of(word), legs)
        )
        terms.append(ReducedTensor(word, factors, complex(vector[i])))
    return terms


def operator_from_vector(space: TruncatedFockSpace, vector: np.ndarray) -> OperatorRep:
    """The element ``x`` of the graph product with ``xΩ = vector``."""
    result = space.zero()
    for t in expand(space, vector):
        result = result + tensor_operator(space, t)
    return result


def expectation(space: TruncatedFockSpace, lam: SubsetLike, x: OperatorRep) -> OperatorRep:
    """E_Λ(x), read off from ``E_Λ(x)Ω = e_Λ xΩ``."""
    space.check_budget(x)
    return operator_from_vector(space, projection_e(space, lam).apply(x.apply(space.omega())))


def state(space: TruncatedFockSpace, x: OperatorRep) -> complex:
    """φ_Γ(x) = ⟨xΩ, Ω⟩."""
    return complex(x.apply(space.omega())[0])


# Modular conjugation

def modular_J(space: TruncatedFockSpace) -> OperatorRep:
    """``J(a_1⋯a_nΩ) = a_n*⋯a_1*Ω``: the word is reversed and each leg conjugated."""
    if not space.tracial:
        raise InputError("modular conjugation is implemented for tracial vertex states only")
    conj = {v: m.conjugation() for v, m in space.models.items()}
    matrix = np.zeros((space.dimension, space.dimension), dtype=complex)
    for col, (word, legs) in enumerate(space.basis):
        reverse = inverse(word)
        counts = Counter(word.letters)
        mirrored = [((v, counts[v] - 1 - k), i) for (v, k), i in zip(space.labels_of(word), legs)]
        choices = [
            [(j, conj[v][j, i]) for j in range(1, space.models[v].dimension) if abs(conj[v][j, i]) > 0]
            for (v, _), i in mirrored
        ]
        for combo in itertools.product(*choices):
            target = dict(zip((label for label, _ in mirrored), (j for j, _ in combo)))
            value = np.prod([c for _, c in combo]) if combo else 1.0
            matrix[space.lookup(reverse, target), col] += value
    return OperatorRep(matrix, 0, antilinear=True)


def conjugate_by_J(space: TruncatedFockSpace, x: OperatorRep, J: Optional[OperatorRep] = None) -> OperatorRep:
    """``J x J``, a linear operator."""
    J = modular_J(space) if J is None else J
    return J @ x @ J


def sub_space(space: TruncatedFockSpace, lam: SubsetLike) -> TruncatedFockSpace:
    """The truncated space of the graph product over the induced subgraph Λ."""
    members = _members(space, lam)
    g = space.graph.induced(members)
    return build_space(g, {v: space.models[v] for v in g.vertices}, space.depth)


def embedding_indices(space: TruncatedFockSpace, sub: TruncatedFockSpace) -> np.ndarray:
    """Position in ``space`` of each basis vector of ``sub``."""
    out = []
    for word, legs in sub.basis:
        lifted = normalize(space.graph, word.letters)
        out.append(space.lookup(lifted, dict(zip(sub.labels_of(word), legs))))
    return np.array(out, dtype=int)


def clique_parts_sum(space: TruncatedFockSpace, t: ReducedTensor, splittings: Iterable[Sequence[NormalWord]]) -> OperatorRep:
    result = space.zero()
    for triple in splittings:
        result = result + lambda_part(space, triple, t)
    return result
