"""Randomized numerical checks of conditional-expectation and commutator identities.

Every check spawns one child seed per trial from ``SeedSequence(seed)``, so a
report depends only on the seed and trial count, never on the worker count.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from config import settings
from coxeter import NormalWord, first_letters, identity, inverse, last_letters, link_of_word, multiply
from errors import InputError
from fock import (
    OperatorRep,
    ReducedTensor,
    TruncatedFockSpace,
    commutator,
    conjugate_by_J,
    embedding_indices,
    expectation,
    lambda_vertex,
    modular_J,
    projection_e,
    reduced_tensor,
    state,
    sub_space,
    tensor_operator,
)
from graph_core import SubsetLike, Vertex, VertexSubset, sort_vertices, star

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one randomized identity check."""
    identity: str
    passed: bool
    trials: int
    max_residual: float
    tolerance: float
    seed: int
    depth: int
    dimension: int
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "passed": self.passed,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "depth": self.depth,
            "dimension": self.dimension,
            "details": self.details,
        }


def run_trials(trial: Callable[[np.random.Generator], T], trials: int, seed: int, workers: int = 1) -> List[T]:
    if trials < 1:
        raise InputError("at least one trial is required")
    if workers < 1:
        raise InputError("worker count must be positive")
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(trials)]
    if workers == 1:
        return [trial(rng) for rng in rngs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(trial, rngs))


def _report(name: str, space: TruncatedFockSpace, residuals: Sequence[float], tol: float, seed: int, **details) -> VerificationReport:
    worst = float(max(residuals)) if residuals else 0.0
    passed = worst <= tol
    log = logger.info if passed else logger.warning
    log(f"{'✅' if passed else '❌'} {name}: max residual {worst:.3e} over {len(residuals)} trials")
    return VerificationReport(
        identity=name,
        passed=passed,
        trials=len(residuals),
        max_residual=worst,
        tolerance=tol,
        seed=seed,
        depth=space.depth,
        dimension=space.dimension,
        details=details,
    )


def _members(space: TruncatedFockSpace, lam: SubsetLike) -> frozenset:
    if isinstance(lam, VertexSubset):
        return space.graph.check_vertices(lam.members)
    return space.graph.check_vertices(lam)


def _pick(rng: np.random.Generator, options: Sequence[NormalWord]) -> NormalWord:
    return options[int(rng.integers(len(options)))]


def random_tensor(space: TruncatedFockSpace, word: NormalWord, rng: np.random.Generator, coefficient: complex = 1.0) -> ReducedTensor:
    """State-zero random factors along ``word``."""
    elements = [space.models[v].random_element(rng, centered=True) for v in word.letters]
    return reduced_tensor(space, word.letters, elements, coefficient)


def random_combination(
    space: TruncatedFockSpace,
    words: Sequence[NormalWord],
    rng: np.random.Generator,
    terms: int = 3,
) -> OperatorRep:
    """A scalar plus up to ``terms`` random reduced tensors over ``words``."""
    op = space.identity().scaled(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
    nontrivial = [w for w in words if w.length > 0]
    for _ in range(terms if nontrivial else 0):
        op = op + tensor_operator(space, random_tensor(space, _pick(rng, nontrivial), rng))
    return op


def _admissible(space: TruncatedFockSpace, g1: frozenset, g2: frozenset) -> List[NormalWord]:
    """Words with no first letter in Γ1 and no last letter in Γ2."""
    return [u for u in space.words if not (first_letters(u) & g1) and not (last_letters(u) & g2)]


def _within(words: Sequence[NormalWord], budget: int) -> List[NormalWord]:
    return [w for w in words if w.length <= budget]


def _norm(vector: np.ndarray) -> float:
    return float(np.linalg.norm(vector))


def verify_expectation_triple(
    space: TruncatedFockSpace,
    gamma1: SubsetLike,
    gamma2: SubsetLike,
    trials: int = 20,
    seed: int = 0,
    tol: Optional[float] = None,
    workers: int = 1,
) -> VerificationReport:
    """``E_Γ2(a1 a2 a3) = φ(a1 a3) a2`` or 0, and its version for general ``x ∈ M_Γ1``.

    ``a1 ∈ M̊_{u⁻¹}``, ``a2 ∈ M̊_w`` with ``w ∈ W_Γ1`` and ``a3 ∈ M̊_{u′}``, where
    ``u, u′`` start outside Γ1 and end outside Γ2.
    """
    tol = settings.tolerance if tol is None else tol
    if space.depth < 1:
        raise InputError("expectation checks need depth at least 1")
    g1, g2 = _members(space, gamma1), _members(space, gamma2)
    admissible = _admissible(space, g1, g2)
    inside = [w for w in space.words if w.support <= g1]
    e2 = projection_e(space, g2)
    omega = space.omega()
    depth = space.depth

    def trial(rng: np.random.Generator) -> float:
        u = _pick(rng, admissible)
        partners = _within(admissible, depth - u.length)
        u2 = u if rng.random() < 0.5 and 2 * u.length <= depth else _pick(rng, partners)
        w = _pick(rng, _within(inside, depth - u.length - u2.length))
        a1 = tensor_operator(space, random_tensor(space, inverse(u), rng))
        a2 = tensor_operator(space, random_tensor(space, w, rng))
        a3 = tensor_operator(space, random_tensor(space, u2, rng))
        phi = state(space, a1 @ a3)

        lhs = e2.apply(a1.apply(a2.apply(a3.apply(omega))))
        lands = multiply(multiply(inverse(u), w), u2).support <= g2
        rhs = phi * a2.apply(omega) if lands else np.zeros_like(omega)
        residual = _norm(lhs - rhs)

        x = random_combination(space, _within(inside, depth - u.length - u2.length), rng)
        lhs_x = e2.apply(a1.apply(x.apply(a3.apply(omega))))
        corner = g1 & g2 & link_of_word(u).members
        rhs_x = phi * projection_e(space, corner).apply(x.apply(omega))
        return max(residual, _norm(lhs_x - rhs_x))

    start = time.time()
    residuals = run_trials(trial, trials, seed, workers)
    logger.debug(f"⏱️ expectation triple trials took {time.time() - start:.2f}s")
    return _report(
        "expectation_triple", space, residuals, tol, seed,
        gamma1=list(sort_vertices(g1)), gamma2=list(sort_vertices(g2)),
    )


def _random_split(
    rng: np.random.Generator,
    left: Sequence[NormalWord],
    centre: Sequence[NormalWord],
    right: Sequence[NormalWord],
    budget: int,
    attempts: int = 50,
) -> Optional[Tuple[NormalWord, NormalWord, NormalWord]]:
    """A reduced product ``l·c·r`` with ``l`` from ``left``, ``c`` from ``centre`` and ``r`` from ``right``.

    Returns None when no reduced product turned up within ``attempts`` draws.
    """
    for _ in range(attempts):
        l = _pick(rng, _within(left, budget))
        c = _pick(rng, _within(centre, budget - l.length))
        r = _pick(rng, _within(right, budget - l.length - c.length))
        if multiply(multiply(l, c), r).length == l.length + c.length + r.length:
            return l, c, r
    return None


def verify_iterated_expectation(
    space: TruncatedFockSpace,
    gamma1: SubsetLike,
    gamma2: SubsetLike,
    trials: int = 20,
    seed: int = 0,
    tol: Optional[float] = None,
    workers: int = 1,
) -> VerificationReport:
    """``E_Γ2(a* E_Γ1(x) b) = φ(a_c* b_c) a_r* E_{Γ1∩Γ2∩Link(u_c)}(a_l* x b_l) b_r``."""
    tol = settings.tolerance if tol is None else tol
    if space.depth < 1:
        raise InputError("expectation checks need depth at least 1")
    g1, g2 = _members(space, gamma1), _members(space, gamma2)
    admissible = _admissible(space, g1, g2)
    in1 = [w for w in space.words if w.support <= g1]
    in2 = [w for w in space.words if w.support <= g2]
    e2 = projection_e(space, g2)
    omega = space.omega()
    depth = space.depth
    e = identity(space.graph)

    def factors(rng: np.random.Generator, budget: int):
        words = _random_split(rng, in1, admissible, in2, budget)
        degenerate = words is None
        if degenerate:
            logger.warning(f"⚠️ no reduced split found within length {budget}; using the empty word")
            words = (e, e, e)
        ops = [tensor_operator(space, random_tensor(space, w, rng)) for w in words]
        return words, ops, degenerate

    def trial(rng: np.random.Generator) -> Tuple[float, int]:
        x_len = int(rng.integers(0, depth // 3 + 1))
        a_budget = int(rng.integers(0, depth - x_len + 1))
        (_, u_c, _), (a_l, a_c, a_r), a_degenerate = factors(rng, a_budget)
        _, (b_l, b_c, b_r), b_degenerate = factors(rng, depth - x_len - a_budget)
        x = random_combination(space, _within(space.words, x_len), rng)

        a_star = (a_l @ a_c @ a_r).adjoint()
        b = b_l @ b_c @ b_r
        inner = expectation(space, g1, x)
        lhs = e2.apply(a_star.apply(inner.apply(b.apply(omega))))

        phi = state(space, a_c.adjoint() @ b_c)
        corner = g1 & g2 & link_of_word(u_c).members
        middle = expectation(space, corner, a_l.adjoint() @ x @ b_l)
        rhs = phi * a_r.adjoint().apply(middle.apply(b_r.apply(omega)))
        return _norm(lhs - rhs), int(a_degenerate) + int(b_degenerate)

    start = time.time()
    outcomes = run_trials(trial, trials, seed, workers)
    logger.debug(f"⏱️ iterated expectation trials took {time.time() - start:.2f}s")
    return _report(
        "iterated_expectation", space, [r for r, _ in outcomes], tol, seed,
        gamma1=list(sort_vertices(g1)), gamma2=list(sort_vertices(g2)),
        degenerate_splits=sum(n for _, n in outcomes),
    )


def verify_commutator_star(
    space: TruncatedFockSpace,
    v: Vertex,
    trials: int = 20,
    seed: int = 0,
    tol: Optional[float] = None,
    workers: int = 1,
) -> VerificationReport:
    """``[λ_v(a), Jλ_w(b)J]`` lives on the Star(v) block and vanishes for ``w ≠ v``."""
    tol = settings.tolerance if tol is None else tol
    if v not in space.graph:
        raise InputError(f"unknown vertex id '{v}'")
    if space.depth < 2:
        raise InputError("commutator checks need depth at least 2")
    if not space.tracial:
        raise InputError("modular conjugation is implemented for tracial vertex states only")
    around = star(space.graph, v).members
    sub = sub_space(space, around)
    lifted = embedding_indices(space, sub)
    J, J_sub = modular_J(space), modular_J(sub)
    domain = space.domain(2)
    outside = np.array([i for i in domain if not space.basis[i][0].support <= around], dtype=int)
    sub_domain = sub.domain(2)
    rest_rows = np.setdiff1d(np.arange(space.dimension), lifted)
    others = [w for w in space.graph.vertices if w != v]
    model = space.models[v]

    def trial(rng: np.random.Generator) -> float:
        a, b = model.random_element(rng), model.random_element(rng)
        full = commutator(lambda_vertex(space, v, a), conjugate_by_J(space, lambda_vertex(space, v, b), J)).matrix
        local = commutator(lambda_vertex(sub, v, a), conjugate_by_J(sub, lambda_vertex(sub, v, b), J_sub)).matrix
        residuals = [0.0]
        if outside.size:
            residuals.append(float(np.abs(full[:, outside]).max()))
        block = full[np.ix_(lifted, lifted[sub_domain])] - local[:, sub_domain]
        residuals.append(float(np.abs(block).max()) if block.size else 0.0)
        if rest_rows.size and sub_domain.size:
            residuals.append(float(np.abs(full[np.ix_(rest_rows, lifted[sub_domain])]).max()))
        if others:
            w = others[int(rng.integers(len(others)))]
            c = space.models[w].random_element(rng)
            cross = commutator(lambda_vertex(space, v, a), conjugate_by_J(space, lambda_vertex(space, w, c), J)).matrix
            residuals.append(float(np.abs(cross[:, domain]).max()))
        return max(residuals)

    start = time.time()
    residuals = run_trials(trial, trials, seed, workers)
    logger.debug(f"⏱️ commutator trials took {time.time() - start:.2f}s")
    return _report(
        "commutator_star", space, residuals, tol, seed,
        vertex=v, star=list(sort_vertices(around)),
    )
