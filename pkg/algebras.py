"""Per-vertex algebra metadata and the rules that derive missing flags."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional

from coxeter import hecke_alpha, hecke_q_from_alpha
from errors import InputError
from verdicts import TriState

logger = logging.getLogger(__name__)

FLAG_NAMES = (
    "amenable",
    "atomic",
    "diffuse",
    "strongly_solid",
    "is_factor",
    "is_II1_factor",
    "prime",
    "has_trace_zero_unitary",
    "separable_predual",
    "strong_AO",
    "in_C_vertex",
)

_UNSET = "not supplied"


@dataclass(frozen=True)
class VertexAlgebra:
    """Metadata about one vertex algebra ``M_v``; ``dimension is None`` means infinite."""
    kind: str
    dimension: Optional[int]
    amenable: TriState
    atomic: TriState
    diffuse: TriState
    strongly_solid: TriState
    is_factor: TriState
    is_II1_factor: TriState
    prime: TriState
    has_trace_zero_unitary: TriState
    separable_predual: TriState
    strong_AO: TriState
    in_C_vertex: TriState
    hecke_q: Optional[float] = None
    two_dim_alpha: Optional[float] = None
    matrix_size: Optional[int] = None

    def __post_init__(self):
        problems = validation_problems(self)
        if problems:
            raise InputError("; ".join(problems))

    @property
    def is_finite_dimensional(self) -> bool:
        return self.dimension is not None

    def flags(self) -> Dict[str, TriState]:
        return {name: getattr(self, name) for name in FLAG_NAMES}

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind,
            "dimension": self.dimension if self.dimension is not None else "inf",
        }
        for name, state in self.flags().items():
            data[name] = state.to_dict()
        if self.hecke_q is not None:
            data["hecke_q"] = self.hecke_q
        if self.two_dim_alpha is not None:
            data["two_dim_alpha"] = self.two_dim_alpha
        if self.matrix_size is not None:
            data["matrix_size"] = self.matrix_size
        return data


def validation_problems(algebra: VertexAlgebra) -> list:
    problems = []
    dim = algebra.dimension
    if dim is not None and dim < 2:
        problems.append("scalar vertex algebra (dimension 1) is not allowed")
    if dim is not None:
        if not algebra.diffuse.is_no:
            problems.append("finite dimension requires diffuse = no")
        if not algebra.atomic.is_yes:
            problems.append("finite dimension requires atomic = yes")
        if not algebra.amenable.is_yes:
            problems.append("finite dimension requires amenable = yes")
    if algebra.diffuse.is_yes and dim is not None:
        problems.append("diffuse = yes requires infinite dimension")
    if algebra.diffuse.is_yes and algebra.atomic.is_yes:
        problems.append("an algebra cannot be both atomic and diffuse")
    if algebra.hecke_q is not None:
        if dim != 2:
            problems.append("a Hecke parameter requires dimension 2")
        if not 0.0 < algebra.hecke_q <= 1.0:
            problems.append(f"Hecke parameter must lie in (0, 1], got {algebra.hecke_q}")
    if algebra.two_dim_alpha is not None and not 0.0 < algebra.two_dim_alpha < 1.0:
        problems.append(f"alpha must lie in (0, 1), got {algebra.two_dim_alpha}")
    if algebra.in_C_vertex.is_yes:
        if not algebra.amenable.is_no:
            problems.append("in_C_vertex = yes requires amenable = no")
        if not algebra.is_II1_factor.is_yes:
            problems.append("in_C_vertex = yes requires a II1 factor")
    if algebra.in_C_vertex.is_yes and algebra.prime.is_no:
        problems.append("members of the strong (AO) class are prime")
    if algebra.is_II1_factor.is_yes and algebra.amenable.is_yes and algebra.prime.is_yes:
        problems.append("the hyperfinite II1 factor is not prime")
    if algebra.amenable.is_yes and algebra.strongly_solid.is_no:
        problems.append("amenable algebras are strongly solid")
    if algebra.is_II1_factor.is_yes and dim is not None:
        problems.append("a II1 factor is infinite-dimensional")
    if algebra.is_II1_factor.is_yes and algebra.is_factor.is_no:
        problems.append("a II1 factor is a factor")
    if dim == 2 and algebra.hecke_q is not None:
        expected = algebra.hecke_q == 1.0
        if algebra.has_trace_zero_unitary.is_decisive and algebra.has_trace_zero_unitary.is_yes != expected:
            problems.append("two-dimensional algebra has a trace-zero unitary exactly when the state is balanced")
    return problems


def _conj(*states: TriState) -> TriState:
    if any(s.is_no for s in states):
        return TriState.no("derived: a defining condition fails")
    if all(s.is_yes for s in states):
        return TriState.yes("derived: strong (AO), non-amenable, II1, separable")
    return TriState.unknown("derived: class membership undetermined")


def _finite(kind: str, dimension: int, *, factor: bool, trace_zero_unitary: bool, **extra) -> VertexAlgebra:
    return VertexAlgebra(
        kind=kind,
        dimension=dimension,
        amenable=TriState.yes("finite-dimensional"),
        atomic=TriState.yes("finite-dimensional"),
        diffuse=TriState.no("finite-dimensional"),
        strongly_solid=TriState.yes("finite-dimensional algebras are strongly solid"),
        is_factor=TriState.from_bool(factor, "matrix algebra" if factor else "commutative, dimension ≥ 2"),
        is_II1_factor=TriState.no("finite-dimensional"),
        prime=TriState.no("not a II1 factor"),
        has_trace_zero_unitary=TriState.from_bool(trace_zero_unitary, "state weights" if not factor else "normalized trace"),
        separable_predual=TriState.yes("finite-dimensional"),
        strong_AO=TriState.yes("finite-dimensional"),
        in_C_vertex=TriState.no("finite-dimensional"),
        **extra,
    )


def hecke(q: float) -> VertexAlgebra:
    """ℂ² with the state weights ``1/(1+q)`` and ``q/(1+q)``."""
    if not 0.0 < q <= 1.0:
        raise InputError(f"Hecke parameter must lie in (0, 1], got {q}")
    return _finite("hecke", 2, factor=False, trace_zero_unitary=(q == 1.0),
                   hecke_q=float(q), two_dim_alpha=hecke_alpha(q))


def two_dim(alpha: float) -> VertexAlgebra:
    """ℂ² with state weights ``(alpha, 1 - alpha)``; the same algebra as a Hecke vertex."""
    q = hecke_q_from_alpha(alpha)
    balanced = math.isclose(alpha, 0.5, rel_tol=0.0, abs_tol=1e-15)
    return _finite("two_dim", 2, factor=False, trace_zero_unitary=balanced,
                   hecke_q=1.0 if balanced else q, two_dim_alpha=float(alpha))


def matrix(n: int) -> VertexAlgebra:
    """The full matrix algebra M_n with its normalized trace."""
    if n < 2:
        raise InputError("matrix algebras must have size at least 2 (M_1 is scalar)")
    return _finite("matrix", n * n, factor=True, trace_zero_unitary=True, matrix_size=n)


def _flag(given: Mapping[str, TriState], name: str) -> TriState:
    return given.get(name, TriState.unknown(_UNSET))


def ii1(**given: TriState) -> VertexAlgebra:
    """A II1 factor described by whatever flags are known.

    Membership in the strong-(AO) class forces non-amenability and primeness;
    amenability (the hyperfinite factor) forces strong solidity and non-primeness.
    """
    unknown = set(given) - set(FLAG_NAMES)
    if unknown:
        raise InputError(f"unknown flag(s): {', '.join(sorted(unknown))}")
    given = dict(given)
    for fixed, expected in (("is_II1_factor", True), ("is_factor", True), ("diffuse", True), ("atomic", False)):
        if fixed in given and given[fixed].is_decisive and given[fixed].is_yes != expected:
            raise InputError(f"a II1 factor has {fixed} = {'yes' if expected else 'no'}")
    c_vertex = given.get("in_C_vertex")
    if c_vertex is not None and c_vertex.is_yes:
        given.setdefault("amenable", TriState.no("member of the strong (AO) class"))
        given.setdefault("strong_AO", TriState.yes("member of the strong (AO) class"))
        given.setdefault("separable_predual", TriState.yes("member of the strong (AO) class"))
        given.setdefault("prime", TriState.yes("solid non-amenable II1 factors are prime"))
    amenable = _flag(given, "amenable")
    if amenable.is_yes:
        given.setdefault("strongly_solid", TriState.yes("amenable algebras are strongly solid"))
        given.setdefault("prime", TriState.no("the hyperfinite II1 factor is not prime"))
    if c_vertex is None or c_vertex.is_unknown:
        ii1_flag = TriState.yes("II1 factor")
        c_vertex = _conj(_flag(given, "strong_AO"), amenable.negate(), ii1_flag, _flag(given, "separable_predual"))
    return VertexAlgebra(
        kind="II1",
        dimension=None,
        amenable=amenable,
        atomic=TriState.no("II1 factor"),
        diffuse=TriState.yes("II1 factor"),
        strongly_solid=_flag(given, "strongly_solid"),
        is_factor=TriState.yes("II1 factor"),
        is_II1_factor=TriState.yes("II1 factor"),
        prime=_flag(given, "prime"),
        has_trace_zero_unitary=given.get("has_trace_zero_unitary", TriState.yes("II1 factors contain Haar unitaries")),
        separable_predual=_flag(given, "separable_predual"),
        strong_AO=_flag(given, "strong_AO"),
        in_C_vertex=c_vertex,
    )


def custom(dimension: Optional[int], **given: TriState) -> VertexAlgebra:
    """Fully user-specified metadata; unspecified flags are Unknown."""
    unknown = set(given) - set(FLAG_NAMES)
    if unknown:
        raise InputError(f"unknown flag(s): {', '.join(sorted(unknown))}")
    if dimension is not None:
        given = dict(given)
        given.setdefault("amenable", TriState.yes("finite-dimensional"))
        given.setdefault("atomic", TriState.yes("finite-dimensional"))
        given.setdefault("diffuse", TriState.no("finite-dimensional"))
        given.setdefault("strongly_solid", TriState.yes("finite-dimensional"))
    if "amenable" in given and given["amenable"].is_yes:
        given = dict(given)
        given.setdefault("strongly_solid", TriState.yes("amenable algebras are strongly solid"))
    values = {name: _flag(given, name) for name in FLAG_NAMES}
    if values["in_C_vertex"].is_unknown:
        values["in_C_vertex"] = _conj(
            values["strong_AO"], values["amenable"].negate(), values["is_II1_factor"], values["separable_predual"]
        )
    return VertexAlgebra(kind="custom", dimension=dimension, **values)


def refine(algebra: VertexAlgebra, **changes: TriState) -> VertexAlgebra:
    """Copy with some Unknown flags made decisive; decisive flags cannot change.

    An Unknown ``in_C_vertex`` is derived again from the refined flags.
    """
    for name, state in changes.items():
        if name not in FLAG_NAMES:
            raise InputError(f"unknown flag '{name}'")
        current = getattr(algebra, name)
        if current.is_decisive and current.verdict is not state.verdict:
            raise InputError(f"flag '{name}' is already {current.verdict.value}")
    refined = replace(algebra, **changes)
    if refined.in_C_vertex.is_unknown:
        derived = _conj(
            refined.strong_AO, refined.amenable.negate(), refined.is_II1_factor, refined.separable_predual
        )
        refined = replace(refined, in_C_vertex=derived)
    return refined


