"""Input documents: a graph with one algebra descriptor per vertex."""

import json
import logging
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator

import algebras
from algebras import FLAG_NAMES, VertexAlgebra
from errors import DocumentError, InputError
from graph_core import SimpleGraph
from verdicts import TriState

logger = logging.getLogger(__name__)

FlagValue = Literal["yes", "no", "unknown"]

GIVEN = "stated in the input document"
CUSTOM_REQUIRED = ("dimension", "amenable", "atomic", "diffuse", "strongly_solid")


class AlgebraDescriptor(BaseModel):
    """One vertex algebra: a named family with its parameter, or a flag map."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    kind: Literal["hecke", "two_dim", "matrix", "II1", "custom"] = Field(..., description="Descriptor family")
    q: Optional[float] = Field(None, description="Hecke parameter in (0, 1]")
    alpha: Optional[float] = Field(None, description="State weight of a two-dimensional algebra")
    n: Optional[int] = Field(None, description="Matrix size")
    dimension: Optional[Union[PositiveInt, Literal["inf"]]] = Field(None, description="Vector-space dimension")

    amenable: Optional[FlagValue] = None
    atomic: Optional[FlagValue] = None
    diffuse: Optional[FlagValue] = None
    strongly_solid: Optional[FlagValue] = None
    is_factor: Optional[FlagValue] = None
    is_II1_factor: Optional[FlagValue] = None
    prime: Optional[FlagValue] = None
    has_trace_zero_unitary: Optional[FlagValue] = Field(None, alias="trace_zero_unitary")
    separable_predual: Optional[FlagValue] = None
    strong_AO: Optional[FlagValue] = None
    in_C_vertex: Optional[FlagValue] = None

    def flag_values(self) -> Dict[str, str]:
        return {name: getattr(self, name) for name in FLAG_NAMES if getattr(self, name) is not None}

    @model_validator(mode="after")
    def _check_kind(self) -> "AlgebraDescriptor":
        params = {"q": self.q, "alpha": self.alpha, "n": self.n, "dimension": self.dimension}
        wanted = {"hecke": "q", "two_dim": "alpha", "matrix": "n"}.get(self.kind)
        if wanted is not None:
            if params[wanted] is None:
                raise ValueError(f"kind '{self.kind}' needs '{wanted}'")
            extra = [k for k, v in params.items() if v is not None and k != wanted]
            if extra or self.flag_values():
                raise ValueError(f"kind '{self.kind}' takes only '{wanted}'; its flags are derived")
        elif self.kind == "II1":
            if any(params[k] is not None for k in ("q", "alpha", "n")):
                raise ValueError("kind 'II1' takes flags only")
            if self.dimension not in (None, "inf"):
                raise ValueError("a II1 factor is infinite-dimensional")
        else:
            if any(params[k] is not None for k in ("q", "alpha", "n")):
                raise ValueError("kind 'custom' takes a dimension and flags only")
            present = {"dimension": self.dimension, **self.flag_values()}
            missing = [name for name in CUSTOM_REQUIRED if present.get(name) is None]
            if missing:
                raise ValueError(f"custom descriptor is missing: {', '.join(missing)}")
        return self

    def to_algebra(self) -> VertexAlgebra:
        flags = {name: TriState.parse(value, GIVEN) for name, value in self.flag_values().items()}
        if self.kind == "hecke":
            return algebras.hecke(self.q)
        if self.kind == "two_dim":
            return algebras.two_dim(self.alpha)
        if self.kind == "matrix":
            return algebras.matrix(self.n)
        if self.kind == "II1":
            return algebras.ii1(**flags)
        dimension = None if self.dimension == "inf" else self.dimension
        return algebras.custom(dimension, **flags)


class VertexEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1, description="Vertex id")
    algebra: AlgebraDescriptor


class Options(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enumeration_cap: Optional[PositiveInt] = None
    fock_dimension_cap: Optional[PositiveInt] = None
    sweep_cap: Optional[PositiveInt] = None
    assume_II1_factor: Optional[bool] = None

    def caps(self) -> Dict[str, Optional[int]]:
        return {
            "enumeration_cap": self.enumeration_cap,
            "fock_dimension_cap": self.fock_dimension_cap,
            "sweep_cap": self.sweep_cap,
        }


class InputDocument(BaseModel):
    """The whole input: vertices with descriptors, edges and options."""
    model_config = ConfigDict(extra="forbid")

    vertices: List[VertexEntry] = Field(default_factory=list)
    edges: List[Tuple[str, str]] = Field(default_factory=list)
    options: Options = Field(default_factory=Options)

    def semantic_errors(self) -> List[str]:
        errors = []
        seen = {}
        for i, entry in enumerate(self.vertices):
            if entry.id in seen:
                errors.append(f"vertices.{i}.id: duplicate id '{entry.id}' (first at vertices.{seen[entry.id]})")
            else:
                seen[entry.id] = i
        pairs = set()
        for i, (u, v) in enumerate(self.edges):
            for end in (u, v):
                if end not in seen:
                    errors.append(f"edges.{i}: unknown vertex id '{end}'")
            if u == v:
                errors.append(f"edges.{i}: self-edge on '{u}'")
            elif frozenset((u, v)) in pairs:
                errors.append(f"edges.{i}: duplicate edge {u}-{v}")
            pairs.add(frozenset((u, v)))
        for i, entry in enumerate(self.vertices):
            try:
                entry.algebra.to_algebra()
            except InputError as exc:
                errors.append(f"vertices.{i}.algebra: {exc}")
        return errors

    def graph(self) -> SimpleGraph:
        return SimpleGraph.from_edges([v.id for v in self.vertices], self.edges)

    def descriptors(self) -> Dict[str, VertexAlgebra]:
        return {entry.id: entry.algebra.to_algebra() for entry in self.vertices}

    def normalized(self) -> dict:
        """The document as plain data, explicit defaults dropped."""
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


def _location(loc: Tuple) -> str:
    return ".".join(str(part) for part in loc) or "document"


def parse(data: Union[bytes, str]) -> InputDocument:
    """Validate an input document; every problem is reported with its position."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError([f"byte {exc.start}: input is not valid UTF-8"]) from None
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError([f"line {exc.lineno} column {exc.colno}: {exc.msg}"]) from None
    try:
        doc = InputDocument.model_validate(raw)
    except ValidationError as exc:
        raise DocumentError([f"{_location(err['loc'])}: {err['msg']}" for err in exc.errors()]) from None
    errors = doc.semantic_errors()
    if errors:
        raise DocumentError(errors)
    logger.debug(f"📄 parsed document with {len(doc.vertices)} vertices and {len(doc.edges)} edges")
    return doc
