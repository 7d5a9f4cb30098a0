"""Three-valued verdicts with provenance notes.

Combinators follow Kleene's strong logic: a conjunction is No as soon as one
conjunct is No, Yes only when every conjunct is Yes, Unknown otherwise.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class Verdict(Enum):
    """Possible outcomes of a structural decision."""
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TriState:
    """A verdict together with the rule that produced it."""
    verdict: Verdict
    provenance: str = ""

    def __post_init__(self):
        if self.verdict is Verdict.UNKNOWN and not self.provenance.strip():
            raise ValueError("an Unknown verdict needs a provenance note")

    @classmethod
    def yes(cls, provenance: str = "") -> "TriState":
        return cls(Verdict.YES, provenance)

    @classmethod
    def no(cls, provenance: str = "") -> "TriState":
        return cls(Verdict.NO, provenance)

    @classmethod
    def unknown(cls, provenance: str) -> "TriState":
        return cls(Verdict.UNKNOWN, provenance)

    @classmethod
    def from_bool(cls, value: bool, provenance: str = "") -> "TriState":
        return cls(Verdict.YES if value else Verdict.NO, provenance)

    @classmethod
    def parse(cls, text: str, provenance: str = "") -> "TriState":
        """Read a document flag value ``yes`` / ``no`` / ``unknown``."""
        verdict = Verdict(text.strip().lower())
        if verdict is Verdict.UNKNOWN and not provenance:
            provenance = "not supplied"
        return cls(verdict, provenance)

    @property
    def is_yes(self) -> bool:
        return self.verdict is Verdict.YES

    @property
    def is_no(self) -> bool:
        return self.verdict is Verdict.NO

    @property
    def is_unknown(self) -> bool:
        return self.verdict is Verdict.UNKNOWN

    @property
    def is_decisive(self) -> bool:
        return self.verdict is not Verdict.UNKNOWN

    def with_note(self, provenance: str) -> "TriState":
        return TriState(self.verdict, provenance)

    def negate(self, provenance: str = "") -> "TriState":
        flipped = {Verdict.YES: Verdict.NO, Verdict.NO: Verdict.YES}.get(self.verdict, Verdict.UNKNOWN)
        return TriState(flipped, provenance or self.provenance)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "provenance": self.provenance}

    def __str__(self) -> str:
        return f"{self.verdict.value} ({self.provenance})" if self.provenance else self.verdict.value


def all_of(states: Iterable[TriState], provenance: str) -> TriState:
    """Kleene conjunction; the note of the first decisive No is kept."""
    pending = None
    for state in states:
        if state.is_no:
            return TriState.no(f"{provenance}: {state.provenance}" if state.provenance else provenance)
        if state.is_unknown and pending is None:
            pending = state
    if pending is not None:
        return TriState.unknown(f"{provenance}: {pending.provenance}")
    return TriState.yes(provenance)


def any_of(states: Iterable[TriState], provenance: str) -> TriState:
    """Kleene disjunction."""
    pending = None
    for state in states:
        if state.is_yes:
            return TriState.yes(f"{provenance}: {state.provenance}" if state.provenance else provenance)
        if state.is_unknown and pending is None:
            pending = state
    if pending is not None:
        return TriState.unknown(f"{provenance}: {pending.provenance}")
    return TriState.no(provenance)


def implies(premise: TriState, conclusion: TriState, provenance: str) -> TriState:
    """Kleene implication ``not premise or conclusion``."""
    return any_of([premise.negate(), conclusion], provenance)
