"""Exception hierarchy shared by the library and the command line."""

from typing import List, Optional


class GPFactorError(Exception):
    """Base class for errors raised by gpfactor."""


class InputError(GPFactorError, ValueError):
    """Invalid graph, word, descriptor or verification request."""


class DocumentError(InputError):
    """An input document failed validation; carries positioned messages."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "invalid document")


class ResourceCapError(GPFactorError):
    """A configured resource cap would be exceeded."""

    def __init__(self, cap: str, limit: int, attempted: Optional[int] = None):
        self.cap = cap
        self.limit = limit
        self.attempted = attempted
        detail = f" (needed at least {attempted})" if attempted is not None else ""
        super().__init__(f"{cap} cap of {limit} exceeded{detail}")
