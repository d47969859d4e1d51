"""Exception types shared across the engine.

Compile-time problems derive from CompileError so the CLI can map them to a
single exit code; everything that can only happen while a conversation is
running derives from EngineError.
"""

from __future__ import annotations


class CGDialogError(Exception):
    """Base class for all engine errors."""


class CompileError(CGDialogError):
    """Raised for any problem in source text, manifests, or content packs."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", col {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class KBSyntaxError(CompileError):
    pass


class ArityError(CompileError):
    """A predicate was written with more than two arguments."""


class UnknownKindError(CompileError):
    """A rule block used a kind keyword the compiler does not know."""


class RedefinitionError(CompileError):
    """An id was declared twice with incompatible shape."""


class SignatureConflict(CGDialogError):
    """Same predicate id carries different argument tuples in two graphs."""


class CycleError(CGDialogError):
    """The type ontology would contain a directed cycle."""


class UnknownConcept(CGDialogError):
    """An operation referenced a concept id absent from the graph."""


class EngineError(CGDialogError):
    """Base class for runtime (conversation-time) failures."""


class TooLarge(EngineError):
    """The brute-force matcher refused an input above its safety bound."""


class CoverageError(EngineError):
    """A token was left uncovered after span merging (malformed parse input)."""


class DanglingSpan(EngineError):
    """A transformation attachment referenced a span outside the span map."""


class ParseFixtureMissing(EngineError):
    """Text input had no recorded parse and no fallback parser was enabled."""


class NoCandidate(EngineError):
    """Response selection found no candidate at all, not even a fallback."""


class EmptyResponse(EngineError):
    """Both response segments realized to empty strings."""


class MissingSurface(CGDialogError):
    """A template slot had to fall back to a raw concept id."""
