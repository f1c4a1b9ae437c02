"""Exception types shared across the package."""


class OrbitileError(Exception):
    """Base class for all orbitile errors."""


class ParseError(OrbitileError):
    """Malformed substitution-system text or JSON document."""


class UnknownLetter(OrbitileError):
    def __init__(self, letter, alphabet=None):
        self.letter = letter
        msg = f"letter {letter!r} is not in the alphabet"
        if alphabet is not None:
            msg += f" {sorted(alphabet)!r}"
        super().__init__(msg)


class NotPrimitive(OrbitileError):
    """Operation requires a primitive substitution system."""


class NotExpansive(OrbitileError):
    """Operation requires an expansive substitution system."""


class BadParameters(OrbitileError):
    """Parameters outside the supported range (e.g. p or q below 5)."""


class IndeterminateComparison(OrbitileError):
    """A scalar comparison could not be resolved within the bit budget.

    Raised instead of guessing; carries the budget that was exhausted.
    """

    def __init__(self, message, bits=None):
        self.bits = bits
        if bits is not None:
            message = f"{message} (bit budget {bits} exhausted)"
        super().__init__(message)


class DegenerateOffset(OrbitileError):
    """An offset (c, d) produced an exact tie in a tile-index decision."""


class WindowTooNarrow(OrbitileError):
    """A window does not span the rows or columns an operation needs."""


class BoundaryVertex(OrbitileError):
    """The requested vertex is too close to the patch boundary."""


class BoundaryEdge(OrbitileError):
    """The requested edge lacks a fully materialized face on one side."""


class InconsistentCycle(OrbitileError):
    """A face's edge-increment labels do not sum to zero; the labeling is
    not realizable as orbit rows."""

    def __init__(self, message, face=None):
        self.face = face
        super().__init__(message)


class InvalidConstruction(OrbitileError):
    """An internal construction step produced data violating its contract."""
