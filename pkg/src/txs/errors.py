"""Exception types shared across the package."""


class TxsError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TxsError):
    """Malformed input text; carries the offset where parsing failed."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}, column {column})"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class DeclarationError(TxsError):
    """Invalid, duplicate, or conflicting declaration."""


class UndeclaredHeadError(TxsError):
    """A tensor head, derivative, or constant symbol was never declared."""


class RankMismatchError(TxsError):
    """Number of indices does not match the declared rank."""


class IndexPairingError(TxsError):
    """An index label occurs more than twice, or twice with equal variance."""


class InhomogeneousFreeIndicesError(TxsError):
    """Terms of one sum disagree on their free indices."""


class DerivativePresentError(TxsError):
    """Operation does not accept covariant-derivative wrappers."""


class DummyPresentError(TxsError):
    """Operation requires an expression without dummy indices."""


class SymmetryViolationError(TxsError):
    """A numeric component assignment breaks the declared symmetry."""


class SingularMetricError(TxsError):
    """The assigned metric component matrix is not invertible."""


class GroupCapError(TxsError):
    """Generated permutation group exceeds the configured size cap."""


class ParityError(TxsError):
    """Leftover index count has the wrong parity for full contraction."""


class InfeasibleRankError(TxsError):
    """Expression cannot supply the number of indices an identity needs."""


class ShapeMismatchError(TxsError):
    """Young tableau shape does not fit the expression's free indices."""


class NonlinearityError(TxsError):
    """Equation is not linear in the requested unknowns."""


class InconsistentSystemError(TxsError):
    """Linear system has no solution."""


class NoSolutionError(TxsError):
    """A trace or projection system is singular."""


class NoSolvableStructureError(TxsError):
    """No uncontracted tensor structure available to solve for."""


class UnsupportedHeadError(TxsError):
    """Variation rules for this head are unknown."""


class CapExceededError(TxsError):
    """Requested computation exceeds a configured size cap."""
