"""Exception types shared across the package."""


class DualityLabError(Exception):
    """Base class for package-specific errors."""


class ConvexityError(DualityLabError, ValueError):
    """Raised when data cannot represent a convex function of the declared class."""


class DomainError(DualityLabError, ValueError):
    """Raised when a function is evaluated outside its domain of definition."""


class ClassTagError(DualityLabError, ValueError):
    """Raised when an operation receives a function of the wrong class."""


class ClassificationError(DualityLabError, ValueError):
    """Raised when a classification step receives out-of-scope input."""


class GridValidationError(DualityLabError, ValueError):
    """Raised when a sampled grid function fails validation.

    Carries the list of violations found.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class LatticeMismatchError(DualityLabError, ValueError):
    """Raised when two grid functions live on different lattices."""


class HypothesisViolationError(DualityLabError, ValueError):
    """Raised when sampled data fails a lemma's hypothesis.

    `witness` holds the violating pair or triple.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConsistencyError(DualityLabError, RuntimeError):
    """Raised when two internal computation routes disagree beyond tolerance."""


class CorpusError(DualityLabError, ValueError):
    """Raised when a corpus lacks elements an operation requires."""


class SpecFormatError(DualityLabError, ValueError):
    """Raised when a serialized function or transform cannot be parsed."""
