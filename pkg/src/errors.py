"""Exception hierarchy for the SBN estimation toolkit.

Every error raised on purpose by the library derives from :class:`SbnError`.
The ``exit_code`` class attribute tells the CLI which status to return:

- 2: the input could not be parsed (Newick syntax, malformed files)
- 3: the input parsed but failed validation (taxa, normalization, caps)
- 1: internal defects
"""

from typing import Any


class SbnError(Exception):
    """Base exception for all toolkit errors."""

    exit_code = 3


class ParseError(SbnError):
    """Base class for errors raised while reading text input."""

    exit_code = 2


class ValidationError(SbnError):
    """Base class for inputs that are well-formed but unusable."""

    exit_code = 3


class UsageError(ValidationError):
    """Raised when an operation is called with incompatible arguments."""

    pass


class InvalidSubsplitError(ValidationError):
    """Raised when two clades cannot form a subsplit."""

    pass


class IncompatibleSubsplitError(ValidationError):
    """Raised when a child subsplit does not refine either part of its parent."""

    pass


class NewickError(ParseError):
    """Raised when a Newick string cannot be parsed.

    Attributes:
        line: 1-based line of the offending character.
        column: 1-based column of the offending character.
    """

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.reason = message
        self.line = line
        self.column = column


class TaxonMismatchError(ValidationError):
    """Raised when trees, parameters or targets disagree on the taxon set."""

    pass


class UnknownTaxonError(TaxonMismatchError):
    """Raised when a Newick leaf names a taxon outside the taxon set."""

    def __init__(self, name: str, line: int = 1, column: int = 1):
        super().__init__(f"Unknown taxon '{name}' (line {line}, column {column})")
        self.name = name
        self.line = line
        self.column = column


class EmptySampleError(ValidationError):
    """Raised when a fit or count is requested on an empty sample."""

    pass


class EnumerationCapError(ValidationError):
    """Raised when exhaustive enumeration is requested above the configured cap."""

    def __init__(self, n_taxa: int, cap: int):
        super().__init__(
            f"Refusing to enumerate trees on {n_taxa} taxa: cap is {cap} "
            "(raise SBN_ENUM_CAP to allow more)"
        )
        self.n_taxa = n_taxa
        self.cap = cap


class ModelFileError(ParseError):
    """Raised when a parameter, tree-sample or target file is malformed."""

    def __init__(self, message: str, path: Any = None, line: int | None = None):
        location = ""
        if path is not None:
            location = f" in {path}"
        if line is not None:
            location += f" at line {line}"
        super().__init__(f"{message}{location}")
        self.path = path
        self.line = line


class NormalizationError(ValidationError):
    """Raised when a distribution does not sum to one within tolerance.

    Attributes:
        observed_sum: The sum that was found.
    """

    def __init__(self, message: str, observed_sum: float | None = None):
        super().__init__(message)
        self.observed_sum = observed_sum


class SupportResolutionError(ValidationError):
    """Raised when the support requested for a KL divergence cannot be listed."""

    pass


class EmMonotonicityError(SbnError):
    """Raised when an EM iteration lowers the objective beyond rounding slack.

    EM cannot decrease the (regularized) log-likelihood, so this always points
    at an implementation defect rather than at bad input.
    """

    exit_code = 1

    def __init__(self, iteration: int, previous: float, current: float):
        super().__init__(
            f"EM objective decreased at iteration {iteration}: "
            f"{previous!r} -> {current!r}"
        )
        self.iteration = iteration
        self.previous = previous
        self.current = current
