"""Exception hierarchy shared across the package.

Three broad families matter to callers: configuration mistakes, data
problems, and numerical failures. The CLI maps them to distinct exit codes.
"""


class BayesEpiError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(BayesEpiError):
    """A configuration value is out of range or inconsistent."""


class DimensionMismatchError(BayesEpiError):
    """Array shapes do not line up."""


class NotPositiveDefiniteError(BayesEpiError):
    """Cholesky failed even after diagonal jitter escalation."""


class SingularHessianError(BayesEpiError):
    """Newton step could not be computed from the outset."""


class CsvParseError(BayesEpiError):
    """A CSV cell could not be interpreted.

    ``row`` is the 1-based data row (the header is row 0); ``column`` is the
    column name.
    """

    def __init__(self, row, column, message):
        super().__init__(f"row {row}, column '{column}': {message}")
        # args must match __init__ so instances survive pickling to workers
        self.args = (row, column, message)
        self.row = row
        self.column = column


class NonBinaryLabelError(BayesEpiError):
    """Label or event column cannot be coded as 0/1."""


class SingleClassError(BayesEpiError):
    """Both outcome classes are required but only one is present."""


class DegenerateLogitsError(BayesEpiError):
    """Predicted probabilities carry no variation on the logit scale."""


class TooFewObservationsError(BayesEpiError):
    """Not enough observations for the requested summary."""


class NoComparablePairsError(BayesEpiError):
    """Survival data admit no pair usable for concordance."""


class NoEventsError(BayesEpiError):
    """Survival data contain no observed events."""


class FoldWithoutEventsError(BayesEpiError):
    """Cross-validation could not build folds whose training parts all retain an event."""


class ObjectiveFailureError(BayesEpiError):
    """A black-box objective evaluation raised; carries the offending point."""

    def __init__(self, point, cause):
        super().__init__(f"objective failed at {point!r}: {cause}")
        self.args = (point, cause)
        self.point = point
        self.cause = cause


class ReplicateFailureError(BayesEpiError):
    """A simulation replicate failed; carries the replicate index and cause."""

    def __init__(self, replicate, cause):
        super().__init__(f"replicate {replicate} failed: {cause}")
        self.args = (replicate, cause)
        self.replicate = replicate
        self.cause = cause
