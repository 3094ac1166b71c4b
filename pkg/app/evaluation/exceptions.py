class EvaluationError(Exception):
    """Base class for estimator evaluation errors."""


class CertificateSolveError(EvaluationError):
    """An evaluation SDP did not reach an optimal solution."""

    def __init__(self, message: str, solution=None) -> None:
        super().__init__(message)
        self.solution = solution


class MetricNotApplicableError(EvaluationError):
    """The metric is undefined for this pair of estimators."""


class SampleSizeError(EvaluationError, ValueError):
    """Too few Monte-Carlo samples for the requested confidence interval."""


class BracketError(EvaluationError):
    """A line search could not bracket its root."""
