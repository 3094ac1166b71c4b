class SynthesisError(Exception):
    """Base class for synthesis failures."""


class InvalidSetupError(SynthesisError, ValueError):
    pass


class BasisError(SynthesisError, ValueError):
    """The estimator basis is unstable or not controllable."""


class SolveFailedError(SynthesisError):
    """A required SDP did not reach an optimal status."""

    def __init__(self, message: str, solution=None) -> None:
        super().__init__(message)
        self.solution = solution


class CouplingViolationError(SynthesisError):
    """``[[S, I], [I, R]]`` is not positive semidefinite."""


class RecoveryInfeasibleError(SynthesisError):
    """No estimator realization satisfies the recovery LMI for the given certificate."""


class AlphaBelowToleranceError(SynthesisError, ValueError):
    pass
