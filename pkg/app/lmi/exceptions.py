class LMIError(Exception):
    """Base class for errors raised while building or solving an LMI program."""


class DuplicateVariableError(LMIError, ValueError):
    pass


class MalformedProgramError(LMIError, ValueError):
    """Non-square constraint, shape clash, or a variable nothing refers to."""


class UnknownSolverError(LMIError, ValueError):
    pass
