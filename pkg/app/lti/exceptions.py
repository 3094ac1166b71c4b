class LTIError(Exception):
    """Base class for every failure raised by :mod:`app.lti`."""


class DimensionMismatchError(LTIError, ValueError):
    pass


class NonFiniteError(LTIError, ValueError):
    pass


class UnstableSystemError(LTIError):
    """A Lyapunov/Stein solve or norm was requested for a system with rho(A) >= 1."""


class SingularResolventError(LTIError):
    """``e^{j theta} I - A`` is singular: theta sits on a pole."""


class NotInvertibleError(LTIError):
    """The feedthrough matrix is singular or the inverse system is unstable."""


class NonCoerciveSpectrumError(LTIError):
    """The spectral density is not positive definite on the unit circle."""


class RiccatiError(LTIError):
    """The Riccati equation behind a spectral factorization could not be solved accurately."""


class NotPositiveSemidefiniteError(LTIError, ValueError):
    pass
