"""Exception hierarchy.

Every error raised on bad input derives from :class:`InputError`, which is
also a :class:`ValueError` so callers used to numpy/sklearn conventions can
catch it the usual way.
"""


class ConservaError(Exception):
    """Base class for all package errors."""


class InputError(ConservaError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad parameters."""


class DomainError(InputError):
    """A point lies outside the domain of a chart or evaluator."""


class UnsupportedEquilibriumError(InputError):
    """The equilibrium has ``q_n == 0`` where a construction divides by it."""


class DegenerateNormalizationError(InputError):
    """``1 + sum(q')`` vanishes, so the simplex normalization is undefined."""


class InvalidCertificateError(ConservaError):
    """A candidate matrix D violates one of the two certificate conditions."""

    def __init__(self, message, skew_residual=None, offdiag_residual=None):
        super().__init__(message)
        self.skew_residual = skew_residual
        self.offdiag_residual = offdiag_residual
