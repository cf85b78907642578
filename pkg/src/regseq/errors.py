"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: format errors exit with 2,
domain/accuracy errors with 3 and resource limits with 4.
"""


class RegseqError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class InvalidArgumentError(RegseqError, ValueError):
    pass


class RepresentationFormatError(RegseqError, ValueError):
    exit_code = 2


class ResourceLimitError(RegseqError):
    exit_code = 4


class DomainError(RegseqError, ValueError):
    pass


class NearPoleError(DomainError):
    pass


class GeometryError(DomainError):
    pass


class AccuracyError(RegseqError, ArithmeticError):
    pass
