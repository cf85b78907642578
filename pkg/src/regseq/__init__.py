"""Asymptotics of q-regular sequences: summatory functions, Dirichlet series,
Fourier coefficients of fluctuations and the esthetic-number example."""

__version__ = "0.1.0"

from .errors import (AccuracyError, DomainError, GeometryError, InvalidArgumentError,  # noqa: F401
                     NearPoleError, RegseqError, RepresentationFormatError, ResourceLimitError)
from .linrep import (LinearRepresentation, evaluate, power, summatory_brute,  # noqa: F401
                     summatory_fast, zero_stabilized)
