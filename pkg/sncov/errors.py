"""Exceptions raised by sncov.

Every error derives from Error, so one except clause traps them all.
"""


class Error(Exception):
    """Base class for all sncov errors."""


class DomainError(Error, ValueError):
    """An argument lies outside the domain of the requested operation."""


class UnsupportedParametersError(DomainError):
    """The hypergeometric series does not terminate for these parameters."""


class UnsupportedRegimeError(DomainError):
    """The statistic is undefined for this dimension-to-sample-size ratio."""


class DegenerateTargetError(DomainError):
    """An estimated diagonal target has a (numerically) zero entry."""


class DegenerateSpectrumError(DomainError):
    """The input's spectrum has eigenvalues at or below the eigenvalue floor."""


class NumericalError(Error, ArithmeticError):
    """An eigensolver or quadrature routine failed to produce a finite result."""


class QuadratureError(NumericalError):
    """A contour integral left an imaginary residue that is not negligible."""


class InternalInconsistencyError(NumericalError):
    """A closed-form quantity violated a property it must satisfy."""


class ConfigError(Error):
    """An experiment or command line configuration is invalid."""


class IncompleteReportError(Error):
    """A report does not cover the cells a table layout asks for."""
