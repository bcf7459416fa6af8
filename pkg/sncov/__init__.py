"""Sphericity tests for high-dimensional covariance matrices built on
self-normalized observations.

Dividing every observation by its norm removes the scalar scale ωᵢ of
elliptical and volatility-clustering models, so the limiting spectrum of the
self-normalized sample covariance matrix is the Marčenko–Pastur law whatever
the scales are.
"""
# Python imports
import os
from importlib import metadata

# Project imports
from sncov.errors import (ConfigError, DegenerateSpectrumError, DegenerateTargetError,  # noqa: F401
                          DomainError, Error, IncompleteReportError, InternalInconsistencyError,
                          NumericalError, QuadratureError, UnsupportedParametersError,
                          UnsupportedRegimeError)


def _version():
    # A source checkout keeps VERSION next to the package.
    path = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "VERSION")
    if os.path.exists(path):
        with open(path) as f:
            return f.read().strip()
    try:
        return metadata.version("sncov")
    except metadata.PackageNotFoundError:
        return "unknown"


VERSION = _version()
