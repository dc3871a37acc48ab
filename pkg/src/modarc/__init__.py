"""Canonical bases of weakly holomorphic modular forms for Gamma0(2) and Gamma0(3),
their zeros on the lower boundary arc, and certified numerical bounds."""

from .qseries import LaurentSeries, eisenstein, eta_quotient

__version__ = "0.1.0"

__all__ = ["LaurentSeries", "eisenstein", "eta_quotient", "__version__"]
