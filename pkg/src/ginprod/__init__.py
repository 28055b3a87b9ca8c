"""Multi-time correlation kernels for squared singular values of products of
random matrices, with Monte Carlo sampling and verification tools."""
from ._accel import BACKEND
from .process import ConfigError, Ginibre, GinibreSource, NumericalError, ProcessSpec, TruncatedUnitary

__version__ = "0.1.0"

__all__ = ["BACKEND", "ConfigError", "Ginibre", "GinibreSource", "NumericalError", "ProcessSpec",
           "TruncatedUnitary", "__version__"]
