"""Non-classicality depth, detection and witnesses for Fock-truncated bosonic states."""

from .kernels import BACKEND
from .fock import FockOperator

__all__ = ["BACKEND", "FockOperator"]
