"""Quantum Heisenberg group algebra: groups, dressing orbits, twisted
convolution algebras, their representations and the braiding operators."""
from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
