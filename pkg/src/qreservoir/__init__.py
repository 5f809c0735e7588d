"""Quantum reservoir computing and extreme learning machine simulations."""

from .core import IdentityReservoir, NumericalInstabilityError, convergence_test, run_sequence
from .gaussian import GaussianConfig, GaussianReservoir
from .spin import SpinConfig, SpinReservoir

__all__ = [
    "GaussianConfig",
    "GaussianReservoir",
    "IdentityReservoir",
    "NumericalInstabilityError",
    "SpinConfig",
    "SpinReservoir",
    "convergence_test",
    "run_sequence",
]
