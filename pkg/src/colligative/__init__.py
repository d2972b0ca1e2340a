"""Finite-size phase diagram of a dilute salt solution in an Ising solvent."""

__version__ = "0.1.0"

from .rates import BoundaryCondition, DomainError, ModelParams, ThermoPoint  # noqa: E402
from .variational import MinimizerSet, minimize_q  # noqa: E402

__all__ = [
    "__version__",
    "BoundaryCondition",
    "DomainError",
    "ModelParams",
    "ThermoPoint",
    "MinimizerSet",
    "minimize_q",
]
