"""Simulation and certification of saddle-point dynamics."""

__version__ = "0.1.0"

from .errors import CapabilityError, ContractError, DomainError, NumericError, SaddleScopeError
from .functions import SaddleFunction, catalog_function
from .dynamics import PiecewiseField, VectorField, saddle_field
from .integrate import IntegratorConfig, Trajectory
from .report import Certificate

__all__ = [
    "CapabilityError", "Certificate", "ContractError", "DomainError", "IntegratorConfig",
    "NumericError", "PiecewiseField", "SaddleFunction", "SaddleScopeError", "Trajectory",
    "VectorField", "catalog_function", "saddle_field",
]
