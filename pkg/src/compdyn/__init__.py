"""Composition operators induced by disk automorphisms on Hardy spaces.

The package classifies automorphisms of the unit disk, evaluates H^p norms
by boundary quadrature, iterates the composition operator ``f -> f o phi``
and turns the hypercyclicity/mixing dichotomy into checkable numerics.
"""

from compdyn.config import DEFAULT_TOLERANCES, Tolerances
from compdyn.errors import (
    BudgetExhaustedError,
    CompdynError,
    DegenerateMapError,
    DomainError,
    HypothesisError,
    InvalidAutomorphismError,
)

__all__ = [
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "CompdynError",
    "DegenerateMapError",
    "InvalidAutomorphismError",
    "DomainError",
    "HypothesisError",
    "BudgetExhaustedError",
]

__version__ = "0.1.0"
