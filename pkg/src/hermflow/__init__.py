"""Geodesics of compatible (metric, symplectic) pairs on a fiber over a point."""

__version__ = "0.1.0"

from .config import TOL, Tolerances
from .errors import (
    CompatibilityError,
    DegenerateInputError,
    DomainError,
    DriftError,
    GenerationError,
    HermflowError,
    InvalidInputError,
    NumericalFailureError,
)
from .fiber import HermitianPair, make_pair, pullback, random_pair, standard_pair
from .tangent import TangentPair, project_normal, project_tangent, split4
from .geodesic import InitialData, Trajectory, integrate, make_initial, observables
from .variational import DiscreteCurve, energy_curve, first_variation_fd
from .field import SampledField, global_energy, map_pointwise
from .verify import run_checks

__all__ = [
    "TOL", "Tolerances",
    "CompatibilityError", "DegenerateInputError", "DomainError", "DriftError",
    "GenerationError", "HermflowError", "InvalidInputError", "NumericalFailureError",
    "HermitianPair", "make_pair", "pullback", "random_pair", "standard_pair",
    "TangentPair", "project_normal", "project_tangent", "split4",
    "InitialData", "Trajectory", "integrate", "make_initial", "observables",
    "DiscreteCurve", "energy_curve", "first_variation_fd",
    "SampledField", "global_energy", "map_pointwise",
    "run_checks",
]
