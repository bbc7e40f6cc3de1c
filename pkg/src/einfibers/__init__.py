"""Numerical models for fibers of domains of discontinuity of SO0(p, p+1)
Hitchin representations in the Einstein universe Ein^{p-1,p}."""

__version__ = "0.1.0"

from .errors import InputError, InvariantViolation, PreconditionError, ProximalityError, StepSizeError
from .flags import EinPoint, IsotropicFlag, decompose, fibration_project, in_thickening
from .pseudo_core import QuadraticSpace, Subspace, q_eval, signature
from .report import CheckReport
from .symspace import SpacelikePoint, TangentMap, basepoint, cartan_projection, metric

__all__ = [
    "CheckReport",
    "EinPoint",
    "InputError",
    "InvariantViolation",
    "IsotropicFlag",
    "PreconditionError",
    "ProximalityError",
    "QuadraticSpace",
    "SpacelikePoint",
    "StepSizeError",
    "Subspace",
    "TangentMap",
    "basepoint",
    "cartan_projection",
    "decompose",
    "fibration_project",
    "in_thickening",
    "metric",
    "q_eval",
    "signature",
]
