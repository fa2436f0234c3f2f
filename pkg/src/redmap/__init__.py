"""Reduction mappings, pullback metrics, and geometrically
preconditioned gradient descent for objectives with structured
minimiser sets."""

from .mapping import (
    AffineMapping,
    ClosedFormMapping,
    ConstantMapping,
    ImplicitArgminMapping,
    InnerProblem,
    ReductionMapping,
)
from .optim import ArmijoStep, FixedStep, SolverConfig, SolverTrace, run
from .reduced import Objective, ReducedProblem
from .spectral import Region, SpectralReport, condition_report

__all__ = [
    "AffineMapping",
    "ArmijoStep",
    "ClosedFormMapping",
    "ConstantMapping",
    "FixedStep",
    "ImplicitArgminMapping",
    "InnerProblem",
    "Objective",
    "ReducedProblem",
    "ReductionMapping",
    "Region",
    "SolverConfig",
    "SolverTrace",
    "SpectralReport",
    "condition_report",
    "run",
]
