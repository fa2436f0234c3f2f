"""The reduced objective F = f(x1, psi(x1)) with exact derivatives.

The Hessian of F is the ambient Hessian restricted to the graph of the
mapping plus a correction that accounts for the graph's bending:

    hess F = [I J^T] hess f [I; J] + sum_k (D^2 psi)_k * (grad_x2 f)_k

The correction contracts the (n2, n1, n1) second-derivative tensor with
the x2-block of the ambient gradient over the first index; it vanishes
for affine mappings and at critical points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linops import sym_eig
from .mapping import ReductionMapping


@dataclass
class Objective:
    """A twice-differentiable scalar field on the split space
    ``(x1, x2)`` with analytic gradient and Hessian.

    ``known_min_value`` is subtracted before sharpness-constant
    estimation (the minimum is taken to be zero unless stated).
    """

    n1: int
    n2: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    known_min_value: float = 0.0

    @property
    def dim(self) -> int:
        return self.n1 + self.n2

    def hessian_matrix(self, x: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(self.hessian(x), dtype=float))
        return 0.5 * (h + h.T)


@dataclass
class ReducedProblem:
    """Pairs an objective with a reduction mapping and exposes the
    reduced function, its derivatives, and the pullback metric."""

    objective: Objective
    mapping: ReductionMapping

    def __post_init__(self):
        if (self.objective.n1, self.objective.n2) != (self.mapping.n1, self.mapping.n2):
            raise ValueError(
                "objective split "
                f"({self.objective.n1}, {self.objective.n2}) does not match mapping "
                f"({self.mapping.n1}, {self.mapping.n2})"
            )

    @property
    def n1(self) -> int:
        return self.mapping.n1

    def embed(self, x1: np.ndarray) -> np.ndarray:
        return self.mapping.embed(x1)

    def value(self, x1: np.ndarray) -> float:
        """F(x1) = f(x1, psi(x1))."""
        return float(self.objective.value(self.embed(x1)))

    def gradient(self, x1: np.ndarray) -> np.ndarray:
        """grad F = [I J^T] grad f at the graph point."""
        dphi = self.mapping.graph_jacobian(x1)
        return dphi.T @ np.asarray(self.objective.gradient(self.embed(x1)), dtype=float)

    def grad_x2(self, x1: np.ndarray) -> np.ndarray:
        """The x2-block of the ambient gradient at the graph point."""
        g = np.asarray(self.objective.gradient(self.embed(x1)), dtype=float)
        return g[self.mapping.n1 :]

    def correction_term(self, x1: np.ndarray) -> np.ndarray:
        """Contraction of D^2 psi with grad_x2 f; zero for affine maps."""
        n1 = self.mapping.n1
        if self.mapping.is_affine:
            return np.zeros((n1, n1))
        second = self.mapping.second_derivative(x1)
        c = np.einsum("kij,k->ij", second, self.grad_x2(x1))
        return 0.5 * (c + c.T)

    def hessian(self, x1: np.ndarray) -> np.ndarray:
        """hess F including the correction term; symmetric."""
        dphi = self.mapping.graph_jacobian(x1)
        ambient = self.objective.hessian_matrix(self.embed(x1))
        h = dphi.T @ ambient @ dphi + self.correction_term(x1)
        return 0.5 * (h + h.T)

    def pullback_metric(self, x1: np.ndarray) -> np.ndarray:
        """R = I + J^T J; SPD with every eigenvalue >= 1."""
        jac = self.mapping.jacobian(x1)
        return np.eye(self.mapping.n1) + jac.T @ jac

    def metric_extremes(self, x1: np.ndarray) -> tuple[float, float]:
        """(lambda_min, lambda_max) of the pullback metric."""
        values = sym_eig(self.pullback_metric(x1)).values
        return float(values[0]), float(values[-1])
