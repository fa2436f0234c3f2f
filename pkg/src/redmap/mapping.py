"""Reduction mappings ``x2 = psi(x1)`` and their embeddings.

A mapping knows its value, Jacobian, and second-derivative tensor
(shape ``(n2, n1, n1)``, symmetric in the last two indices). The graph
map ``x1 -> (x1, psi(x1))`` has Jacobian ``[I; J]``, which every
downstream pullback-metric computation builds on.

Implicit argmin mappings are differentiated with the implicit function
theorem: ``J = -H^-1 G_xu`` at the inner solution, and the second
derivative contracts the three third-derivative blocks of the inner
objective with ``J``.

Mappings carry a ``scale`` factor (default 1) that multiplies the raw
mapping and all its derivatives uniformly; shrinking it trades geometric
fidelity for a pullback metric closer to the identity.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    InnerDivergenceError,
    MissingThirdDerivativesError,
    NonFiniteError,
    SSOSCViolationError,
)

ARMIJO_MERIT_SLOPE = 1e-4
MAX_STEP_HALVINGS = 30


def _check_finite(x: np.ndarray, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"{what} contains NaN or Inf")
    return x


class ReductionMapping:
    """Base class; subclasses implement the raw (unscaled) derivatives."""

    def __init__(self, n1: int, n2: int, scale: float = 1.0):
        if n1 < 1 or n2 < 1:
            raise ValueError("n1 and n2 must be positive")
        if scale <= 0.0:
            raise ValueError("scale must be positive")
        self.n1 = n1
        self.n2 = n2
        self.scale = scale

    # raw interface -----------------------------------------------------
    def _value_raw(self, x1: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _jacobian_raw(self, x1: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _second_raw(self, x1: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_affine(self) -> bool:
        """True when the second derivative vanishes identically."""
        return False

    # scaled public interface -------------------------------------------
    def value(self, x1: np.ndarray) -> np.ndarray:
        """psi(x1), scaled."""
        x1 = _check_finite(x1, "x1")
        out = self.scale * np.asarray(self._value_raw(x1), dtype=float)
        return _check_finite(out, "psi(x1)")

    def jacobian(self, x1: np.ndarray) -> np.ndarray:
        """D psi(x1) with shape (n2, n1), scaled."""
        x1 = _check_finite(x1, "x1")
        jac = self.scale * np.asarray(self._jacobian_raw(x1), dtype=float)
        if jac.shape != (self.n2, self.n1):
            raise ValueError(f"jacobian has shape {jac.shape}, expected {(self.n2, self.n1)}")
        return _check_finite(jac, "D psi(x1)")

    def second_derivative(self, x1: np.ndarray) -> np.ndarray:
        """D^2 psi(x1) with shape (n2, n1, n1), exactly symmetrized in
        its last two indices, scaled."""
        x1 = _check_finite(x1, "x1")
        t = self.scale * np.asarray(self._second_raw(x1), dtype=float)
        if t.shape != (self.n2, self.n1, self.n1):
            raise ValueError(
                f"second derivative has shape {t.shape}, expected {(self.n2, self.n1, self.n1)}"
            )
        t = 0.5 * (t + t.transpose(0, 2, 1))
        return _check_finite(t, "D^2 psi(x1)")

    def graph_jacobian(self, x1: np.ndarray) -> np.ndarray:
        """Jacobian [I; D psi] of the graph map x1 -> (x1, psi(x1))."""
        return np.vstack([np.eye(self.n1), self.jacobian(x1)])

    def embed(self, x1: np.ndarray) -> np.ndarray:
        """The graph point (x1, psi(x1)) in the full space."""
        x1 = _check_finite(x1, "x1")
        return np.concatenate([x1, self.value(x1)])


class ConstantMapping(ReductionMapping):
    """psi(x1) = fixed point; zero Jacobian and second derivative."""

    def __init__(self, n1: int, point: np.ndarray, scale: float = 1.0):
        point = np.atleast_1d(np.asarray(point, dtype=float))
        super().__init__(n1, point.size, scale)
        self.point = point

    @property
    def is_affine(self) -> bool:
        return True

    def _value_raw(self, x1):
        return self.point

    def _jacobian_raw(self, x1):
        return np.zeros((self.n2, self.n1))

    def _second_raw(self, x1):
        return np.zeros((self.n2, self.n1, self.n1))


class AffineMapping(ReductionMapping):
    """psi(x1) = A x1 + b; constant Jacobian A, zero second derivative."""

    def __init__(self, matrix: np.ndarray, offset: np.ndarray | None = None, scale: float = 1.0):
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        super().__init__(a.shape[1], a.shape[0], scale)
        self.matrix = a
        self.offset = (
            np.zeros(self.n2) if offset is None else np.atleast_1d(np.asarray(offset, dtype=float))
        )
        if self.offset.shape != (self.n2,):
            raise ValueError("offset length must match the matrix row count")

    @property
    def is_affine(self) -> bool:
        return True

    def _value_raw(self, x1):
        return self.matrix @ x1 + self.offset

    def _jacobian_raw(self, x1):
        return self.matrix

    def _second_raw(self, x1):
        return np.zeros((self.n2, self.n1, self.n1))


class ClosedFormMapping(ReductionMapping):
    """psi given by explicit value/Jacobian/second-derivative callables."""

    def __init__(
        self,
        n1: int,
        n2: int,
        value: Callable[[np.ndarray], np.ndarray],
        jacobian: Callable[[np.ndarray], np.ndarray],
        second: Callable[[np.ndarray], np.ndarray],
        scale: float = 1.0,
    ):
        super().__init__(n1, n2, scale)
        self._value_fn = value
        self._jacobian_fn = jacobian
        self._second_fn = second

    def _value_raw(self, x1):
        return np.atleast_1d(self._value_fn(x1))

    def _jacobian_raw(self, x1):
        return np.atleast_2d(self._jacobian_fn(x1))

    def _second_raw(self, x1):
        return np.asarray(self._second_fn(x1), dtype=float).reshape(self.n2, self.n1, self.n1)


@dataclass
class InnerProblem:
    """Inner objective G(x1, u) whose argmin over u defines a mapping.

    ``grad_u``/``hess_u`` are the first two u-derivatives; ``cross`` is
    the mixed block d^2 G / du dx1 with shape (n2, n1). The three
    third-derivative blocks (needed only for second derivatives of the
    mapping) have shapes

        third_x1x1u: (n2, n1, n1)   d^3 G / du_k dx1_i dx1_j
        third_x1uu:  (n2, n1, n2)   d^3 G / du_k dx1_i du_l
        third_uuu:   (n2, n2, n2)   d^3 G / du_k du_l du_m
    """

    n1: int
    n2: int
    grad_u: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess_u: Callable[[np.ndarray, np.ndarray], np.ndarray]
    cross: Callable[[np.ndarray, np.ndarray], np.ndarray]
    value: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    third_x1x1u: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    third_x1uu: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    third_uuu: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    newton_tol: float = 1e-10
    newton_max_iter: int = 100
    sigma_floor: float = 0.0

    @property
    def has_third_derivatives(self) -> bool:
        return (
            self.third_x1x1u is not None
            and self.third_x1uu is not None
            and self.third_uuu is not None
        )


def inner_solve(problem: InnerProblem, x1: np.ndarray, u0: np.ndarray) -> np.ndarray:
    """Damped Newton on the inner stationarity equation grad_u G = 0.

    The merit function is ||grad_u G||^2; steps halve (at most 30 times)
    until the merit satisfies an Armijo-style decrease. Converges to the
    stationary point in the Newton basin of ``u0``.
    """
    x1 = _check_finite(x1, "x1")
    u = _check_finite(np.atleast_1d(np.asarray(u0, dtype=float)).copy(), "u0")
    for _ in range(problem.newton_max_iter):
        g = np.atleast_1d(np.asarray(problem.grad_u(x1, u), dtype=float))
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("inner gradient contains NaN or Inf")
        merit = float(g @ g)
        if np.sqrt(merit) <= problem.newton_tol:
            return u
        h = np.atleast_2d(np.asarray(problem.hess_u(x1, u), dtype=float))
        try:
            direction = -np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            direction, *_ = np.linalg.lstsq(h, -g, rcond=None)
        step = 1.0
        for _ in range(MAX_STEP_HALVINGS + 1):
            trial = u + step * direction
            gt = np.atleast_1d(np.asarray(problem.grad_u(x1, trial), dtype=float))
            if np.all(np.isfinite(gt)) and float(gt @ gt) <= (1.0 - ARMIJO_MERIT_SLOPE * step) * merit:
                u = trial
                break
            step *= 0.5
        else:
            raise InnerDivergenceError("inner Newton stalled: no acceptable step")
    g = np.atleast_1d(np.asarray(problem.grad_u(x1, u), dtype=float))
    if np.linalg.norm(g) <= problem.newton_tol:
        return u
    raise InnerDivergenceError(
        f"inner Newton did not converge in {problem.newton_max_iter} iterations"
    )


class ImplicitArgminMapping(ReductionMapping):
    """psi(x1) = argmin_u G(x1, u), differentiated by the implicit
    function theorem.

    The local argmin is whichever stationary point the damped Newton
    iteration reaches from its warm start; on multimodal inner problems
    this selects the warm start's basin. The last solve is cached and
    warm-starts the next one (outer iterates move slowly, so this is a
    large speedup with no semantic change).
    """

    def __init__(
        self,
        inner: InnerProblem,
        initial_guess: np.ndarray | None = None,
        scale: float = 1.0,
    ):
        super().__init__(inner.n1, inner.n2, scale)
        self.inner = inner
        self._u0 = (
            np.zeros(inner.n2)
            if initial_guess is None
            else np.atleast_1d(np.asarray(initial_guess, dtype=float))
        )
        self._cache_lock = threading.Lock()
        self._cache: tuple[bytes, np.ndarray] | None = None

    def solve(self, x1: np.ndarray) -> np.ndarray:
        """Inner solution u*(x1), warm-started from the previous solve."""
        x1 = _check_finite(x1, "x1")
        key = x1.tobytes()
        with self._cache_lock:
            cached = self._cache
        if cached is not None and cached[0] == key:
            return cached[1].copy()
        u0 = cached[1] if cached is not None else self._u0
        u = inner_solve(self.inner, x1, u0)
        with self._cache_lock:
            self._cache = (key, u.copy())
        return u

    def _hessian_at_solution(self, x1: np.ndarray, u: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(self.inner.hess_u(x1, u), dtype=float))
        lam_min = float(np.linalg.eigvalsh(0.5 * (h + h.T))[0])
        if lam_min <= self.inner.sigma_floor:
            raise SSOSCViolationError(
                f"inner Hessian has minimum eigenvalue {lam_min:.3e} at the inner solution"
            )
        return h

    def _value_raw(self, x1):
        return self.solve(x1)

    def _jacobian_raw(self, x1):
        u = self.solve(x1)
        h = self._hessian_at_solution(x1, u)
        cross = np.atleast_2d(np.asarray(self.inner.cross(x1, u), dtype=float))
        return -np.linalg.solve(h, cross)

    def _second_raw(self, x1):
        if not self.inner.has_third_derivatives:
            raise MissingThirdDerivativesError(
                "implicit mapping needs third_x1x1u, third_x1uu, and third_uuu"
            )
        u = self.solve(x1)
        h = self._hessian_at_solution(x1, u)
        jac = self._jacobian_raw(x1)  # (n2, n1)
        t_a = np.asarray(self.inner.third_x1x1u(x1, u), dtype=float).reshape(
            self.n2, self.n1, self.n1
        )
        t_b = np.asarray(self.inner.third_x1uu(x1, u), dtype=float).reshape(
            self.n2, self.n1, self.n2
        )
        t_c = np.asarray(self.inner.third_uuu(x1, u), dtype=float).reshape(
            self.n2, self.n2, self.n2
        )
        # B-term contracted with J in the second slot, then symmetrized.
        b_j = np.einsum("mil,lj->mij", t_b, jac)
        c_jj = np.einsum("mlp,li,pj->mij", t_c, jac, jac)
        total = t_a + b_j + b_j.transpose(0, 2, 1) + c_jj
        flat = total.reshape(self.n2, -1)
        return -np.linalg.solve(h, flat).reshape(self.n2, self.n1, self.n1)
