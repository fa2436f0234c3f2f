"""Built-in benchmark problems with analytic derivatives.

Four families ship: the anisotropic 2-D quadratic, the flat-bottom
quartic coupled to a sine ridge, and two high-dimensional problems (a
quadratic and a tanh nonlinear least-squares form) driven by a seeded
random operator K. Each problem carries named reduction mappings and,
where available, a distance oracle to its solution set.

Analytic gradients and Hessians are validated against central finite
differences at construction time; a failure there is a programming
error, so it raises immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import fd
from .errors import InvalidParamError, NoSolutionSetError
from .mapping import (
    AffineMapping,
    ClosedFormMapping,
    ConstantMapping,
    ImplicitArgminMapping,
    InnerProblem,
    ReductionMapping,
)
from .reduced import Objective, ReducedProblem

GRAD_CHECK_TOL = 1e-5
HESS_CHECK_TOL = 1e-4
SOLUTION_GRAD_TOL = 1e-10
VALIDATION_POINTS = 20


# ---------------------------------------------------------------------------
# solution sets
# ---------------------------------------------------------------------------


class SolutionSet:
    def distance(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def sample_points(self) -> list[np.ndarray]:
        """Representative members, used for gradient-vanishing checks."""
        raise NotImplementedError


@dataclass
class PointSet(SolutionSet):
    point: np.ndarray

    def distance(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.point))

    def sample_points(self):
        return [self.point]


@dataclass
class SineCurveSet(SolutionSet):
    """The curve {(t, sin t) : t in [lo, hi]} in the plane."""

    lo: float
    hi: float
    grid: int = 512
    tol: float = 1e-10

    def _dist_sq(self, t: float, x: np.ndarray) -> float:
        return (x[0] - t) ** 2 + (x[1] - math.sin(t)) ** 2

    def distance(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        ts = np.linspace(self.lo, self.hi, self.grid)
        vals = (x[0] - ts) ** 2 + (x[1] - np.sin(ts)) ** 2
        k = int(np.argmin(vals))
        lo = ts[max(k - 1, 0)]
        hi = ts[min(k + 1, self.grid - 1)]
        # golden-section refinement of the winning bracket
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fdd = self._dist_sq(c, x), self._dist_sq(d, x)
        while b - a > self.tol:
            if fc < fdd:
                b, d, fdd = d, c, fc
                c = b - invphi * (b - a)
                fc = self._dist_sq(c, x)
            else:
                a, c, fc = c, d, fdd
                d = a + invphi * (b - a)
                fdd = self._dist_sq(d, x)
        t = 0.5 * (a + b)
        return math.sqrt(self._dist_sq(t, x))

    def sample_points(self):
        ts = [self.lo, 0.5 * (self.lo + self.hi), self.hi]
        return [np.array([t, math.sin(t)]) for t in ts]


# ---------------------------------------------------------------------------
# problem container
# ---------------------------------------------------------------------------


@dataclass
class ProblemSpec:
    name: str
    params: dict
    objective: Objective
    mappings: dict[str, ReductionMapping]
    solution_set: Optional[SolutionSet] = None

    def reduced(self, mapping_name: str) -> ReducedProblem:
        if mapping_name not in self.mappings:
            raise KeyError(
                f"unknown mapping {mapping_name!r}; have {sorted(self.mappings)}"
            )
        return ReducedProblem(self.objective, self.mappings[mapping_name])

    def distance_to_solution(self, x: np.ndarray) -> float:
        if self.solution_set is None:
            raise NoSolutionSetError(f"problem {self.name!r} has no known solution set")
        return self.solution_set.distance(x)


def _validate(spec: ProblemSpec, point_scale: float = 1.0) -> ProblemSpec:
    rng = np.random.default_rng(12345)
    obj = spec.objective
    for _ in range(VALIDATION_POINTS):
        x = point_scale * rng.standard_normal(obj.dim)
        g = np.asarray(obj.gradient(x), dtype=float)
        g_fd = fd.gradient(obj.value, x)
        if np.linalg.norm(g - g_fd) > GRAD_CHECK_TOL * (1.0 + np.linalg.norm(g)):
            raise AssertionError(f"{spec.name}: analytic gradient fails FD check at {x}")
        h = obj.hessian_matrix(x)
        h_fd = fd.jacobian(obj.gradient, x, h=1e-6 * (1.0 + np.linalg.norm(x)))
        if np.linalg.norm(h - 0.5 * (h_fd + h_fd.T)) > HESS_CHECK_TOL * (
            1.0 + np.linalg.norm(h)
        ):
            raise AssertionError(f"{spec.name}: analytic Hessian fails FD check at {x}")
    if spec.solution_set is not None:
        for p in spec.solution_set.sample_points():
            if np.linalg.norm(obj.gradient(p)) > SOLUTION_GRAD_TOL:
                raise AssertionError(f"{spec.name}: solution point {p} is not critical")
    return spec


# ---------------------------------------------------------------------------
# 2-D anisotropic quadratic
# ---------------------------------------------------------------------------


def make_quad2d(m_param: float = 10.0) -> ProblemSpec:
    """f(x1, x2) = x1^2 + M (x2 - x1)^2 with three reduction mappings:
    the bilevel line x2 = x1, the frozen slice x2 = 0, and a poorly
    aligned oscillatory mapping x2 = x1 - 2 sin x1."""
    if m_param <= 0.0:
        raise InvalidParamError(f"m_param must be positive, got {m_param}")
    big_m = float(m_param)

    def value(x):
        return x[0] ** 2 + big_m * (x[1] - x[0]) ** 2

    def gradient(x):
        return np.array(
            [2.0 * x[0] + 2.0 * big_m * (x[0] - x[1]), 2.0 * big_m * (x[1] - x[0])]
        )

    hess = np.array([[2.0 + 2.0 * big_m, -2.0 * big_m], [-2.0 * big_m, 2.0 * big_m]])

    objective = Objective(
        n1=1, n2=1, value=value, gradient=gradient, hessian=lambda x: hess
    )
    mappings = {
        "linear": AffineMapping(np.array([[1.0]])),
        "fixed": ConstantMapping(1, np.array([0.0])),
        "nonlinear": ClosedFormMapping(
            1,
            1,
            value=lambda t: t - 2.0 * np.sin(t),
            jacobian=lambda t: 1.0 - 2.0 * np.cos(t),
            second=lambda t: 2.0 * np.sin(t),
        ),
    }
    return _validate(
        ProblemSpec(
            name="quad2d",
            params={"M": big_m},
            objective=objective,
            mappings=mappings,
            solution_set=PointSet(np.zeros(2)),
        )
    )


# ---------------------------------------------------------------------------
# flat-bottom quartic + sine ridge
# ---------------------------------------------------------------------------


def make_flat_quartic_sine(a: float = -0.5, b: float = 0.5) -> ProblemSpec:
    """f(x1, x2) = phi(x1) + (x2 - sin x1)^2 where phi is quartic outside
    [a, b] and identically zero inside, so the minimisers form the curve
    (t, sin t) for t in [a, b]."""
    if a >= b:
        raise InvalidParamError(f"need a < b, got a={a}, b={b}")

    def phi(t):
        if t < a:
            return (t - a) ** 4
        if t > b:
            return (t - b) ** 4
        return 0.0

    def dphi(t):
        if t < a:
            return 4.0 * (t - a) ** 3
        if t > b:
            return 4.0 * (t - b) ** 3
        return 0.0

    def d2phi(t):
        if t < a:
            return 12.0 * (t - a) ** 2
        if t > b:
            return 12.0 * (t - b) ** 2
        return 0.0

    def value(x):
        return phi(x[0]) + (x[1] - math.sin(x[0])) ** 2

    def gradient(x):
        gap = x[1] - math.sin(x[0])
        return np.array(
            [dphi(x[0]) - 2.0 * gap * math.cos(x[0]), 2.0 * gap]
        )

    def hessian(x):
        gap = x[1] - math.sin(x[0])
        h11 = d2phi(x[0]) + 2.0 * gap * math.sin(x[0]) + 2.0 * math.cos(x[0]) ** 2
        h12 = -2.0 * math.cos(x[0])
        return np.array([[h11, h12], [h12, 2.0]])

    objective = Objective(n1=1, n2=1, value=value, gradient=gradient, hessian=hessian)

    inner = InnerProblem(
        n1=1,
        n2=1,
        value=lambda x1, u: float((u[0] - np.sin(x1[0])) ** 2),
        grad_u=lambda x1, u: np.array([2.0 * (u[0] - np.sin(x1[0]))]),
        hess_u=lambda x1, u: np.array([[2.0]]),
        cross=lambda x1, u: np.array([[-2.0 * np.cos(x1[0])]]),
        third_x1x1u=lambda x1, u: np.array([[[2.0 * np.sin(x1[0])]]]),
        third_x1uu=lambda x1, u: np.zeros((1, 1, 1)),
        third_uuu=lambda x1, u: np.zeros((1, 1, 1)),
        newton_tol=1e-13,
    )
    mappings = {
        "sine": ClosedFormMapping(
            1,
            1,
            value=lambda t: np.sin(t),
            jacobian=lambda t: np.cos(t),
            second=lambda t: -np.sin(t),
        ),
        "implicit": ImplicitArgminMapping(inner),
        "fixed": ConstantMapping(1, np.array([0.0])),
        "linear": AffineMapping(np.array([[1.0]])),
    }
    return _validate(
        ProblemSpec(
            name="flat-quartic",
            params={"a": float(a), "b": float(b)},
            objective=objective,
            mappings=mappings,
            solution_set=SineCurveSet(float(a), float(b)),
        )
    )


# ---------------------------------------------------------------------------
# high-dimensional quadratic
# ---------------------------------------------------------------------------


def _draw_operator(n: int, seed: int) -> np.ndarray:
    # i.i.d. standard normal entries scaled by 1/sqrt(n) keeps the
    # spectrum O(1) independent of n
    rng = np.random.default_rng(np.random.PCG64(seed))
    return rng.standard_normal((n, n)) / math.sqrt(n)


def make_highdim_quadratic(n: int = 40, lambda_: float = 10.0, seed: int = 0) -> ProblemSpec:
    """G(x, y) = 1/2 |x|^2 + 1/2 |y|^2 + lambda/2 |y - Kx|^2 with the
    affine mapping y = Kx, whose reduced Hessian equals the pullback
    metric I + K^T K."""
    if n < 1:
        raise InvalidParamError(f"n must be >= 1, got {n}")
    if lambda_ <= 0.0:
        raise InvalidParamError(f"lambda must be positive, got {lambda_}")
    k_op = _draw_operator(n, seed)
    lam = float(lambda_)

    def value(z):
        x, y = z[:n], z[n:]
        return 0.5 * float(x @ x) + 0.5 * float(y @ y) + 0.5 * lam * float(
            np.sum((y - k_op @ x) ** 2)
        )

    def gradient(z):
        x, y = z[:n], z[n:]
        resid = k_op @ x - y
        return np.concatenate([x + lam * (k_op.T @ resid), y - lam * resid])

    hess = np.block(
        [
            [np.eye(n) + lam * k_op.T @ k_op, -lam * k_op.T],
            [-lam * k_op, (1.0 + lam) * np.eye(n)],
        ]
    )

    objective = Objective(
        n1=n, n2=n, value=value, gradient=gradient, hessian=lambda z: hess
    )
    return _validate(
        ProblemSpec(
            name="quad-hd",
            params={"n": int(n), "lambda": lam, "seed": int(seed)},
            objective=objective,
            mappings={"linear": AffineMapping(k_op)},
            solution_set=PointSet(np.zeros(2 * n)),
        )
    )


# ---------------------------------------------------------------------------
# high-dimensional tanh nonlinear least squares
# ---------------------------------------------------------------------------


def make_highdim_tanh(
    n: int = 40, lambda_: float = 10.0, alpha: float = 1.0, seed: int = 0
) -> ProblemSpec:
    """G(x, y) = 1/2 |x|^2 + 1/2 |y|^2 + lambda/2 |y - alpha tanh(Kx)|^2.

    With u = Kx, t = tanh u, s = sech^2 u, r = y - alpha t the gradient
    and Hessian blocks are assembled in closed form; the mapping
    y = alpha tanh(Kx) has the rank-one-slice second derivative
    D^2 psi[k] = -2 alpha t_k s_k K_k K_k^T.
    """
    if n < 1:
        raise InvalidParamError(f"n must be >= 1, got {n}")
    if lambda_ <= 0.0 or alpha <= 0.0:
        raise InvalidParamError("lambda and alpha must be positive")
    k_op = _draw_operator(n, seed)
    lam, al = float(lambda_), float(alpha)

    def parts(x):
        u = k_op @ x
        t = np.tanh(u)
        s = 1.0 - t**2
        return t, s

    def value(z):
        x, y = z[:n], z[n:]
        t, _ = parts(x)
        return 0.5 * float(x @ x) + 0.5 * float(y @ y) + 0.5 * lam * float(
            np.sum((y - al * t) ** 2)
        )

    def gradient(z):
        x, y = z[:n], z[n:]
        t, s = parts(x)
        r = y - al * t
        return np.concatenate([x - lam * al * (k_op.T @ (s * r)), y + lam * r])

    def hessian(z):
        x, y = z[:n], z[n:]
        t, s = parts(x)
        r = y - al * t
        g = 2.0 * r * s * t
        h_xx = (
            np.eye(n)
            + lam * al**2 * (k_op.T * (s**2)) @ k_op
            + lam * al * (k_op.T * g) @ k_op
        )
        h_xy = -lam * al * k_op.T * s
        return np.block([[h_xx, h_xy], [h_xy.T, (1.0 + lam) * np.eye(n)]])

    objective = Objective(n1=n, n2=n, value=value, gradient=gradient, hessian=hessian)

    def psi_value(x):
        t, _ = parts(x)
        return al * t

    def psi_jacobian(x):
        _, s = parts(x)
        return al * s[:, None] * k_op

    def psi_second(x):
        t, s = parts(x)
        coeff = -2.0 * al * t * s
        return coeff[:, None, None] * (k_op[:, :, None] * k_op[:, None, :])

    mapping = ClosedFormMapping(n, n, value=psi_value, jacobian=psi_jacobian, second=psi_second)
    return _validate(
        ProblemSpec(
            name="tanh-hd",
            params={"n": int(n), "lambda": lam, "alpha": al, "seed": int(seed)},
            objective=objective,
            mappings={"nonlinear": mapping},
            solution_set=PointSet(np.zeros(2 * n)),
        )
    )


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def plane_curvature(problem: ReducedProblem, x1: float) -> float:
    """Plane-curve curvature F'' / (1 + F'^2)^(3/2) of a 1-D reduced
    function, matching how curvature profiles are plotted."""
    if problem.n1 != 1:
        raise ValueError("plane curvature is defined for 1-D reduced problems")
    point = np.array([float(x1)])
    d1 = float(problem.gradient(point)[0])
    d2 = float(problem.hessian(point)[0, 0])
    return d2 / (1.0 + d1 * d1) ** 1.5


def distance_to_solution(spec: ProblemSpec, x: np.ndarray) -> float:
    return spec.distance_to_solution(x)


BUILDERS: dict[str, Callable[..., ProblemSpec]] = {
    "quad2d": make_quad2d,
    "flat-quartic": make_flat_quartic_sine,
    "quad-hd": make_highdim_quadratic,
    "tanh-hd": make_highdim_tanh,
}


def build_problem(name: str, params: dict | None = None) -> ProblemSpec:
    """Look up a problem family by name and build it with overrides."""
    if name not in BUILDERS:
        raise InvalidParamError(f"unknown problem {name!r}; have {sorted(BUILDERS)}")
    kwargs = dict(params or {})
    if name == "quad2d" and "M" in kwargs:
        kwargs["m_param"] = kwargs.pop("M")
    if "lambda" in kwargs:
        kwargs["lambda_"] = kwargs.pop("lambda")
    return BUILDERS[name](**kwargs)
