"""First-order solvers: plain gradient descent on the ambient objective,
gradient descent on the reduced function, and geometrically
preconditioned gradient descent (the metric-solve step z = R^-1 grad F).

Armijo backtracking uses the standard sufficient-decrease constants
(c1 = 1e-4, halving, unit initial step); the unit initial step is what
makes the preconditioned method recover Newton / Gauss-Newton behaviour
on the quadratic and least-squares benchmarks. Convergence is declared
on the Euclidean gradient norm so methods are comparable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import LineSearchStallError, RedmapError
from .linops import cg_solve, spd_solve
from .reduced import Objective, ReducedProblem

GD_FULL = "gd_full"
GD_REDUCED = "gd_reduced"
GEOPREC = "geoprec"

METHODS = (GD_FULL, GD_REDUCED, GEOPREC)

MAX_SHRINKS = 60
IDEMPOTENT_TOL = 1e-10


@dataclass(frozen=True)
class FixedStep:
    eta: float

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class ArmijoStep:
    c1: float = 1e-4
    shrink: float = 0.5
    eta0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.c1 < 1.0:
            raise ValueError("c1 must lie in (0, 1)")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if self.eta0 <= 0.0:
            raise ValueError("eta0 must be positive")


StepRule = Union[FixedStep, ArmijoStep]


@dataclass(frozen=True)
class CgMetric:
    """Solve the metric system iteratively; ``max_iter=None`` means n1."""

    rel_tol: float = 1e-10
    max_iter: Optional[int] = None


MetricSolver = Union[str, CgMetric]  # "direct", "woodbury", or CgMetric


@dataclass(frozen=True)
class SolverConfig:
    method: str = GEOPREC
    step_rule: StepRule = ArmijoStep()
    grad_tol: float = 1e-8
    max_iter: int = 1000
    metric_solver: MetricSolver = "direct"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if isinstance(self.metric_solver, str) and self.metric_solver not in (
            "direct",
            "woodbury",
        ):
            raise ValueError("metric_solver must be 'direct', 'woodbury', or CgMetric")


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    value: float
    grad_norm: float
    step: float
    elapsed_ns: int


@dataclass
class SolverTrace:
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False
    final_point: Optional[np.ndarray] = None
    error: Optional[str] = None

    CSV_HEADER = "iter,f_value,grad_norm,step_size,elapsed_ns"

    def to_csv(self, zero_times: bool = False) -> str:
        """One row per record; floats in shortest round-trip form.

        ``zero_times`` replaces measured wall times with zeros so that
        repeated runs emit byte-identical artifacts.
        """
        lines = [self.CSV_HEADER]
        for r in self.records:
            ns = 0 if zero_times else r.elapsed_ns
            lines.append(f"{r.iter},{r.value!r},{r.grad_norm!r},{r.step!r},{ns}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------


def _backtrack(
    value_fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    direction: np.ndarray,
    slope: float,
    rule: ArmijoStep,
) -> tuple[np.ndarray, float]:
    """Find eta with f(x) - f(x + eta d) >= c1 * eta * slope."""
    base = float(value_fn(x))
    eta = rule.eta0
    for _ in range(MAX_SHRINKS + 1):
        trial = x + eta * direction
        # strict inequality: once the decrease underflows against base the
        # step is not progress, and the stall must surface
        if float(value_fn(trial)) < base - rule.c1 * eta * slope:
            return trial, eta
        eta *= rule.shrink
    raise LineSearchStallError(
        f"no sufficient decrease after {MAX_SHRINKS} step halvings"
    )


def step_gd(
    value_fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, float]:
    """One (possibly backtracked) steepest-descent step."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(grad_fn(x), dtype=float)
    gnorm2 = float(g @ g)
    if gnorm2 == 0.0:
        return x, 0.0
    if isinstance(cfg.step_rule, FixedStep):
        eta = cfg.step_rule.eta
        return x - eta * g, eta
    return _backtrack(value_fn, x, -g, gnorm2, cfg.step_rule)


def woodbury_apply(p: ReducedProblem, x1: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Apply R^-1 = (I + J^T J)^-1 without forming the inverse densely.

    When J^T J is idempotent (affine orthogonal projections) the closed
    form R^-1 = I - J^T J / 2 applies; otherwise the low-rank Woodbury
    identity reduces the work to an (n2 x n2) SPD solve.
    """
    g = np.asarray(g, dtype=float)
    jac = p.mapping.jacobian(x1)
    gram = jac.T @ jac
    if np.linalg.norm(gram @ gram - gram) <= IDEMPOTENT_TOL:
        return g - 0.5 * (gram @ g)
    small = np.eye(p.mapping.n2) + jac @ jac.T
    return g - jac.T @ spd_solve(small, jac @ g)


def _metric_solve(
    p: ReducedProblem, x1: np.ndarray, g: np.ndarray, solver: MetricSolver
) -> tuple[np.ndarray, int]:
    """Solve R z = g; returns (z, iterations spent in CG)."""
    if isinstance(solver, CgMetric):
        jac = p.mapping.jacobian(x1)
        apply_r = lambda v: v + jac.T @ (jac @ v)
        max_iter = solver.max_iter if solver.max_iter is not None else p.n1
        result = cg_solve(apply_r, g, rel_tol=solver.rel_tol, max_iter=max_iter)
        if result.converged:
            return result.solution, result.iters
        # soft failure: fall back to the direct factorization
        return spd_solve(p.pullback_metric(x1), g), result.iters
    if solver == "woodbury":
        return woodbury_apply(p, x1, g), 0
    return spd_solve(p.pullback_metric(x1), g), 0


def step_geoprec(
    p: ReducedProblem, x1: np.ndarray, cfg: SolverConfig
) -> tuple[np.ndarray, float, int]:
    """One preconditioned step x1 - eta * R^-1 grad F."""
    x1 = np.asarray(x1, dtype=float)
    g = p.gradient(x1)
    if float(g @ g) == 0.0:
        return x1, 0.0, 0
    z, metric_iters = _metric_solve(p, x1, g, cfg.metric_solver)
    slope = float(g @ z)  # positive since R is SPD
    if isinstance(cfg.step_rule, FixedStep):
        eta = cfg.step_rule.eta
        return x1 - eta * z, eta, metric_iters
    trial, eta = _backtrack(p.value, x1, -z, slope, cfg.step_rule)
    return trial, eta, metric_iters


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def run(
    problem: Union[Objective, ReducedProblem], start: np.ndarray, cfg: SolverConfig
) -> SolverTrace:
    """Iterate the configured method from ``start`` until the gradient
    norm drops to ``grad_tol`` or the iteration budget runs out.

    Every iteration is recorded, including iteration 0; wall time is
    cumulative nanoseconds from run start and includes metric solves.
    Step failures are surfaced in ``trace.error`` and stop the run.
    """
    x = np.asarray(start, dtype=float).copy()
    if not np.all(np.isfinite(x)):
        raise ValueError("start point must be finite")

    if cfg.method == GD_FULL:
        if not isinstance(problem, Objective):
            raise TypeError("gd_full runs on an Objective")
        value_fn, grad_fn = problem.value, problem.gradient
    else:
        if not isinstance(problem, ReducedProblem):
            raise TypeError(f"{cfg.method} runs on a ReducedProblem")
        value_fn, grad_fn = problem.value, problem.gradient

    trace = SolverTrace()
    t0 = time.perf_counter_ns()
    grad_norm = float(np.linalg.norm(np.asarray(grad_fn(x), dtype=float)))
    trace.records.append(
        TraceRecord(
            iter=0,
            value=float(value_fn(x)),
            grad_norm=grad_norm,
            step=0.0,
            elapsed_ns=time.perf_counter_ns() - t0,
        )
    )
    for k in range(1, cfg.max_iter + 1):
        if grad_norm <= cfg.grad_tol:
            break
        try:
            if cfg.method == GEOPREC:
                x, step, _ = step_geoprec(problem, x, cfg)
            else:
                x, step = step_gd(value_fn, grad_fn, x, cfg)
        except RedmapError as exc:
            trace.error = f"{type(exc).__name__}: {exc}"
            break
        grad_norm = float(np.linalg.norm(np.asarray(grad_fn(x), dtype=float)))
        trace.records.append(
            TraceRecord(
                iter=k,
                value=float(value_fn(x)),
                grad_norm=grad_norm,
                step=step,
                elapsed_ns=time.perf_counter_ns() - t0,
            )
        )
    trace.converged = trace.error is None and grad_norm <= cfg.grad_tol
    trace.final_point = x
    return trace


def gauss_newton_direction(p: ReducedProblem, x1: np.ndarray) -> np.ndarray:
    """Reference Gauss-Newton direction for objectives of the form
    F = 1/2 ||Phi(x1)||^2 (residual = the embedded point itself).

    Assembled independently of the preconditioned step: the residual
    Jacobian is the graph Jacobian, and the normal equations are solved
    by SVD least squares rather than a Cholesky metric solve.
    """
    residual = p.embed(x1)
    jac = p.mapping.graph_jacobian(x1)
    direction, *_ = np.linalg.lstsq(jac, residual, rcond=None)
    return direction
