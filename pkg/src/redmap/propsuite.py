"""Randomized instance generators and checkers for the theorem suites.

Five families are covered: the affine smoothness bound, the nonlinear
smoothness bound, the Morse-Bott sharpness bound, Rayleigh-quotient
interlacing, and the implicit-argmin correction-term bound. The CLI's
``propcheck`` command and the acceptance tests both drive these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import gen_eig_extremes, sym_eig
from .mapping import (
    AffineMapping,
    ClosedFormMapping,
    ImplicitArgminMapping,
    InnerProblem,
)
from .reduced import Objective, ReducedProblem


def quadratic_objective(n1: int, n2: int, hess: np.ndarray) -> Objective:
    """f(x) = 1/2 x^T H x with analytic derivatives."""
    h = 0.5 * (hess + hess.T)
    return Objective(
        n1=n1,
        n2=n2,
        value=lambda x: 0.5 * float(x @ h @ x),
        gradient=lambda x: h @ x,
        hessian=lambda x: h,
    )


# ---------------------------------------------------------------------------
# implicit-argmin inner problems with analytic third derivatives
# ---------------------------------------------------------------------------


def make_inner_quadratic(seed: int = 0) -> ImplicitArgminMapping:
    """G(x1, u) = 1/2 u^T P u - u^T (Q x1 + c): the argmin is affine,
    so every third-derivative block vanishes."""
    rng = np.random.default_rng(seed)
    n1, n2 = 2, 2
    w = rng.standard_normal((n2, n2))
    p = w @ w.T + n2 * np.eye(n2)
    q = rng.standard_normal((n2, n1))
    c = rng.standard_normal(n2)
    inner = InnerProblem(
        n1=n1,
        n2=n2,
        value=lambda x1, u: 0.5 * float(u @ p @ u) - float(u @ (q @ x1 + c)),
        grad_u=lambda x1, u: p @ u - (q @ x1 + c),
        hess_u=lambda x1, u: p,
        cross=lambda x1, u: -q,
        third_x1x1u=lambda x1, u: np.zeros((n2, n1, n1)),
        third_x1uu=lambda x1, u: np.zeros((n2, n1, n2)),
        third_uuu=lambda x1, u: np.zeros((n2, n2, n2)),
        newton_tol=1e-13,
    )
    return ImplicitArgminMapping(inner)


def make_inner_sine() -> ImplicitArgminMapping:
    """G(x1, u) = (u - sin x1)^2: the argmin is sin(x1)."""
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
    return ImplicitArgminMapping(inner)


def make_inner_coupled(seed: int = 0, rho: float = 0.4, tau: float = 0.3) -> ImplicitArgminMapping:
    """A 2-D inner problem with every third-derivative block nonzero:

        G(x1, u) = 1/2 |u|^2 + rho/4 sum u_k^4
                   + sum_k u_k sin(w_k.x1) + tau/2 sum_k u_k^2 cos(v_k.x1)

    SSOSC holds for |tau| < 1 since hess_u >= (1 - |tau|) I.
    """
    rng = np.random.default_rng(seed)
    n1, n2 = 2, 2
    w = rng.uniform(-1.0, 1.0, (n2, n1))
    v = rng.uniform(-1.0, 1.0, (n2, n1))

    def phases(x1):
        return w @ x1, v @ x1

    def grad_u(x1, u):
        a, b = phases(x1)
        return u + rho * u**3 + np.sin(a) + tau * u * np.cos(b)

    def hess_u(x1, u):
        a, b = phases(x1)
        return np.diag(1.0 + 3.0 * rho * u**2 + tau * np.cos(b))

    def cross(x1, u):
        a, b = phases(x1)
        return np.cos(a)[:, None] * w - tau * (u * np.sin(b))[:, None] * v

    def third_x1x1u(x1, u):
        a, b = phases(x1)
        t = np.zeros((n2, n1, n1))
        for k in range(n2):
            t[k] = -np.sin(a[k]) * np.outer(w[k], w[k]) - tau * u[k] * np.cos(b[k]) * np.outer(
                v[k], v[k]
            )
        return t

    def third_x1uu(x1, u):
        a, b = phases(x1)
        t = np.zeros((n2, n1, n2))
        for k in range(n2):
            t[k, :, k] = -tau * np.sin(b[k]) * v[k]
        return t

    def third_uuu(x1, u):
        t = np.zeros((n2, n2, n2))
        for k in range(n2):
            t[k, k, k] = 6.0 * rho * u[k]
        return t

    inner = InnerProblem(
        n1=n1,
        n2=n2,
        value=lambda x1, u: 0.5 * float(u @ u)
        + 0.25 * rho * float(np.sum(u**4))
        + float(u @ np.sin(w @ x1))
        + 0.5 * tau * float((u**2) @ np.cos(v @ x1)),
        grad_u=grad_u,
        hess_u=hess_u,
        cross=cross,
        third_x1x1u=third_x1x1u,
        third_x1uu=third_x1uu,
        third_uuu=third_uuu,
        newton_tol=1e-13,
    )
    return ImplicitArgminMapping(inner)


def implicit_suite_mappings(seed: int = 0) -> list[ImplicitArgminMapping]:
    """The three implicit-argmin mappings used by the derivative and
    correction-bound suites."""
    return [make_inner_quadratic(seed), make_inner_sine(), make_inner_coupled(seed + 1)]


# ---------------------------------------------------------------------------
# per-instance checks
# ---------------------------------------------------------------------------


@dataclass
class InstanceResult:
    family: str
    index: int
    holds: bool
    skipped: bool
    detail: str = ""


def _instance_rng(seed: int, family_index: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, family_index, index])


def make_affine_instance(rng: np.random.Generator) -> ReducedProblem:
    """Random 6-D quadratic objective with a random 3-D affine reduction."""
    n, n1 = 6, 3
    raw = rng.standard_normal((n, n))
    hess = 0.5 * (raw + raw.T)
    a = rng.standard_normal((n - n1, n1))
    b = rng.standard_normal(n - n1)
    return ReducedProblem(quadratic_objective(n1, n - n1, hess), AffineMapping(a, b))


def check_affine_instance(rng: np.random.Generator, index: int = 0) -> InstanceResult:
    """Random 6-D quadratic with a random 3-D affine reduction; checks
    beta_F <= beta_f - delta_max (2 eps - eps^2)."""
    from .spectral import Region, check_affine_bound

    p = make_affine_instance(rng)
    region = Region(center=np.zeros(p.n1), radius=1.0, samples=2, seed=index)
    result = check_affine_bound(p, region)
    skipped = result.vacuous or result.delta_max <= 1e-6 or result.epsilon <= 1e-6
    return InstanceResult(
        family="affine_bound",
        index=index,
        holds=result.holds,
        skipped=skipped,
        detail=f"lhs={result.lhs:.6g} rhs={result.rhs:.6g}",
    )


def check_nonlinear_instance(rng: np.random.Generator, index: int = 0) -> InstanceResult:
    """Random quadratic with a mildly nonlinear (affine + small sine)
    reduction over a small region; checks the corrected smoothness bound
    and skips instances whose correction hypothesis fails."""
    from .spectral import Region, check_nonlinear_bound

    n1, n2 = 2, 2
    n = n1 + n2
    raw = rng.standard_normal((n, n))
    spike = rng.standard_normal(n)
    spike /= np.linalg.norm(spike)
    hess = 0.5 * (raw + raw.T) + 6.0 * np.outer(spike, spike)

    a = rng.standard_normal((n2, n1))
    w = rng.uniform(-1.0, 1.0, (n2, n1))
    amp = 0.05

    mapping = ClosedFormMapping(
        n1,
        n2,
        value=lambda x: a @ x + amp * np.sin(w @ x),
        jacobian=lambda x: a + amp * np.cos(w @ x)[:, None] * w,
        second=lambda x: -amp
        * np.sin(w @ x)[:, None, None]
        * (w[:, :, None] * w[:, None, :]),
    )
    center = rng.uniform(-0.5, 0.5, n1)
    anchor = np.concatenate([center, mapping.value(center)])
    h = hess

    obj = Objective(
        n1=n1,
        n2=n2,
        value=lambda x: 0.5 * float((x - anchor) @ h @ (x - anchor)),
        gradient=lambda x: h @ (x - anchor),
        hessian=lambda x: h,
    )
    p = ReducedProblem(obj, mapping)
    region = Region(center=center, radius=0.2, samples=8, seed=index)
    result = check_nonlinear_bound(p, region)
    skipped = result.vacuous or result.hypothesis_failed
    return InstanceResult(
        family="nonlinear_bound",
        index=index,
        holds=result.holds,
        skipped=skipped,
        detail=f"lhs={result.lhs:.6g} rhs={result.rhs:.6g} QZ/m={result.q * result.z / result.m_phi:.3g}",
    )


def make_mb_instance(rng: np.random.Generator, corrupt: bool = False):
    """PSD quadratic with a prescribed 1-2 dimensional kernel (the
    solution tangent) and a homogeneous affine reduction through it.

    ``corrupt`` deliberately fills the Hessian kernel so the Morse-Bott
    kernel check must fail (negative-path hook).
    """
    n, n1 = 6, 3
    k = int(rng.integers(1, 3))
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    positive = np.sort(rng.uniform(0.2, 5.0, n - k))
    values = np.concatenate([np.zeros(k), positive])
    hess = q @ np.diag(values) @ q.T
    tangent = q[:, :k]
    if corrupt:
        hess = hess + 0.5 * tangent @ tangent.T
    a = rng.standard_normal((n - n1, n1))
    p = ReducedProblem(quadratic_objective(n1, n - n1, hess), AffineMapping(a))
    return p, tangent


def check_mb_instance(
    rng: np.random.Generator, index: int = 0, corrupt: bool = False
) -> InstanceResult:
    """Checks mu_F >= mu_f + delta_min (2 eps - eps^2) on a random
    Morse-Bott quadratic whose hypotheses verify numerically."""
    from .errors import KernelMismatchError
    from .spectral import mb_constants

    p, tangent = make_mb_instance(rng, corrupt=corrupt)
    try:
        result = mb_constants(p, np.zeros(3), tangent)
    except KernelMismatchError as exc:
        return InstanceResult(
            family="mb_bound", index=index, holds=False, skipped=False, detail=str(exc)
        )
    skipped = result.delta_min <= 1e-6 or result.eps_min <= 1e-6
    return InstanceResult(
        family="mb_bound",
        index=index,
        holds=result.holds,
        skipped=skipped,
        detail=f"mu_F={result.mu_F:.6g} bound={result.bound:.6g}",
    )


def check_interlacing_instance(rng: np.random.Generator, index: int = 0) -> InstanceResult:
    """Generalized extremes of (B^T A B, B^T B) stay inside the ambient
    spectrum of A."""
    n = int(rng.integers(2, 11))
    k = int(rng.integers(1, n))
    raw = rng.standard_normal((n, n))
    a = 0.5 * (raw + raw.T)
    b = rng.standard_normal((n, k))
    while np.linalg.matrix_rank(b) < k:
        b = rng.standard_normal((n, k))
    lo, hi = gen_eig_extremes(b.T @ a @ b, b.T @ b)
    ambient = sym_eig(a).values
    holds = lo >= ambient[0] - 1e-10 and hi <= ambient[-1] + 1e-10
    return InstanceResult(
        family="interlacing",
        index=index,
        holds=holds,
        skipped=False,
        detail=f"[{lo:.6g}, {hi:.6g}] in [{ambient[0]:.6g}, {ambient[-1]:.6g}]",
    )


def _tensor_norm_upper(t: np.ndarray) -> float:
    """Sound upper bound on the injective norm of a general 3-tensor
    (first index = output): min of the slice root-sum-square and the
    matricization spectral norm; exact for a single slice."""
    t = np.asarray(t, dtype=float)
    slices = np.array([np.linalg.svd(t[k], compute_uv=False)[0] if t[k].size else 0.0 for k in range(t.shape[0])])
    if t.shape[0] == 1:
        return float(slices[0])
    rss = float(np.sqrt(np.sum(slices**2)))
    flat = np.linalg.svd(t.reshape(t.shape[0], -1), compute_uv=False)
    return float(min(rss, flat[0] if flat.size else 0.0))


def correction_bound_constants(mapping: ImplicitArgminMapping, x1: np.ndarray) -> dict:
    """Pointwise constants of the correction-term bound for an
    implicit-argmin mapping: the inner strong-convexity floor sigma, the
    mixed-derivative norm, the three third-derivative norms, and the
    assembled bound on ||D^2 psi||.

    The mixed third-derivative block enters the second derivative twice
    (once per slot ordering), so its contribution to L~ carries a factor
    of two; a 1-D inner problem G = (1 + t sin x) u^2 / 2 + u sin x
    attains |psi''(0)| = 2t and shows the factor is tight.
    """
    inner = mapping.inner
    u = mapping.solve(x1)
    h = np.atleast_2d(np.asarray(inner.hess_u(x1, u), dtype=float))
    sigma = float(np.linalg.eigvalsh(0.5 * (h + h.T))[0])
    l11 = float(np.linalg.svd(np.atleast_2d(inner.cross(x1, u)), compute_uv=False)[0])
    l12 = _tensor_norm_upper(inner.third_x1x1u(x1, u))
    l21 = _tensor_norm_upper(inner.third_x1uu(x1, u))
    l3 = _tensor_norm_upper(inner.third_uuu(x1, u))
    l_tilde = sigma * l12 + 2.0 * l21 * l11 + l3 * l11**2 / sigma
    return {
        "sigma": sigma,
        "L11": l11,
        "L12": l12,
        "L21": l21,
        "L3": l3,
        "L_tilde": l_tilde,
        "d2_bound": l_tilde / sigma**2,
    }


def check_correction_instance(rng: np.random.Generator, index: int = 0) -> InstanceResult:
    """Theorem-bound check ||C|| <= (L~/sigma^2) xi L_f (and the refined
    cos-theta variant) on one implicit mapping at one random point."""
    mappings = implicit_suite_mappings(seed=int(rng.integers(0, 2**31)))
    mapping = mappings[index % len(mappings)]
    n1, n2 = mapping.n1, mapping.n2
    raw = rng.standard_normal((n1 + n2, n1 + n2))
    obj = quadratic_objective(n1, n2, 0.5 * (raw + raw.T))
    p = ReducedProblem(obj, mapping)
    x1 = rng.uniform(-1.0, 1.0, n1)

    consts = correction_bound_constants(mapping, x1)
    second = mapping.second_derivative(x1)
    v = p.grad_x2(x1)
    grad_full = np.asarray(obj.gradient(p.embed(x1)), dtype=float)
    l_f = float(np.linalg.norm(grad_full))
    xi = float(np.linalg.norm(v) / l_f) if l_f > 0.0 else 0.0

    c_mat = p.correction_term(x1)
    c_norm = float(np.max(np.abs(np.linalg.eigvalsh(c_mat))))

    # refined direction factor: projection of v onto the range of the
    # matricized second derivative
    flat = second.reshape(n2, -1)
    u_svd, s_svd, _ = np.linalg.svd(flat, full_matrices=False)
    rank = int(np.sum(s_svd > 1e-12 * (s_svd[0] if s_svd.size else 1.0)))
    v_norm = float(np.linalg.norm(v))
    if v_norm > 0.0 and rank > 0:
        proj = u_svd[:, :rank].T @ v
        cos_theta = float(np.linalg.norm(proj) / v_norm)
    else:
        cos_theta = 0.0

    slack = 1e-9 * (1.0 + consts["d2_bound"] * l_f)
    unrefined_ok = c_norm <= consts["d2_bound"] * xi * l_f + slack
    refined_ok = c_norm <= consts["d2_bound"] * v_norm * cos_theta + slack
    # the power-iteration estimate must stay below the sound upper bound
    from .spectral import injective_norm_power

    power_ok = injective_norm_power(second, seed=index) <= consts["d2_bound"] + slack
    holds = unrefined_ok and refined_ok and power_ok
    return InstanceResult(
        family="correction_bound",
        index=index,
        holds=holds,
        skipped=False,
        detail=(
            f"|C|={c_norm:.6g} unrefined={consts['d2_bound'] * xi * l_f:.6g} "
            f"cos_theta={cos_theta:.3g}"
        ),
    )


# ---------------------------------------------------------------------------
# suite driver
# ---------------------------------------------------------------------------

FAMILY_CHECKS = {
    "affine_bound": check_affine_instance,
    "nonlinear_bound": check_nonlinear_instance,
    "mb_bound": check_mb_instance,
    "interlacing": check_interlacing_instance,
    "correction_bound": check_correction_instance,
}


@dataclass
class FamilySummary:
    family: str
    total: int
    passed: int
    skipped: int
    failed: int
    first_failure: InstanceResult | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_family(
    family: str, seed: int, count: int, corrupt: bool = False
) -> FamilySummary:
    check = FAMILY_CHECKS[family]
    family_index = sorted(FAMILY_CHECKS).index(family)
    passed = skipped = failed = 0
    first_failure = None
    for i in range(count):
        rng = _instance_rng(seed, family_index, i)
        if family == "mb_bound":
            result = check(rng, index=i, corrupt=corrupt and i == 0)
        else:
            result = check(rng, index=i)
        if result.skipped:
            skipped += 1
        elif result.holds:
            passed += 1
        else:
            failed += 1
            if first_failure is None:
                first_failure = result
    return FamilySummary(
        family=family,
        total=count,
        passed=passed,
        skipped=skipped,
        failed=failed,
        first_failure=first_failure,
    )


def run_suite(seed: int, count: int, corrupt: bool = False) -> list[FamilySummary]:
    """All five families with ``count`` instances each, deterministically
    derived from ``seed``."""
    return [
        run_family(name, seed, count, corrupt=corrupt) for name in sorted(FAMILY_CHECKS)
    ]
