"""Spectral constants of a reduced problem and numerical verification
of the smoothness/sharpness improvement bounds.

Quantities follow one convention throughout:

* ``beta_f``     -- sup over samples of sigma_max(ambient Hessian);
* ``beta_F``     -- the same quantity for the reduced function, either
                    under the pullback metric (largest-magnitude
                    generalized eigenvalue of (hess F, R)) or Euclidean;
* ``epsilon``    -- one minus the largest projection of a dominant-
                    curvature unit vector onto the graph tangent space,
                    taken as the infimum over samples;
* ``delta_max``  -- the sampled infimum of the gap between the largest
                    Hessian singular value and the next distinct one;
* ``Q, Z``       -- bounds on the mapping's second derivative and the
                    x2-gradient, feeding the nonlinear correction term.

Suprema/infima over a region are approximated on a seeded sample of a
ball (the region center is always included as a sample point). Bound
checks whose spectral-gap hypothesis fails are reported as vacuously
holding, with a flag, rather than asserting a theorem outside its
hypotheses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    EmptySampleError,
    KernelMismatchError,
    NotCriticalError,
    WrongMappingKindError,
)
from .linops import gen_eig, gen_eig_extremes, spd_solve, sym_eig
from .mapping import ReductionMapping
from .reduced import Objective, ReducedProblem

DEFAULT_MULT_TOL = 1e-8
BOUND_SLACK = 1e-8
CRITICAL_GRAD_TOL = 1e-8
KERNEL_SUBSPACE_TOL = 1e-6
PL_VALUE_FLOOR = 1e-14


@dataclass(frozen=True)
class Region:
    """A sampled ball: ``samples`` seeded draws plus the center."""

    center: np.ndarray
    radius: float
    samples: int = 32
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    def points(self) -> list[np.ndarray]:
        """The center followed by ``samples`` points uniform in the ball.

        Sampling draws a normal direction and a radius ~ U^(1/d); unlike
        cube rejection this stays tractable in high dimension while
        keeping the same distribution and seed-reproducibility.
        """
        d = self.center.size
        rng = np.random.default_rng(self.seed)
        pts = [self.center.copy()]
        for _ in range(self.samples):
            v = rng.standard_normal(d)
            norm = np.linalg.norm(v)
            while norm == 0.0:
                v = rng.standard_normal(d)
                norm = np.linalg.norm(v)
            r = self.radius * rng.random() ** (1.0 / d)
            pts.append(self.center + (r / norm) * v)
        return pts


# ---------------------------------------------------------------------------
# pointwise spectral helpers
# ---------------------------------------------------------------------------


def _ambient_hessian(p: ReducedProblem, x1: np.ndarray) -> np.ndarray:
    return p.objective.hessian_matrix(p.embed(x1))


def _dominant_cluster(h: np.ndarray, mult_tol: float):
    """Return (sigma_max, multiplicity, basis, gap) for the subspace of
    eigenvectors whose |eigenvalue| sits within mult_tol of the top."""
    values, vectors = sym_eig(h)
    sig = np.abs(values)
    sigma_max = float(np.max(sig))
    if sigma_max == 0.0:
        return 0.0, h.shape[0], vectors, 0.0
    inside = sig >= (1.0 - mult_tol) * sigma_max
    mult = int(np.count_nonzero(inside))
    basis = vectors[:, inside]
    rest = sig[~inside]
    gap = float(sigma_max - np.max(rest)) if rest.size else 0.0
    return sigma_max, mult, basis, gap


def _tangent_basis(p: ReducedProblem, x1: np.ndarray) -> np.ndarray:
    dphi = p.mapping.graph_jacobian(x1)
    q, r = np.linalg.qr(dphi)
    # the top block of [I; J] is the identity, so full column rank always
    assert np.min(np.abs(np.diag(r))) > 0.0, "graph Jacobian lost rank"
    return q


def _orthonormal_columns(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormalize (possibly empty) columns."""
    if basis is None:
        return np.zeros((dim, 0))
    b = np.asarray(basis, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.shape[1] == 0:
        return np.zeros((dim, 0))
    q, r = np.linalg.qr(b)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, float(np.abs(r).max()))
    return q[:, keep]


def _complement_basis(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the Euclidean complement of span(basis)."""
    if basis.shape[1] == 0:
        return np.eye(dim)
    proj = np.eye(dim) - basis @ basis.T
    values, vectors = sym_eig(proj)
    return vectors[:, values > 0.5]


def _null_space(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if m.shape[0] == 0:
        return np.eye(m.shape[1])
    u, s, vt = np.linalg.svd(m)
    tol = rtol * (s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


# ---------------------------------------------------------------------------
# tensor norms for the second-derivative bound Q
# ---------------------------------------------------------------------------


def injective_norm_upper(tensor: np.ndarray) -> float:
    """Upper bound on the injective norm of a (n2, n1, n1) tensor with
    symmetric slices; exact when n2 == 1.

    For n2 > 1 the true injective norm is NP-hard, so the smaller of two
    sound upper bounds is used: the root-sum-square of slice spectral
    norms, and the spectral norm of the (n2, n1*n1) matricization. A
    conservative Q keeps every bound check sound.
    """
    t = np.asarray(tensor, dtype=float)
    n2 = t.shape[0]
    slice_norms = np.array([np.max(np.abs(sym_eig(t[k]).values), initial=0.0) for k in range(n2)])
    if n2 == 1:
        return float(slice_norms[0])
    rss = float(np.sqrt(np.sum(slice_norms**2)))
    flat = np.linalg.svd(t.reshape(n2, -1), compute_uv=False)
    return float(min(rss, flat[0] if flat.size else 0.0))


def injective_norm_power(tensor: np.ndarray, restarts: int = 8, iters: int = 200, seed: int = 0) -> float:
    """Alternating power-iteration estimate (a lower bound in general);
    useful as a diagnostic against the conservative upper bound."""
    t = np.asarray(tensor, dtype=float)
    n2, n1 = t.shape[0], t.shape[1]
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        w = rng.standard_normal(n2)
        w /= np.linalg.norm(w)
        val = 0.0
        for _ in range(iters):
            m_w = np.einsum("k,kij->ij", w, t)
            m_w = 0.5 * (m_w + m_w.T)
            values, vectors = sym_eig(m_w)
            idx = int(np.argmax(np.abs(values)))
            h = vectors[:, idx]
            new_w = np.einsum("kij,i,j->k", t, h, h)
            norm = np.linalg.norm(new_w)
            if norm == 0.0:
                break
            w = new_w / norm
            if abs(norm - val) <= 1e-13 * max(1.0, norm):
                val = norm
                break
            val = norm
        best = max(best, val)
    return float(best)


# ---------------------------------------------------------------------------
# region-level constants
# ---------------------------------------------------------------------------


def smoothness_riemannian(p: ReducedProblem, region: Region) -> float:
    """sup over samples of the largest-magnitude generalized eigenvalue
    of (hess F, R): the reduced smoothness constant under the pullback
    metric."""
    out = 0.0
    for x1 in region.points():
        lo, hi = gen_eig_extremes(p.hessian(x1), p.pullback_metric(x1))
        out = max(out, abs(lo), abs(hi))
    return float(out)


def smoothness_euclidean(p: ReducedProblem, region: Region) -> float:
    """sup over samples of sigma_max(hess F)."""
    out = 0.0
    for x1 in region.points():
        values = sym_eig(p.hessian(x1)).values
        out = max(out, float(np.max(np.abs(values))))
    return float(out)


def nontangency_epsilon(
    p: ReducedProblem, x1: np.ndarray, mult_tol: float = DEFAULT_MULT_TOL
) -> tuple[float, int]:
    """Pointwise non-tangency of the dominant curvature subspace.

    Returns ``(epsilon, multiplicity)`` where epsilon = 1 - sigma_max of
    the cross-projection between the dominant eigenvectors of the
    ambient Hessian and the graph tangent space.
    """
    if not 0.0 < mult_tol < 1.0:
        raise ValueError("mult_tol must lie in (0, 1)")
    h = _ambient_hessian(p, x1)
    _, mult, basis, _ = _dominant_cluster(h, mult_tol)
    tangent = _tangent_basis(p, x1)
    cross = tangent.T @ basis
    smax = float(np.linalg.svd(cross, compute_uv=False)[0]) if cross.size else 0.0
    eps = min(max(1.0 - smax, 0.0), 1.0)
    return eps, mult


def spectral_gap_max(
    p: ReducedProblem, region: Region, mult_tol: float = DEFAULT_MULT_TOL
) -> float:
    """inf over samples of sigma_max - sigma_(p+1) of the ambient
    Hessian; zero when the dominant cluster is the whole spectrum."""
    gaps = []
    for x1 in region.points():
        h = _ambient_hessian(p, x1)
        _, _, _, gap = _dominant_cluster(h, mult_tol)
        gaps.append(gap)
    return float(min(gaps))


# ---------------------------------------------------------------------------
# bound checks
# ---------------------------------------------------------------------------


@dataclass
class AffineBoundResult:
    holds: bool
    lhs: float
    rhs: float
    beta_f: float
    delta_max: float
    epsilon: float
    vacuous: bool


def check_affine_bound(
    p: ReducedProblem, region: Region, mult_tol: float = DEFAULT_MULT_TOL
) -> AffineBoundResult:
    """beta_F <= beta_f - delta_max (2 eps - eps^2) for affine mappings."""
    if not p.mapping.is_affine:
        raise WrongMappingKindError("the affine smoothness bound needs an affine mapping")
    beta_f = 0.0
    eps = 1.0
    for x1 in region.points():
        h = _ambient_hessian(p, x1)
        sigma_max, _, _, _ = _dominant_cluster(h, mult_tol)
        beta_f = max(beta_f, sigma_max)
        eps = min(eps, nontangency_epsilon(p, x1, mult_tol)[0])
    delta_max = spectral_gap_max(p, region, mult_tol)
    lhs = smoothness_riemannian(p, region)
    rhs = beta_f - delta_max * (2.0 * eps - eps * eps)
    vacuous = delta_max <= mult_tol * beta_f
    holds = True if vacuous else lhs <= rhs + BOUND_SLACK * (1.0 + abs(rhs))
    return AffineBoundResult(
        holds=holds,
        lhs=lhs,
        rhs=rhs,
        beta_f=beta_f,
        delta_max=delta_max,
        epsilon=eps,
        vacuous=vacuous,
    )


@dataclass
class NonlinearBoundResult:
    holds: bool
    lhs: float
    rhs: float
    q: float
    z: float
    m_phi: float
    delta_gap: float
    hypothesis_failed: bool
    vacuous: bool


def check_nonlinear_bound(
    p: ReducedProblem, region: Region, mult_tol: float = DEFAULT_MULT_TOL
) -> NonlinearBoundResult:
    """beta_F <= beta_f - delta_max (2 eps - eps^2) + Q Z / m_phi.

    The theorem additionally requires the correction term Q Z / m_phi to
    stay below the curvature gap delta (ambient sigma_max minus its
    restriction to the graph tangent space, sampled infimum); when that
    hypothesis fails the result is flagged.
    """
    beta_f = 0.0
    eps = 1.0
    q = 0.0
    z = 0.0
    m_phi = np.inf
    delta_gap = np.inf
    for x1 in region.points():
        h = _ambient_hessian(p, x1)
        sigma_max, _, _, _ = _dominant_cluster(h, mult_tol)
        beta_f = max(beta_f, sigma_max)
        eps = min(eps, nontangency_epsilon(p, x1, mult_tol)[0])
        if not p.mapping.is_affine:
            q = max(q, injective_norm_upper(p.mapping.second_derivative(x1)))
        z = max(z, float(np.linalg.norm(p.grad_x2(x1))))
        metric = p.pullback_metric(x1)
        m_phi = min(m_phi, float(sym_eig(metric).values[0]))
        dphi = p.mapping.graph_jacobian(x1)
        lo, hi = gen_eig_extremes(dphi.T @ h @ dphi, metric)
        delta_gap = min(delta_gap, sigma_max - max(abs(lo), abs(hi)))
    delta_max = spectral_gap_max(p, region, mult_tol)
    correction = q * z / m_phi
    lhs = smoothness_riemannian(p, region)
    rhs = beta_f - delta_max * (2.0 * eps - eps * eps) + correction
    vacuous = delta_max <= mult_tol * beta_f
    holds = True if vacuous else lhs <= rhs + BOUND_SLACK * (1.0 + abs(rhs))
    return NonlinearBoundResult(
        holds=holds,
        lhs=lhs,
        rhs=rhs,
        q=q,
        z=z,
        m_phi=float(m_phi),
        delta_gap=float(delta_gap),
        hypothesis_failed=not correction < delta_gap,
        vacuous=vacuous,
    )


@dataclass
class MorseBottResult:
    mu_f: float
    mu_F: float
    delta_min: float
    eps_min: float
    bound: float
    holds: bool


def mb_constants(
    p: ReducedProblem,
    minimiser: np.ndarray,
    solution_tangent: np.ndarray | None,
    mult_tol: float = DEFAULT_MULT_TOL,
) -> MorseBottResult:
    """Sharpness constants at a minimiser on the solution manifold.

    ``solution_tangent`` holds a basis of the solution manifold's
    tangent at the (full-space) minimiser as columns; pass None or an
    empty matrix for an isolated minimiser. Checks the Morse-Bott
    kernel condition before computing anything else.

    ``mu_f`` is the smallest eigenvalue of the ambient Hessian
    restricted to the normal space of the solution manifold; ``mu_F``
    is the smallest generalized eigenvalue of (hess F, R) over reduced
    directions normal to the solution manifold in the embedded sense.
    """
    x1 = np.atleast_1d(np.asarray(minimiser, dtype=float))
    xbar = p.embed(x1)
    grad = np.asarray(p.objective.gradient(xbar), dtype=float)
    if np.linalg.norm(grad) > CRITICAL_GRAD_TOL:
        raise NotCriticalError(
            f"gradient norm {np.linalg.norm(grad):.3e} at the supplied minimiser"
        )
    n = p.objective.dim
    tangent_s = _orthonormal_columns(
        solution_tangent if solution_tangent is not None else np.zeros((n, 0)), n
    )

    h = p.objective.hessian_matrix(xbar)
    values, vectors = sym_eig(h)
    scale = float(np.max(np.abs(values), initial=0.0))
    kernel_mask = np.abs(values) <= max(mult_tol * scale, 1e-12)
    kernel = vectors[:, kernel_mask]
    if kernel.shape[1] != tangent_s.shape[1]:
        raise KernelMismatchError(
            f"Hessian kernel has dimension {kernel.shape[1]}, solution tangent has "
            f"{tangent_s.shape[1]}"
        )
    if kernel.shape[1] > 0:
        gap_proj = np.linalg.norm(kernel @ kernel.T - tangent_s @ tangent_s.T, ord=2)
        if gap_proj > KERNEL_SUBSPACE_TOL:
            raise KernelMismatchError(
                f"Hessian kernel and solution tangent differ (projector gap {gap_proj:.3e})"
            )

    # restriction of the ambient Hessian to the normal space of S
    normal = _complement_basis(tangent_s, n)
    h_nn = normal.T @ h @ normal
    nvalues, nvectors = sym_eig(h_nn)
    mu_f = float(nvalues[0])
    nscale = float(np.max(np.abs(nvalues), initial=0.0))
    cluster = nvalues <= nvalues[0] + max(mult_tol * nscale, 1e-12)
    m = int(np.count_nonzero(cluster))
    delta_min = float(nvalues[m] - nvalues[0]) if m < nvalues.size else 0.0
    e_min = normal @ nvectors[:, cluster]

    tangent_graph = _tangent_basis(p, x1)
    cross = tangent_graph.T @ e_min
    smax = float(np.linalg.svd(cross, compute_uv=False)[0]) if cross.size else 0.0
    eps_min = min(max(1.0 - smax, 0.0), 1.0)

    # reduced-side constant: smallest generalized eigenvalue of
    # (hess F, R) over the reduced directions whose embedded image is
    # orthogonal to the solution manifold's tangent. Directions merely
    # R-orthogonal to the tangent of S_F can still lean into the Hessian
    # kernel and break the bound; the embedded-normal subspace is the
    # one the improvement argument actually controls.
    dphi = p.mapping.graph_jacobian(x1)
    metric = p.pullback_metric(x1)
    hess_f = p.hessian(x1)
    if tangent_s.shape[1] == 0:
        w = np.eye(p.n1)
    else:
        w = _null_space(tangent_s.T @ dphi)
    if w.shape[1] == 0:
        # the graph runs entirely along the solution manifold: the
        # constant is an infimum over an empty set of directions
        mu_big_f = np.inf
    else:
        mu_big_f, _ = gen_eig_extremes(w.T @ hess_f @ w, w.T @ metric @ w)

    bound = mu_f + delta_min * (2.0 * eps_min - eps_min * eps_min)
    return MorseBottResult(
        mu_f=mu_f,
        mu_F=float(mu_big_f),
        delta_min=delta_min,
        eps_min=eps_min,
        bound=bound,
        holds=mu_big_f >= bound - BOUND_SLACK,
    )


def pl_constant_estimate(
    obj: Objective, region: Region, mapping: ReductionMapping | None = None
) -> float:
    """Sampled infimum of the Polyak-Lojasiewicz ratio.

    Without a mapping the region samples the full space and the ratio is
    ``|grad f|^2 / (2 f)``; with a mapping the region samples the reduced
    space and the metric-weighted ratio ``grad F . R^-1 grad F / (2 F)``
    is used. Samples with value below 1e-14 (exact minimisers) are
    skipped.
    """
    best = np.inf
    if mapping is None:
        if region.center.size != obj.dim:
            raise ValueError("region center must live in the full space")
        for x in region.points():
            val = float(obj.value(x)) - obj.known_min_value
            if val <= PL_VALUE_FLOOR:
                continue
            g = np.asarray(obj.gradient(x), dtype=float)
            best = min(best, float(g @ g) / (2.0 * val))
    else:
        p = ReducedProblem(obj, mapping)
        if region.center.size != mapping.n1:
            raise ValueError("region center must live in the reduced space")
        for x1 in region.points():
            val = p.value(x1) - obj.known_min_value
            if val <= PL_VALUE_FLOOR:
                continue
            g = p.gradient(x1)
            ratio = float(g @ spd_solve(p.pullback_metric(x1), g)) / (2.0 * val)
            best = min(best, ratio)
    if not np.isfinite(best):
        raise EmptySampleError("every sample point sat at the minimum value")
    return float(best)


# ---------------------------------------------------------------------------
# assembled report
# ---------------------------------------------------------------------------

REPORT_FIELDS = [
    "beta_f",
    "beta_F_riem",
    "beta_F_eucl",
    "epsilon",
    "multiplicity_p",
    "delta_max",
    "delta_min",
    "mu_f",
    "mu_F",
    "kappa_f",
    "kappa_F",
    "M_phi",
    "m_phi",
    "Q",
    "Z",
    "correction_norm",
    "bound_affine_holds",
    "bound_nonlinear_holds",
    "bound_mb_holds",
    "star_condition_holds",
    "hypothesis_failed",
]


@dataclass
class SpectralReport:
    """Every theorem constant plus bound verdicts, JSON-serializable.

    Fields that could not be computed (no minimiser supplied, wrong
    mapping kind) are None and serialize to null.
    """

    beta_f: float
    beta_F_riem: float
    beta_F_eucl: float
    epsilon: float
    multiplicity_p: int
    delta_max: float
    delta_min: Optional[float]
    mu_f: Optional[float]
    mu_F: Optional[float]
    kappa_f: Optional[float]
    kappa_F: Optional[float]
    M_phi: float
    m_phi: float
    Q: float
    Z: float
    correction_norm: float
    bound_affine_holds: Optional[bool]
    bound_nonlinear_holds: bool
    bound_mb_holds: Optional[bool]
    star_condition_holds: bool
    hypothesis_failed: bool

    def to_json_dict(self) -> dict:
        out = {}
        for name in REPORT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, (np.floating, float)):
                value = float(value)
                if not np.isfinite(value):
                    value = None  # strict JSON has no Infinity
            elif isinstance(value, (np.integer, int)) and not isinstance(value, bool):
                value = int(value)
            out[name] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def condition_report(
    p: ReducedProblem,
    region: Region,
    minimiser: np.ndarray | None = None,
    solution_tangent: np.ndarray | None = None,
    mult_tol: float = DEFAULT_MULT_TOL,
) -> SpectralReport:
    """Assemble every spectral constant and bound verdict in one pass."""
    beta_f = 0.0
    eps = 1.0
    m_phi = np.inf
    big_m_phi = 0.0
    correction_norm = 0.0
    for x1 in region.points():
        h = _ambient_hessian(p, x1)
        sigma_max, _, _, _ = _dominant_cluster(h, mult_tol)
        beta_f = max(beta_f, sigma_max)
        eps = min(eps, nontangency_epsilon(p, x1, mult_tol)[0])
        lo, hi = p.metric_extremes(x1)
        m_phi = min(m_phi, lo)
        big_m_phi = max(big_m_phi, hi)
        c = p.correction_term(x1)
        correction_norm = max(correction_norm, float(np.max(np.abs(sym_eig(c).values))))
    mult_center = nontangency_epsilon(p, region.center, mult_tol)[1]
    delta_max = spectral_gap_max(p, region, mult_tol)
    beta_riem = smoothness_riemannian(p, region)
    beta_eucl = smoothness_euclidean(p, region)

    affine_result = None
    if p.mapping.is_affine:
        affine_result = check_affine_bound(p, region, mult_tol)
    nonlinear_result = check_nonlinear_bound(p, region, mult_tol)

    mb = None
    if minimiser is not None:
        mb = mb_constants(p, minimiser, solution_tangent, mult_tol)

    mu_f = mb.mu_f if mb else None
    mu_big_f = mb.mu_F if mb else None
    return SpectralReport(
        beta_f=beta_f,
        beta_F_riem=beta_riem,
        beta_F_eucl=beta_eucl,
        epsilon=eps,
        multiplicity_p=mult_center,
        delta_max=delta_max,
        delta_min=mb.delta_min if mb else None,
        mu_f=mu_f,
        mu_F=mu_big_f,
        kappa_f=(beta_f / mu_f) if mu_f else None,
        kappa_F=(beta_riem / mu_big_f) if mu_big_f else None,
        M_phi=big_m_phi,
        m_phi=float(m_phi),
        Q=nonlinear_result.q,
        Z=nonlinear_result.z,
        correction_norm=correction_norm,
        bound_affine_holds=affine_result.holds if affine_result else None,
        bound_nonlinear_holds=nonlinear_result.holds,
        bound_mb_holds=mb.holds if mb else None,
        star_condition_holds=delta_max * (2.0 * eps - eps * eps) > 0.5 * beta_f,
        hypothesis_failed=nonlinear_result.hypothesis_failed,
    )
