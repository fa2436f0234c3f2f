"""Dense symmetric linear algebra: eigendecompositions, generalized
eigenproblems, SPD solves, and conjugate gradients.

Everything here operates on plain ``numpy`` arrays (or :class:`SymMatrix`
wrappers) and is pure: no shared mutable state, deterministic output for
identical input bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .errors import NonFiniteError, NotSPDError

# Relative eigenvalue floor below which a metric is rejected as not SPD.
SPD_RTOL = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """A dense real symmetric matrix, symmetrized on construction.

    ``0.5 * (A + A.T)`` makes ``entries[i, j] == entries[j, i]`` exact,
    since float addition commutes.
    """

    entries: np.ndarray

    def __init__(self, entries: np.ndarray):
        a = np.asarray(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix dimension must be >= 1")
        object.__setattr__(self, "entries", 0.5 * (a + a.T))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


class EigenPairs(NamedTuple):
    """Eigenvalues in ascending order with orthonormal eigenvectors as
    the columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray


class CgResult(NamedTuple):
    """Conjugate-gradient output; ``converged`` is False when the
    iteration budget ran out (soft failure)."""

    solution: np.ndarray
    iters: int
    converged: bool


def _as_matrix(a) -> np.ndarray:
    m = a.entries if isinstance(a, SymMatrix) else np.asarray(a, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix contains NaN or Inf")
    return 0.5 * (m + m.T)


def sym_eig(a) -> EigenPairs:
    """Full eigendecomposition of a symmetric matrix.

    Uses LAPACK's divide-and-conquer routine via ``numpy.linalg.eigh``,
    which is deterministic for fixed input bits. Values come back
    ascending with orthonormal eigenvectors.
    """
    m = _as_matrix(a)
    values, vectors = np.linalg.eigh(m)
    return EigenPairs(values=values, vectors=vectors)


def _check_spd_spectrum(b: np.ndarray) -> None:
    ev = np.linalg.eigvalsh(b)
    if ev[-1] <= 0.0 or ev[0] <= SPD_RTOL * abs(ev[-1]):
        raise NotSPDError(
            f"matrix is not SPD: eigenvalue range [{ev[0]:.3e}, {ev[-1]:.3e}]"
        )


def gen_eig(a, b) -> np.ndarray:
    """All generalized eigenvalues of the symmetric pencil (a, b), ascending.

    ``b`` must be SPD. Solved by Cholesky reduction ``b = L L^T`` followed
    by a symmetric eigendecomposition of ``L^-1 a L^-T``, which matches the
    generalized Rayleigh-quotient characterisation exactly.
    """
    am = _as_matrix(a)
    bm = _as_matrix(b)
    _check_spd_spectrum(bm)
    low = np.linalg.cholesky(bm)
    # L^-1 a L^-T via two triangular solves
    tmp = scipy.linalg.solve_triangular(low, am, lower=True)
    reduced = scipy.linalg.solve_triangular(low, tmp.T, lower=True).T
    return sym_eig(reduced).values


def gen_eig_extremes(a, b) -> tuple[float, float]:
    """Smallest and largest generalized eigenvalue of the pencil (a, b).

    These equal the extremal generalized Rayleigh quotients
    ``y^T a y / y^T b y`` over nonzero ``y``.
    """
    values = gen_eig(a, b)
    return float(values[0]), float(values[-1])


def spd_solve(a, rhs: np.ndarray) -> np.ndarray:
    """Solve ``a z = rhs`` for SPD ``a`` by Cholesky factorization.

    One step of iterative refinement keeps the residual at
    ``<= 1e-10 * ||rhs||`` even for moderately conditioned systems.
    """
    m = _as_matrix(a)
    r = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(r)):
        raise NonFiniteError("right-hand side contains NaN or Inf")
    try:
        factor = scipy.linalg.cho_factor(m, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotSPDError(f"Cholesky factorization failed: {exc}") from exc
    z = scipy.linalg.cho_solve(factor, r)
    resid = r - m @ z
    z = z + scipy.linalg.cho_solve(factor, resid)
    return z


def cg_solve(
    apply_a: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    rel_tol: float = 1e-10,
    max_iter: int = 1000,
) -> CgResult:
    """Conjugate gradients for an SPD operator given as a matvec.

    Stops once ``||a z - rhs|| <= rel_tol * ||rhs||``; if the budget is
    exhausted first the result is returned with ``converged=False``.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    b = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(b)):
        raise NonFiniteError("right-hand side contains NaN or Inf")

    x = np.zeros_like(b)
    r = b.copy()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return CgResult(solution=x, iters=0, converged=True)
    d = r.copy()
    rr = float(r @ r)
    for k in range(1, max_iter + 1):
        ad = np.asarray(apply_a(d), dtype=float)
        if not np.all(np.isfinite(ad)):
            raise NonFiniteError("operator produced NaN or Inf")
        alpha = rr / float(d @ ad)
        x = x + alpha * d
        r = r - alpha * ad
        rr_new = float(r @ r)
        if np.sqrt(rr_new) <= rel_tol * bnorm:
            return CgResult(solution=x, iters=k, converged=True)
        d = r + (rr_new / rr) * d
        rr = rr_new
    return CgResult(solution=x, iters=max_iter, converged=False)
