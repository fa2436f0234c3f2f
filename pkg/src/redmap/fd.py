"""Central finite differences used to validate analytic derivatives.

Step sizes follow the usual truncation/roundoff balance: first-order
derivatives use ``h = 1e-6 * (1 + ||x||)``, second-order differencing
uses ``h = 1e-4 * (1 + ||x||)``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

FIRST_ORDER_STEP = 1e-6
SECOND_ORDER_STEP = 1e-4


def _step(x: np.ndarray, base: float) -> float:
    return base * (1.0 + float(np.linalg.norm(x)))


def gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = _step(x, FIRST_ORDER_STEP) if h is None else h
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of a vector-valued function."""
    x = np.asarray(x, dtype=float)
    h = _step(x, FIRST_ORDER_STEP) if h is None else h
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def hessian(f: Callable[[np.ndarray], float], x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Symmetrized central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = _step(x, SECOND_ORDER_STEP) if h is None else h
    n = x.size
    m = np.zeros((n, n))
    for i in range(n):
        e = np.zeros_like(x)
        e[i] = h
        m[:, i] = (gradient(f, x + e, h=h) - gradient(f, x - e, h=h)) / (2.0 * h)
    return 0.5 * (m + m.T)


def tensor3(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Central difference of a matrix-valued function along each input axis.

    For ``f`` returning shape ``(p, q)`` the result has shape ``(p, q, n)``
    with the last index the differentiation direction.
    """
    x = np.asarray(x, dtype=float)
    h = _step(x, SECOND_ORDER_STEP) if h is None else h
    slabs = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        slabs.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.stack(slabs, axis=-1)
