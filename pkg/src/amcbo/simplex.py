"""Geometry of the probability simplex: projection and weight sampling."""

from __future__ import annotations

import numpy as np

# Tolerance on sum(w) == 1 used by validity checks.
SUM_TOL = 1e-12


def is_weight_vector(w: np.ndarray, tol: float = SUM_TOL) -> bool:
    """True if ``w`` lies on the probability simplex within ``tol``."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2 or not np.all(np.isfinite(w)):
        return False
    return bool(np.all(w >= 0.0) and abs(w.sum() - 1.0) <= tol)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex.

    Sort-then-threshold algorithm, O(m log m).  Inputs already on the
    simplex (within SUM_TOL) pass through untouched, which makes the
    projection a bitwise fixed point on its own outputs.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if v.size < 2:
        raise ValueError("weight vectors need at least two components")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project non-finite input")
    return project_simplex_rows(v[None, :])[0]


def project_simplex_rows(V: np.ndarray) -> np.ndarray:
    """Row-wise simplex projection of an (n, m) array."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[1] < 2:
        raise ValueError(f"expected an (n, m>=2) array, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("cannot project non-finite input")
    n, m = V.shape
    settled = (V.min(axis=1) >= 0.0) & (np.abs(V.sum(axis=1) - 1.0) <= SUM_TOL)
    if np.all(settled):
        return V.copy()
    u = -np.sort(-V, axis=1)
    css = np.cumsum(u, axis=1)
    j = np.arange(1, m + 1)
    cond = u - (css - 1.0) / j > 0.0
    # cond[:, 0] is always true; rho is the last index where cond holds
    rho = m - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = (css[np.arange(n), rho] - 1.0) / (rho + 1.0)
    W = np.maximum(V - theta[:, None], 0.0)
    W /= W.sum(axis=1, keepdims=True)
    W[settled] = V[settled]
    return W


def uniform_weights(n: int, m: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Initial weight spread: deterministic grid for two objectives,
    flat Dirichlet samples otherwise.

    For m == 2 the i-th row is ((i-1)/(n-1), 1 - (i-1)/(n-1)); a single
    particle sits at the simplex midpoint.  For m > 2 an ``rng`` is required.
    """
    if n < 1:
        raise ValueError("need at least one weight vector")
    if m < 2:
        raise ValueError("need at least two objectives")
    if m == 2:
        if n == 1:
            t = np.array([0.5])
        else:
            t = np.arange(n, dtype=float) / (n - 1)
        W = np.column_stack([t, 1.0 - t])
    else:
        if rng is None:
            raise ValueError("m > 2 sampling requires a random generator")
        W = rng.dirichlet(np.ones(m), size=n)
    return W / W.sum(axis=1, keepdims=True)
