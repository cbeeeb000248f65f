"""Weighted Chebyshev scalarization and the weighted consensus point."""

from __future__ import annotations

import numpy as np


def chebyshev(gvals: np.ndarray, w: np.ndarray) -> float:
    """max_k w_k |g_k|, the scalar sub-problem value at one point."""
    gvals = np.asarray(gvals, dtype=float)
    w = np.asarray(w, dtype=float)
    if gvals.shape != w.shape or gvals.ndim != 1:
        raise ValueError(f"shape mismatch: {gvals.shape} vs {w.shape}")
    return float(np.max(w * np.abs(gvals)))


def chebyshev_matrix(gvalues: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """All-pairs scalarization: (n, m) images x (p, m) weights -> (p, n)."""
    gvalues = np.abs(np.asarray(gvalues, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if gvalues.ndim != 2 or weights.ndim != 2 or gvalues.shape[1] != weights.shape[1]:
        raise ValueError(f"incompatible shapes {gvalues.shape} and {weights.shape}")
    m = gvalues.shape[1]
    if m == 2:
        return np.maximum(
            np.outer(weights[:, 0], gvalues[:, 0]),
            np.outer(weights[:, 1], gvalues[:, 1]),
        )
    return np.max(weights[:, None, :] * gvalues[None, :, :], axis=2)


def _softmin_coefficients(G: np.ndarray, alpha: float) -> np.ndarray:
    """Row-normalized exp(-alpha G), shifted by the row minimum for stability."""
    E = G - G.min(axis=1, keepdims=True)
    C = np.exp(-alpha * E)
    return C / C.sum(axis=1, keepdims=True)


def consensus_point(
    positions: np.ndarray,
    gvalues: np.ndarray,
    w: np.ndarray,
    alpha: float,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Exponentially weighted barycenter of the batch under one weight vector.

    As alpha grows this approaches the batch member with the smallest
    scalarized value; the shift-by-minimum evaluation makes the result
    exactly invariant under constant shifts of the scalarized values.
    """
    w = np.asarray(w, dtype=float)
    return consensus_points(positions, gvalues, w[None, :], alpha, batch)[0]


def consensus_points(
    positions: np.ndarray,
    gvalues: np.ndarray,
    weights: np.ndarray,
    alpha: float,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Consensus points for many weight vectors at once: (p, m) -> (p, d)."""
    positions = np.asarray(positions, dtype=float)
    gvalues = np.asarray(gvalues, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not np.isfinite(alpha) or alpha < 0:
        raise ValueError("alpha must be finite and non-negative")
    if positions.ndim != 2 or gvalues.ndim != 2 or positions.shape[0] != gvalues.shape[0]:
        raise ValueError("positions and gvalues must align row-wise")
    if batch is None:
        X_b, G_b = positions, gvalues
    else:
        batch = np.asarray(batch, dtype=int)
        if batch.size == 0:
            raise ValueError("batch must be non-empty")
        X_b, G_b = positions[batch], gvalues[batch]
    G = chebyshev_matrix(G_b, weights)
    return _softmin_coefficients(G, alpha) @ X_b
