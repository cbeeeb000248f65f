"""Benchmark vector objectives with exact-penalty box constraints.

Both built-in families are defined on [0, 1]^d and penalized outside it by
a multiple of the Euclidean distance to the box, scaled so the penalty
dominates the objective's Lipschitz constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class UnsupportedProblemError(ValueError):
    """Raised for problem names outside the registry."""


def dist_to_box(x: np.ndarray) -> float:
    """Euclidean distance from a point to the unit box [0, 1]^d."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - np.clip(x, 0.0, 1.0)))


def _dist_to_box_rows(X: np.ndarray) -> np.ndarray:
    return np.linalg.norm(X - np.clip(X, 0.0, 1.0), axis=1)


def lame_objective(X: np.ndarray, gamma: float) -> np.ndarray:
    """Two-objective supersphere family whose front is the unit Lame curve
    g1^gamma + g2^gamma = 1; rows of ``X`` are points in R^d, d >= 2.

    The optimal set is the edge [0,1] x {0}^(d-1): away from it every
    objective grows through the (1 + r) factor, and outside the box the
    penalty slope pi/gamma dominates the objective's Lipschitz constant.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    x1 = X[:, 0]
    r = np.sqrt(np.sum(X[:, 1:] ** 2, axis=1))
    pen = (np.pi / gamma) * _dist_to_box_rows(X)
    e = 2.0 / gamma
    g1 = np.abs(np.cos(0.5 * np.pi * x1)) ** e * (1.0 + r) + pen
    g2 = np.abs(np.sin(0.5 * np.pi * x1)) ** e * (1.0 + r) + pen
    return np.column_stack([g1, g2])


def do2dk_objective(X: np.ndarray, k: float, s: float) -> np.ndarray:
    """Two-objective family with k front knees and an s-controlled skew."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = X.shape[1]
    x1 = X[:, 0]
    r_a = 1.0 + 9.0 / (d - 1) * np.sum(X[:, 1:], axis=1)
    r_b = 5.0 + 10.0 * (x1 - 0.5) ** 2 + 2.0 ** (0.5 * s) * np.cos(2.0 * k * np.pi * x1) / k
    phase = (1.0 + (2.0**s - 1.0) / 2.0 ** (s + 2.0)) * np.pi + 1.0
    pen = 10.0 * _dist_to_box_rows(X)
    g1 = np.sin(0.5 * np.pi * x1 + phase) * r_a * r_b + pen
    g2 = (np.cos(0.5 * np.pi * x1 + np.pi) + 1.0) * r_a * r_b + pen
    return np.column_stack([g1, g2])


@dataclass(frozen=True)
class ObjectiveProblem:
    """A named map g: R^d -> R^m with batch evaluation."""

    name: str
    d: int
    m: int
    params: dict = field(default_factory=dict)
    fn: Callable[[np.ndarray], np.ndarray] = None  # type: ignore[assignment]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ValueError(f"expected a point in R^{self.d}, got shape {x.shape}")
        return self.fn(x[None, :])[0]

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"expected an (n, {self.d}) array, got shape {X.shape}")
        return self.fn(X)


@dataclass(frozen=True)
class FrontChart:
    """One-dimensional chart r in [0, 1] onto the image-space front,
    together with the decision-space curve it traces."""

    h: Callable[[np.ndarray], np.ndarray]
    edge_point: Callable[[float], np.ndarray]


def make_problem(name: str, d: int = 10, **params) -> ObjectiveProblem:
    """Build a benchmark problem by name; unknown names raise."""
    if d < 2:
        raise ValueError("benchmark problems need d >= 2")
    key = name.lower()
    if key == "lame":
        gamma = float(params.pop("gamma", 1.0))
        if params:
            raise ValueError(f"unknown parameters for lame: {sorted(params)}")
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return ObjectiveProblem(
            name="lame",
            d=d,
            m=2,
            params={"gamma": gamma},
            fn=lambda X, g=gamma: lame_objective(X, g),
        )
    if key == "do2dk":
        k = float(params.pop("k", 2.0))
        s = float(params.pop("s", 1.0))
        if params:
            raise ValueError(f"unknown parameters for do2dk: {sorted(params)}")
        if k <= 0 or s < 0:
            raise ValueError("need k > 0 and s >= 0")
        return ObjectiveProblem(
            name="do2dk",
            d=d,
            m=2,
            params={"k": k, "s": s},
            fn=lambda X, k_=k, s_=s: do2dk_objective(X, k_, s_),
        )
    raise UnsupportedProblemError(f"unknown problem {name!r}")


def front_chart(problem: ObjectiveProblem) -> FrontChart:
    """Front chart of a built-in problem: both families trace their front
    along the first coordinate axis, x = (r, 0, ..., 0)."""
    if problem.name not in ("lame", "do2dk"):
        raise UnsupportedProblemError(f"no front chart for problem {problem.name!r}")

    d = problem.d

    def edge_point(r: float) -> np.ndarray:
        x = np.zeros(d)
        x[0] = r
        return x

    def h(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        X = np.zeros((r.size, d))
        X[:, 0] = r
        out = problem.evaluate_batch(X)
        return out[0] if scalar else out

    return FrontChart(h=h, edge_point=edge_point)
