"""Pairwise interaction potentials acting on image-space differences.

Three families are supported, each with a closed-form gradient and radial
derivative.  Distances below SINGULAR_GUARD are treated as coincident:
gradients are zeroed there rather than evaluated, while values keep their
analytic limits (infinite for the singular families).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this separation two image points count as coincident.
SINGULAR_GUARD = 1e-14

# Pair energies are reported clamped at this cap.
ENERGY_CAP = 1e10

KINDS = ("riesz", "newtonian", "morse")


@dataclass(frozen=True)
class PotentialSpec:
    """Choice of interaction family plus its shape parameters.

    ``m`` is the dimension of the image space the potential acts in; the
    Riesz exponent ``s`` defaults to m - 1 and the Morse rate ``morse_c``
    to 20.
    """

    kind: str
    m: int = 2
    s: float | None = None
    morse_c: float = 20.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.m < 2:
            raise ValueError("image dimension must be at least 2")
        if self.s is None:
            object.__setattr__(self, "s", float(self.m - 1))
        if self.s <= 0:
            raise ValueError("Riesz exponent must be positive")
        if self.morse_c <= 0:
            raise ValueError("Morse rate must be positive")


def potential_value(spec: PotentialSpec, z: np.ndarray) -> float:
    """U(z) for a single image-space difference; may be infinite at z = 0."""
    z = np.asarray(z, dtype=float)
    rho = float(np.linalg.norm(z))
    if spec.kind == "riesz":
        return float("inf") if rho < SINGULAR_GUARD else rho ** -spec.s
    if spec.kind == "newtonian":
        if spec.m == 2:
            return float("-inf") if rho < SINGULAR_GUARD else float(np.log(rho))
        return float("inf") if rho < SINGULAR_GUARD else rho ** (2.0 - spec.m)
    return float(np.exp(-spec.morse_c * rho))


def radial_derivative(spec: PotentialSpec, rho: float) -> float:
    """U'(rho) along the radial direction; zero inside the singular guard."""
    if rho < 0:
        raise ValueError("radius must be non-negative")
    if rho < SINGULAR_GUARD:
        return 0.0
    if spec.kind == "riesz":
        return -spec.s * rho ** (-spec.s - 1.0)
    if spec.kind == "newtonian":
        if spec.m == 2:
            return 1.0 / rho
        return (2.0 - spec.m) * rho ** (1.0 - spec.m)
    return -spec.morse_c * float(np.exp(-spec.morse_c * rho))


def potential_gradient(spec: PotentialSpec, z: np.ndarray) -> np.ndarray:
    """grad U(z) = U'(|z|) z / |z|, exactly zero inside the singular guard."""
    z = np.asarray(z, dtype=float)
    rho = float(np.linalg.norm(z))
    if rho < SINGULAR_GUARD:
        return np.zeros_like(z)
    return (radial_derivative(spec, rho) / rho) * z


def radial_derivative_array(spec: PotentialSpec, rho: np.ndarray) -> np.ndarray:
    """Vectorized U'(rho) with the same singular-guard convention."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    ok = rho >= SINGULAR_GUARD
    r = rho[ok]
    if spec.kind == "riesz":
        out[ok] = -spec.s * r ** (-spec.s - 1.0)
    elif spec.kind == "newtonian":
        out[ok] = 1.0 / r if spec.m == 2 else (2.0 - spec.m) * r ** (1.0 - spec.m)
    else:
        out[ok] = -spec.morse_c * np.exp(-spec.morse_c * r)
    return out


def gradient_array(spec: PotentialSpec, Z: np.ndarray) -> np.ndarray:
    """grad U over an array of differences with shape (..., m)."""
    Z = np.asarray(Z, dtype=float)
    rho = np.linalg.norm(Z, axis=-1)
    coef = radial_derivative_array(spec, rho)
    scale = np.zeros_like(rho)
    ok = rho >= SINGULAR_GUARD
    scale[ok] = coef[ok] / rho[ok]
    return Z * scale[..., None]


def energy(spec: PotentialSpec, points: np.ndarray, clamp: bool = True) -> float:
    """Normalized pair energy (1/n^2) sum_{i != j} U(y_i - y_j).

    The diagonal is excluded, so a single point has zero energy.  With
    ``clamp`` the result is capped at ENERGY_CAP for reporting; pass
    ``clamp=False`` for the raw (possibly infinite) value.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError(f"expected an (n, m) array, got shape {points.shape}")
    n = points.shape[0]
    if n < 2:
        return 0.0
    diff = points[:, None, :] - points[None, :, :]
    rho = np.linalg.norm(diff, axis=-1)
    off = ~np.eye(n, dtype=bool)
    r = rho[off]
    coincident = r < SINGULAR_GUARD
    vals = np.empty_like(r)
    with np.errstate(divide="ignore"):
        if spec.kind == "riesz":
            vals[~coincident] = r[~coincident] ** -spec.s
            vals[coincident] = np.inf
        elif spec.kind == "newtonian":
            if spec.m == 2:
                vals[~coincident] = np.log(r[~coincident])
                vals[coincident] = -np.inf
            else:
                vals[~coincident] = r[~coincident] ** (2.0 - spec.m)
                vals[coincident] = np.inf
        else:
            vals = np.exp(-spec.morse_c * r)
    total = float(vals.sum()) / n**2
    if clamp:
        return min(total, ENERGY_CAP)
    return total
