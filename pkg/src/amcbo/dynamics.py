"""The consensus-based optimization engine.

One iteration freezes the swarm, evaluates the objectives once per
particle, computes every particle's consensus point from that frozen
snapshot, then applies the position update and (when enabled) the weight
update synchronously.  All randomness derives from a single master seed
through per-purpose substreams, so a (config, seed) pair fixes the whole
trajectory bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .objectives import ObjectiveProblem
from .potentials import PotentialSpec, gradient_array, radial_derivative_array
from .scalarization import consensus_points
from .simplex import project_simplex_rows, uniform_weights

DIFFUSION_MODES = ("isotropic", "anisotropic")

# Chunk of normals pre-drawn per particle stream; amortizes generator calls.
_NOISE_CHUNK = 256


class NumericalBlowupError(RuntimeError):
    """A step produced non-finite state."""

    def __init__(self, iteration: int | None = None):
        self.iteration = iteration
        super().__init__(f"non-finite state at iteration {iteration}")


def _normalize_diffusion(mode: str) -> str:
    key = {"iso": "isotropic", "aniso": "anisotropic"}.get(mode, mode)
    if key not in DIFFUSION_MODES:
        raise ValueError(f"unknown diffusion mode {mode!r}")
    return key


@dataclass
class SolverConfig:
    """Engine parameters; defaults match the standard experiment setup."""

    lam: float = 1.0
    sigma: float = 4.0
    alpha: float = 1e6
    tau: float = 0.0
    dt: float = 0.01
    n_particles: int = 100
    k_max: int = 5000
    diffusion: str = "anisotropic"
    potential: PotentialSpec | None = None
    batch_size: int | None = None
    box_projection: bool = False
    seed: int = 0
    stop_when: Callable[["Swarm"], bool] | None = None

    def __post_init__(self):
        self.diffusion = _normalize_diffusion(self.diffusion)
        for name in ("lam", "sigma", "alpha", "tau", "dt"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.k_max < 0:
            raise ValueError("k_max must be non-negative")
        if self.batch_size is not None and not (1 <= self.batch_size <= self.n_particles):
            raise ValueError("batch_size must satisfy 1 <= M <= N")

    def validate_for(self, problem: ObjectiveProblem) -> None:
        if self.tau > 0 and self.potential is None:
            raise ValueError("weight adaptation (tau > 0) needs a potential")
        if self.potential is not None and self.potential.m != problem.m:
            raise ValueError(
                f"potential acts in dimension {self.potential.m}, problem has m={problem.m}"
            )


@dataclass
class Swarm:
    """Snapshot of the particle system at one iteration."""

    positions: np.ndarray
    weights: np.ndarray
    iteration: int = 0

    @property
    def n(self) -> int:
        return self.positions.shape[0]


def diffusion_matrix(mode: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Diagonal of D(x - y) as d per-coordinate scale factors.

    Isotropic: |x - y| replicated; anisotropic: the signed components.
    """
    mode = _normalize_diffusion(mode)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must share a dimension")
    diff = x - y
    if mode == "isotropic":
        return np.full_like(diff, np.linalg.norm(diff))
    return diff


def _diffusion_scales_rows(mode: str, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = X - Y
    if mode == "isotropic":
        return np.linalg.norm(diff, axis=1, keepdims=True) * np.ones_like(diff)
    return diff


def sample_batch(n: int, batch_size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform M-subset of {0, ..., n-1} without replacement.

    The full batch is returned deterministically without touching the
    stream, so M = n and no batching consume identical randomness.
    """
    if not 1 <= batch_size <= n:
        raise ValueError("batch size must satisfy 1 <= M <= N")
    if batch_size == n:
        return np.arange(n)
    return rng.choice(n, size=batch_size, replace=False)


def step_positions(
    swarm: Swarm,
    gvalues: np.ndarray,
    config: SolverConfig,
    rng,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Euler-Maruyama position update against the frozen snapshot.

    ``rng`` only needs a ``standard_normal(shape)`` method; the engine
    passes an adapter that serves each particle from its own substream.
    """
    X = swarm.positions
    Y = consensus_points(X, gvalues, swarm.weights, config.alpha, batch)
    drift = config.lam * (Y - X) * config.dt
    scales = _diffusion_scales_rows(config.diffusion, X, Y)
    noise = rng.standard_normal(X.shape)
    X_new = X + drift + config.sigma * np.sqrt(config.dt) * scales * noise
    if config.box_projection:
        X_new = np.clip(X_new, 0.0, 1.0)
    if not np.all(np.isfinite(X_new)):
        raise NumericalBlowupError(swarm.iteration + 1)
    return X_new


def step_weights_2d(
    swarm: Swarm,
    gvalues: np.ndarray,
    config: SolverConfig,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient-ascent weight update for two objectives.

    V^i = W^i + (tau/|batch|) sum_j grad U(g(X^i) - g(X^j)) dt, projected
    back onto the simplex.  Coincident image pairs contribute nothing.
    """
    spec = config.potential
    if spec is None:
        raise ValueError("weight step needs a potential")
    G = np.asarray(gvalues, dtype=float)
    G_b = G if batch is None else G[np.asarray(batch, dtype=int)]
    diffs = G[:, None, :] - G_b[None, :, :]
    force = gradient_array(spec, diffs).sum(axis=1)
    V = swarm.weights + (config.tau / G_b.shape[0]) * force * config.dt
    if not np.all(np.isfinite(V)):
        raise NumericalBlowupError(swarm.iteration + 1)
    return project_simplex_rows(V)


def step_weights_general(
    swarm: Swarm,
    gvalues: np.ndarray,
    config: SolverConfig,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Weight update for any m, driven by the potential's radial derivative.

    V^i = W^i - (tau/|batch|) sum_j (W^i - W^j)/|W^i - W^j|
          * r'(|g(X^j) - g(X^i)|) dt, projected back onto the simplex.
    Pairs with nearly identical weights have no defined direction and
    contribute zero.
    """
    spec = config.potential
    if spec is None:
        raise ValueError("weight step needs a potential")
    W = swarm.weights
    G = np.asarray(gvalues, dtype=float)
    if batch is None:
        W_b, G_b = W, G
    else:
        idx = np.asarray(batch, dtype=int)
        W_b, G_b = W[idx], G[idx]
    wdiff = W[:, None, :] - W_b[None, :, :]
    wnorm = np.linalg.norm(wdiff, axis=2)
    dirs = np.zeros_like(wdiff)
    ok = wnorm >= 1e-14
    dirs[ok] = wdiff[ok] / wnorm[ok, None]
    rho = np.linalg.norm(G_b[None, :, :] - G[:, None, :], axis=2)
    rp = radial_derivative_array(spec, rho)
    force = (dirs * rp[:, :, None]).sum(axis=1)
    V = W - (config.tau / G_b.shape[0]) * force * config.dt
    if not np.all(np.isfinite(V)):
        raise NumericalBlowupError(swarm.iteration + 1)
    return project_simplex_rows(V)


class _ParticleNoise:
    """Serves per-particle standard normals from dedicated substreams,
    pre-drawn in chunks.  Assignment is fixed by particle index, never by
    evaluation order."""

    def __init__(self, seeds, d: int, chunk: int = _NOISE_CHUNK):
        self._rngs = [np.random.default_rng(s) for s in seeds]
        self._d = d
        self._chunk = chunk
        self._buf: np.ndarray | None = None
        self._pos = 0

    def standard_normal(self, shape) -> np.ndarray:
        n, d = shape
        if n != len(self._rngs) or d != self._d:
            raise ValueError(f"expected shape ({len(self._rngs)}, {self._d})")
        if self._buf is None or self._pos == self._chunk:
            self._buf = np.stack(
                [r.standard_normal((self._chunk, self._d)) for r in self._rngs]
            )
            self._pos = 0
        out = self._buf[:, self._pos, :]
        self._pos += 1
        return out


class TrajectoryRecorder:
    """Observer that keeps copies of the swarm every ``every`` iterations."""

    def __init__(self, every: int = 1):
        if every < 1:
            raise ValueError("recording cadence must be positive")
        self.every = every
        self.history: list[Swarm] = []

    def __call__(self, k: int, swarm: Swarm) -> None:
        if k % self.every == 0:
            self.history.append(
                Swarm(swarm.positions.copy(), swarm.weights.copy(), k)
            )


def initialize_swarm(problem: ObjectiveProblem, config: SolverConfig,
                     rng: np.random.Generator) -> Swarm:
    """Positions uniform on [0,1]^d, weights from the standard spread."""
    X = rng.uniform(size=(config.n_particles, problem.d))
    W = uniform_weights(config.n_particles, problem.m, rng)
    return Swarm(X, W, 0)


def iterate(
    problem: ObjectiveProblem,
    config: SolverConfig,
    observer: Callable[[int, Swarm], None] | None = None,
) -> Swarm:
    """Run the full loop and return the final swarm.

    The observer receives (iteration index, swarm) after initialization
    (k = 0) and after every step; accumulate it there to keep a history.
    Identical (config, seed) pairs reproduce the trajectory bit for bit.
    """
    config.validate_for(problem)
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_particles + 2)
    init_rng = np.random.default_rng(seeds[0])
    batch_rng = np.random.default_rng(seeds[1])
    noise = _ParticleNoise(seeds[2:], problem.d)

    swarm = initialize_swarm(problem, config, init_rng)
    if observer is not None:
        observer(0, swarm)

    n = config.n_particles
    use_weights = config.tau > 0 and config.potential is not None
    weight_step = step_weights_2d if problem.m == 2 else step_weights_general

    for k in range(config.k_max):
        gvalues = problem.evaluate_batch(swarm.positions)
        if config.batch_size is None:
            batch = None
        else:
            batch = sample_batch(n, config.batch_size, batch_rng)
        X_new = step_positions(swarm, gvalues, config, noise, batch)
        W_new = weight_step(swarm, gvalues, config, batch) if use_weights else swarm.weights
        swarm = Swarm(X_new, W_new, k + 1)
        if observer is not None:
            observer(swarm.iteration, swarm)
        if config.stop_when is not None and config.stop_when(swarm):
            break
    return swarm
