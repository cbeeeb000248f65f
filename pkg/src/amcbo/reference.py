"""Reference front generation by interaction flow on a known front chart.

M coordinates evolve under explicit Euler on the chart pull-back of the
pairwise repulsion, settling into a low-energy spread along the front.
Everything here is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import NumericalBlowupError
from .metrics import ReferenceFront
from .objectives import FrontChart, ObjectiveProblem, front_chart
from .potentials import PotentialSpec, energy, gradient_array

FD_STEP = 1e-7
DEGENERATE_TOL = 1e-12


class DegenerateChartError(RuntimeError):
    """The chart derivative vanished; the flow direction is undefined."""


@dataclass
class FrontFlowConfig:
    """Parameters of the front flow.

    The default step and horizon are very conservative (a million Euler
    steps); generation for the built-in fronts uses coarser tuned values.
    """

    chart: FrontChart
    potential: PotentialSpec
    n_points: int = 100
    dt: float = 1e-8
    horizon: float = 0.01

    def __post_init__(self):
        if self.dt <= 0 or self.horizon <= 0:
            raise ValueError("step and horizon must be positive")
        if self.n_points < 1:
            raise ValueError("need at least one flow particle")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))


def chart_jacobian(chart: FrontChart, r: float, step: float = FD_STEP) -> np.ndarray:
    """h'(r) by central differences, one-sided within ``step`` of 0 or 1."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("chart coordinate must lie in [0, 1]")
    return _jacobian_rows(chart, np.array([float(r)]), step)[0]


def _h_and_jacobian(chart: FrontChart, Z: np.ndarray, step: float = FD_STEP):
    """Chart images and derivatives for all coordinates in one evaluation."""
    plus = np.where(Z > 1.0 - step, 0.0, step)
    minus = np.where(Z < step, 0.0, step)
    stacked = np.concatenate([Z, Z + plus, Z - minus])
    H = chart.h(stacked)
    M = Z.size
    G, H_plus, H_minus = H[:M], H[M:2 * M], H[2 * M:]
    Hp = (H_plus - H_minus) / (plus + minus)[:, None]
    if np.any(np.linalg.norm(Hp, axis=1) < DEGENERATE_TOL):
        raise DegenerateChartError("chart derivative below tolerance")
    return G, Hp


def _jacobian_rows(chart: FrontChart, Z: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    return _h_and_jacobian(chart, Z, step)[1]


def _interaction_force(spec: PotentialSpec, G: np.ndarray) -> np.ndarray:
    """-(1/M) sum_j grad U(G_i - G_j), for all i at once."""
    diffs = G[:, None, :] - G[None, :, :]
    return -gradient_array(spec, diffs).sum(axis=1) / G.shape[0]


def flow_on_front(
    config: FrontFlowConfig,
    z0: np.ndarray,
    record_every: int | None = None,
) -> tuple[np.ndarray, list[tuple[int, np.ndarray]]]:
    """Euler integration of the chart-coordinate flow.

    Returns the final coordinates and a recorded trajectory (step index,
    coordinates), always containing the initial and final states.  At the
    endpoints of [0, 1] an outward derivative is nulled and coordinates
    are clamped.
    """
    Z = np.asarray(z0, dtype=float).copy()
    if Z.ndim != 1 or Z.size != config.n_points:
        raise ValueError(f"expected {config.n_points} coordinates, got shape {Z.shape}")
    if np.any((Z < 0.0) | (Z > 1.0)):
        raise ValueError("initial coordinates must lie in [0, 1]")
    trajectory = [(0, Z.copy())]
    n_steps = config.n_steps
    for step in range(1, n_steps + 1):
        G, Hp = _h_and_jacobian(config.chart, Z)
        F = _interaction_force(config.potential, G)
        dz = (F * Hp).sum(axis=1) / (Hp * Hp).sum(axis=1)
        dz[(Z <= 0.0) & (dz < 0.0)] = 0.0
        dz[(Z >= 1.0) & (dz > 0.0)] = 0.0
        Z = np.clip(Z + config.dt * dz, 0.0, 1.0)
        if not np.all(np.isfinite(Z)):
            raise NumericalBlowupError(step)
        if record_every is not None and step % record_every == 0 and step != n_steps:
            trajectory.append((step, Z.copy()))
    trajectory.append((n_steps, Z.copy()))
    return Z, trajectory


def flow_in_simplex(
    config: FrontFlowConfig,
    w0: np.ndarray,
    record_every: int | None = None,
) -> tuple[np.ndarray, list[tuple[int, np.ndarray]]]:
    """Euler integration of the simplex-constrained weight flow (two
    objectives): the unconstrained proposal is projected back onto the
    simplex each step."""
    from .simplex import project_simplex_rows

    W = np.asarray(w0, dtype=float).copy()
    if W.ndim != 2 or W.shape != (config.n_points, 2):
        raise ValueError(f"expected ({config.n_points}, 2) weights, got shape {W.shape}")
    trajectory = [(0, W.copy())]
    n_steps = config.n_steps
    for step in range(1, n_steps + 1):
        G = config.chart.h(W[:, 0])
        diffs = G[:, None, :] - G[None, :, :]
        force = gradient_array(config.potential, diffs).sum(axis=1) / config.n_points
        V = W + config.dt * force
        if not np.all(np.isfinite(V)):
            raise NumericalBlowupError(step)
        W = project_simplex_rows(V)
        if record_every is not None and step % record_every == 0 and step != n_steps:
            trajectory.append((step, W.copy()))
    trajectory.append((n_steps, W.copy()))
    return W, trajectory


def image_equispaced_coords(chart: FrontChart, m_points: int, grid: int = 4097) -> np.ndarray:
    """Coordinates whose chart images are equispaced in arc length.

    The chart is sampled on a fine grid, cumulative segment lengths are
    inverted by interpolation, and the resulting coordinates place the M
    images uniformly along the front polyline.  A single point lands at
    the arc midpoint; two points land exactly on the endpoints.
    """
    if m_points < 1:
        raise ValueError("need at least one point")
    rs = np.linspace(0.0, 1.0, grid)
    pts = np.atleast_2d(chart.h(rs))
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    if m_points == 1:
        targets = np.array([0.5 * arc[-1]])
    else:
        targets = np.linspace(0.0, arc[-1], m_points)
    return np.interp(targets, arc, rs)


def _relax_front(
    chart: FrontChart,
    potential: PotentialSpec,
    z0: np.ndarray,
    horizon: float,
    safety: float = 0.2,
    max_steps: int = 30000,
) -> np.ndarray:
    """Integrate the front flow with a step chosen per iteration.

    Same right-hand side as flow_on_front; the step is capped so that no
    coordinate travels more than ``safety`` times the smallest coordinate
    gap, and no image travels more than ``safety`` times the smallest
    image gap.  That keeps the ordering intact (collisions stick because
    the repulsion gradient is cut off at the origin) while covering the
    horizon in a few thousand steps instead of a fixed-step million.
    A step that would raise the interaction energy is retried at half the
    size, so the relaxation never ends above its starting energy.
    """
    Z = np.asarray(z0, dtype=float).copy()
    if Z.size < 2:
        return Z
    t = 0.0
    for _ in range(max_steps):
        if t >= horizon:
            break
        G, Hp = _h_and_jacobian(chart, Z)
        F = _interaction_force(potential, G)
        dz = (F * Hp).sum(axis=1) / (Hp * Hp).sum(axis=1)
        dz[(Z <= 0.0) & (dz < 0.0)] = 0.0
        dz[(Z >= 1.0) & (dz > 0.0)] = 0.0
        vmax = np.max(np.abs(dz))
        if vmax == 0.0:
            break
        order = np.argsort(Z)
        min_zgap = np.min(np.diff(Z[order]))
        min_igap = np.min(np.linalg.norm(np.diff(G[order], axis=0), axis=1))
        iv_max = np.max(np.linalg.norm(Hp, axis=1) * np.abs(dz))
        dt = min(safety * min_zgap / vmax, safety * min_igap / iv_max, horizon - t)
        if dt <= 0.0 or not np.isfinite(dt):
            break
        e_here = energy(potential, G)
        Z_try = None
        for _ in range(30):
            Z_try = np.clip(Z + dt * dz, 0.0, 1.0)
            if energy(potential, np.atleast_2d(chart.h(Z_try))) <= e_here:
                break
            dt *= 0.5
            Z_try = None
        if Z_try is None:
            break
        Z = Z_try
        if not np.all(np.isfinite(Z)):
            raise NumericalBlowupError(0)
        t += dt
    return Z


def generate_reference(
    problem: ObjectiveProblem,
    m_points: int = 100,
    potential: PotentialSpec | None = None,
    horizon: float = 0.01,
    cache_dir: Path | None = None,
) -> ReferenceFront:
    """Low-energy reference front for a problem with a known chart.

    Coordinates start with images equispaced along the front and relax
    under the repulsion flow; the final coordinates are mapped through
    the chart and returned sorted by the first objective.  The default
    potential is Riesz with exponent equal to the image dimension: on a
    curve that exponent is in the regime whose minimizers spread with
    asymptotically equal gaps, so the generated front is near-uniform
    rather than end-clustered.  When ``cache_dir`` is given the result is
    stored as CSV keyed by the full configuration and reloaded on repeat
    calls.
    """
    if potential is None:
        potential = PotentialSpec("riesz", m=problem.m, s=float(problem.m))

    cache_path = None
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        cache_path = cache_dir / (_cache_key(problem, m_points, potential, horizon) + ".csv")
        if cache_path.exists():
            return load_reference_csv(cache_path)

    chart = front_chart(problem)
    Z = image_equispaced_coords(chart, m_points)
    Z = _relax_front(chart, potential, Z, horizon)
    points = np.atleast_2d(chart.h(Z))
    front = ReferenceFront(points[np.argsort(points[:, 0])])
    if cache_path is not None:
        save_reference_csv(cache_path, front,
                           _describe(problem, m_points, potential, horizon))
    return front


def _describe(problem, m_points, potential, horizon) -> str:
    params = " ".join(f"{k}={v:g}" for k, v in sorted(problem.params.items()))
    return (f"problem={problem.name} {params} d={problem.d} M={m_points} "
            f"potential={potential.kind} s={potential.s:g} C={potential.morse_c:g} "
            f"T={horizon:g}")


def _cache_key(problem, m_points, potential, horizon) -> str:
    params = "_".join(f"{k}{v:g}" for k, v in sorted(problem.params.items()))
    return (f"{problem.name}_{params}_d{problem.d}_M{m_points}_{potential.kind}"
            f"_s{potential.s:g}_C{potential.morse_c:g}_T{horizon:g}")


def save_reference_csv(path: Path, front: ReferenceFront, description: str) -> None:
    np.savetxt(path, front.points, delimiter=",", fmt="%.17g",
               header=description, comments="# ")


def load_reference_csv(path: Path) -> ReferenceFront:
    pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return ReferenceFront(pts)
