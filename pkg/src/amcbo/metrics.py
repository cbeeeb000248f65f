"""Solution-quality metrics and their CSV serialization.

Generational distance, its inverted variant, exact bi-objective
hypervolume, the three interaction energies, and the mean-field average
l2-error against a known minimizer map.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import cdist

from .dynamics import Swarm
from .objectives import ObjectiveProblem, front_chart
from .potentials import PotentialSpec, energy

CSV_COLUMNS = ("k", "gd", "igd", "hv", "u_riesz", "u_newton", "u_morse",
               "mf_err", "oob_frac")


@dataclass(frozen=True)
class ReferenceFront:
    """M points sampled on (an approximation of) the Pareto front."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError(f"expected an (M>=1, m) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("reference points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[1]


def _pairwise_sq(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return cdist(A, B, metric="sqeuclidean")


def gd(images: np.ndarray, ref: ReferenceFront) -> float:
    """sqrt of the mean squared distance from each image to its nearest
    reference point."""
    images = np.asarray(images, dtype=float)
    if images.ndim != 2 or images.shape[0] == 0:
        raise ValueError("need a non-empty (N, m) image array")
    if images.shape[1] != ref.m:
        raise ValueError("image dimension does not match the reference front")
    d2 = _pairwise_sq(images, ref.points).min(axis=1)
    return float(np.sqrt(d2.mean()))


def igd(images: np.ndarray, ref: ReferenceFront) -> float:
    """Same as gd with the roles of the two point sets swapped."""
    images = np.asarray(images, dtype=float)
    if images.ndim != 2 or images.shape[0] == 0:
        raise ValueError("need a non-empty (N, m) image array")
    if images.shape[1] != ref.m:
        raise ValueError("image dimension does not match the reference front")
    d2 = _pairwise_sq(ref.points, images).min(axis=1)
    return float(np.sqrt(d2.mean()))


def hypervolume_2d(images: np.ndarray, gstar: np.ndarray) -> float:
    """Lebesgue measure of the region dominated by ``images`` and
    dominating ``gstar``, by a sort-and-sweep over rectangle strips."""
    images = np.atleast_2d(np.asarray(images, dtype=float))
    gstar = np.asarray(gstar, dtype=float)
    if images.shape[1] != 2 or gstar.shape != (2,):
        raise ValueError("bi-objective hypervolume needs (N, 2) images and a 2-vector")
    pts = images[(images[:, 0] < gstar[0]) & (images[:, 1] < gstar[1])]
    if pts.shape[0] == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    # non-dominated staircase: x ascending, keep strictly decreasing y
    xs, ys = [], []
    best = np.inf
    for x, y in pts:
        if y < best:
            xs.append(x)
            ys.append(y)
            best = y
    xs.append(gstar[0])
    area = 0.0
    for i in range(len(ys)):
        area += (xs[i + 1] - xs[i]) * (gstar[1] - ys[i])
    return float(area)


def default_reference_point(ref: ReferenceFront, margin: float = 0.1) -> np.ndarray:
    """Componentwise max of the front plus ``margin`` of its range."""
    pts = ref.points
    span = pts.max(axis=0) - pts.min(axis=0)
    return pts.max(axis=0) + margin * span


def minimizer_map(problem: ObjectiveProblem, grid_points: int = 4097):
    """Map w -> argmin_x max_k w_k |g_k(x)| restricted to the front chart.

    Built by a coarse grid scan over the chart coordinate followed by a
    bounded 1-d refinement.  Problems without a chart are unsupported and
    raise before the map is built.
    """
    chart = front_chart(problem)
    rs = np.linspace(0.0, 1.0, grid_points)
    gv = np.abs(chart.h(rs))

    def xbar(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (problem.m,):
            raise ValueError(f"expected a weight vector of length {problem.m}")

        def scal(r: float) -> float:
            return float(np.max(w * np.abs(chart.h(np.float64(r)))))

        i = int(np.argmin((gv * w).max(axis=1)))
        lo, hi = rs[max(i - 1, 0)], rs[min(i + 1, grid_points - 1)]
        res = minimize_scalar(scal, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        r_best = float(res.x) if res.fun <= scal(rs[i]) else float(rs[i])
        return chart.edge_point(r_best)

    return xbar


def mean_field_error(swarm: Swarm, minimizer) -> float:
    """Average squared distance of each particle to the minimizer of its
    own scalarized sub-problem."""
    X = swarm.positions
    targets = np.stack([minimizer(w) for w in swarm.weights])
    return float(np.mean(np.sum((X - targets) ** 2, axis=1)))


@dataclass
class MetricsRecord:
    """One row of the metric history."""

    iteration: int
    gd: float
    igd: float
    hypervolume: float
    u_riesz: float
    u_newton: float
    u_morse: float
    mf_err: float | None = None
    oob_frac: float = 0.0


def write_records_csv(path: Path, records: list[MetricsRecord]) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([
                rec.iteration,
                repr(float(rec.gd)),
                repr(float(rec.igd)),
                repr(float(rec.hypervolume)),
                repr(float(rec.u_riesz)),
                repr(float(rec.u_newton)),
                repr(float(rec.u_morse)),
                "" if rec.mf_err is None else repr(float(rec.mf_err)),
                repr(float(rec.oob_frac)),
            ])


def read_records_csv(path: Path) -> list[MetricsRecord]:
    records = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected metrics header in {path}")
        for row in reader:
            records.append(MetricsRecord(
                iteration=int(row[0]),
                gd=float(row[1]),
                igd=float(row[2]),
                hypervolume=float(row[3]),
                u_riesz=float(row[4]),
                u_newton=float(row[5]),
                u_morse=float(row[6]),
                mf_err=None if row[7] == "" else float(row[7]),
                oob_frac=float(row[8]),
            ))
    return records


class MetricsCollector:
    """Observer that evaluates the metric suite on a cadence.

    Records iteration 0, every ``every``-th iteration, and ``k_final`` if
    given (so the last row always reflects the final state).
    """

    def __init__(
        self,
        problem: ObjectiveProblem,
        reference: ReferenceFront,
        gstar: np.ndarray | None = None,
        every: int = 10,
        k_final: int | None = None,
        minimizer=None,
        morse_c: float = 20.0,
    ):
        if every < 1:
            raise ValueError("cadence must be positive")
        self.problem = problem
        self.reference = reference
        self.gstar = default_reference_point(reference) if gstar is None else np.asarray(gstar, dtype=float)
        self.every = every
        self.k_final = k_final
        self.minimizer = minimizer
        m = problem.m
        self._specs = (
            PotentialSpec("riesz", m=m),
            PotentialSpec("newtonian", m=m),
            PotentialSpec("morse", m=m, morse_c=morse_c),
        )
        self.records: list[MetricsRecord] = []

    def __call__(self, k: int, swarm: Swarm) -> None:
        if k % self.every != 0 and k != self.k_final:
            return
        X = swarm.positions
        images = self.problem.evaluate_batch(X)
        oob = float(np.mean(np.any((X < 0.0) | (X > 1.0), axis=1)))
        mf = None if self.minimizer is None else mean_field_error(swarm, self.minimizer)
        self.records.append(MetricsRecord(
            iteration=k,
            gd=gd(images, self.reference),
            igd=igd(images, self.reference),
            hypervolume=hypervolume_2d(images, self.gstar),
            u_riesz=energy(self._specs[0], images),
            u_newton=energy(self._specs[1], images),
            u_morse=energy(self._specs[2], images),
            mf_err=mf,
            oob_frac=oob,
        ))
