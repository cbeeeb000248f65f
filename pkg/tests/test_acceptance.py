"""End-to-end acceptance checks for the solver, metrics, and tooling.

One test per numbered criterion.  Each prints a single line

    CRITERION nn: PASS|FAIL - measured numbers

before asserting, so ``pytest tests/test_acceptance.py -v -s`` reads as a
scorecard.  The particle batches at full problem scale (25 runs x 5000
iterations) are session fixtures sharing one reference-front cache; expect
the module to take on the order of ten minutes single-threaded.
"""

import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from amcbo.cli import main
from amcbo.dynamics import SolverConfig, TrajectoryRecorder, iterate
from amcbo.harness import ExperimentConfig, run_experiment, run_sweep
from amcbo.metrics import hypervolume_2d
from amcbo.objectives import front_chart, make_problem
from amcbo.potentials import (
    PotentialSpec,
    energy,
    potential_gradient,
    potential_value,
)
from amcbo.reference import generate_reference, image_equispaced_coords
from amcbo.scalarization import chebyshev_matrix, consensus_point
from amcbo.simplex import project_simplex

MORSE = PotentialSpec("morse", m=2, morse_c=20.0)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def _batch(base: Path, name: str, problem: str, params: dict, *,
           tau: float = 0.0, potential: PotentialSpec | None = None,
           runs: int = 25, batch_size: int | None = None):
    solver = SolverConfig(tau=tau, potential=potential, batch_size=batch_size)
    config = ExperimentConfig(
        problem_name=problem, problem_params=params, d=10, solver=solver,
        runs=runs, metrics_every=10, out_dir=base / name,
        reference_cache=base / "cache", make_figures=False,
    )
    t0 = time.perf_counter()
    result = run_experiment(config)
    assert len(result.completed) == runs, f"{name}: runs blew up"
    return result, time.perf_counter() - t0


def _gd_curves(result) -> np.ndarray:
    return np.array([[rec.gd for rec in h] for h in result.histories])


def _final_means(result) -> dict:
    finals = [h[-1] for h in result.histories]
    return {
        "gd": float(np.mean([r.gd for r in finals])),
        "igd": float(np.mean([r.igd for r in finals])),
        "u_morse": float(np.mean([r.u_morse for r in finals])),
    }


@pytest.fixture(scope="session")
def base(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="session")
def lame1_tau0(base):
    return _batch(base, "lame1_tau0", "lame", {"gamma": 1.0})


@pytest.fixture(scope="session")
def lame1_morse(base):
    return _batch(base, "lame1_morse", "lame", {"gamma": 1.0},
                  tau=0.1, potential=MORSE)


@pytest.fixture(scope="session")
def lame025_tau0(base):
    return _batch(base, "lame025_tau0", "lame", {"gamma": 0.25})


@pytest.fixture(scope="session")
def lame025_morse(base):
    return _batch(base, "lame025_morse", "lame", {"gamma": 0.25},
                  tau=0.1, potential=MORSE)


@pytest.fixture(scope="session")
def do2dk42_tau0(base):
    return _batch(base, "do2dk42_tau0", "do2dk", {"k": 4.0, "s": 2.0})


@pytest.fixture(scope="session")
def do2dk42_morse(base):
    return _batch(base, "do2dk42_morse", "do2dk", {"k": 4.0, "s": 2.0},
                  tau=0.1, potential=MORSE)


@pytest.fixture(scope="session")
def do2dk21_morse(base):
    return _batch(base, "do2dk21_morse", "do2dk", {"k": 2.0, "s": 1.0},
                  tau=0.1, potential=MORSE)


def test_criterion_01_gd_decay(lame1_tau0):
    """Linear-front defaults: final GD small, large drop from the start,
    exponential-looking decay over the first 500 iterations, sane runtime."""
    result, seconds = lame1_tau0
    mean_curve = _gd_curves(result).mean(axis=0)
    ks = np.array([rec.iteration for rec in result.histories[0]])
    initial, final = float(mean_curve[0]), float(mean_curve[-1])
    ratio = initial / final
    sel = ks <= 500
    slope, intercept = np.polyfit(ks[sel], np.log(mean_curve[sel]), 1)
    fitted = slope * ks[sel] + intercept
    resid = np.log(mean_curve[sel]) - fitted
    r2 = 1.0 - resid @ resid / np.sum(
        (np.log(mean_curve[sel]) - np.log(mean_curve[sel]).mean()) ** 2)
    ok = (final <= 1.0 and ratio >= 100.0 and slope < 0.0 and r2 >= 0.9
          and seconds <= 360.0)
    _report(1, ok, f"final={final:.4f} init/final={ratio:.1f}x "
                   f"rate={slope:.2e} R2={r2:.3f} batch={seconds:.0f}s")


def test_criterion_02_adaptation_improves_igd(lame025_tau0, lame025_morse,
                                              do2dk42_tau0, do2dk42_morse):
    """Weight adaptation with the Morse kernel cuts mean IGD to <= 0.6 of
    the frozen-weights mean on both curved benchmarks, 25 paired seeds."""
    r_lame = _final_means(lame025_morse[0])["igd"] / \
        _final_means(lame025_tau0[0])["igd"]
    r_do2dk = _final_means(do2dk42_morse[0])["igd"] / \
        _final_means(do2dk42_tau0[0])["igd"]
    ok = r_lame <= 0.6 and r_do2dk <= 0.6
    _report(2, ok, f"IGD ratio lame gamma=0.25: {r_lame:.3f}, "
                   f"do2dk k=4 s=2: {r_do2dk:.3f} (need <= 0.6)")


def test_criterion_03_frozen_weights_win_gd(lame1_tau0, lame1_morse):
    """On the linear front, frozen weights reach mean final GD no worse
    than the adapted run."""
    gd0 = _final_means(lame1_tau0[0])["gd"]
    gd1 = _final_means(lame1_morse[0])["gd"]
    _report(3, gd0 <= gd1, f"GD tau=0: {gd0:.4f} <= GD morse: {gd1:.4f}")


def test_criterion_04_energy_decays_after_concentration(do2dk21_morse):
    """Morse image energy at the end sits below its level at the iteration
    where GD first falls under twice its final value, averaged over runs."""
    result, _ = do2dk21_morse
    at_conc, at_end = [], []
    for hist in result.histories:
        gds = np.array([rec.gd for rec in hist])
        ums = np.array([rec.u_morse for rec in hist])
        idx = int(np.argmax(gds <= 2.0 * gds[-1]))
        at_conc.append(ums[idx])
        at_end.append(ums[-1])
    m_conc, m_end = float(np.mean(at_conc)), float(np.mean(at_end))
    _report(4, m_end < m_conc,
            f"U_M final {m_end:.5f} vs at concentration {m_conc:.5f}")


def test_criterion_05_large_tau_hurts_gd(base):
    """Sweeping tau over eight decades with the Morse kernel on the convex
    front at least doubles mean GD at the top of the range."""
    config = ExperimentConfig(
        problem_name="lame", problem_params={"gamma": 0.25}, d=10,
        solver=SolverConfig(potential=MORSE), runs=5, metrics_every=100,
        out_dir=base / "tau_sweep", reference_cache=base / "cache",
        make_figures=False, sweep_axis="tau",
        sweep_values=[0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
    )
    tables = run_sweep(config)
    gds = [t.rows[0].gd for t in tables]
    ratio = gds[-1] / gds[0]
    _report(5, ratio >= 2.0,
            "GD by tau: " + " ".join(f"{v:.3g}" for v in gds)
            + f" ratio={ratio:.1f}x (need >= 2)")


def test_criterion_06_consensus_laplace_limit():
    """With alpha = 1e6 the consensus point lands on the scalarized argmin
    particle, and constant shifts of the scalarized values change nothing."""
    rng = np.random.default_rng(20250819)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 200))
        d = int(rng.integers(2, 20))
        X = rng.normal(scale=rng.uniform(0.5, 50.0), size=(n, d))
        w = rng.dirichlet(np.ones(2))
        while True:
            G = rng.uniform(0.0, 2.0, size=(n, 2))
            scal = chebyshev_matrix(G, w[None, :])[0]
            gaps = np.diff(np.sort(scal))
            if gaps.size and gaps.min() >= 1e-4:
                break
        y = consensus_point(X, G, w, 1e6)
        scale = np.linalg.norm(X, axis=1).max()
        worst = max(worst, np.linalg.norm(y - X[np.argmin(scal)]) / scale)
    shift_exact = True
    w10 = np.array([1.0, 0.0])
    for _ in range(100):
        n = int(rng.integers(3, 50))
        X = rng.normal(size=(n, 4))
        g1 = rng.integers(256, 8193, size=n) / 1024.0
        G = np.column_stack([g1, np.zeros(n)])
        Gs = np.column_stack([g1 + 6.25, np.zeros(n)])
        a = consensus_point(X, G, w10, 1e6)
        b = consensus_point(X, Gs, w10, 1e6)
        shift_exact = shift_exact and bool(np.array_equal(a, b))
    ok = worst <= 1e-6 and shift_exact
    _report(6, ok, f"max argmin distance {worst:.2e} of position scale "
                   f"(need <= 1e-6), shift-invariance exact: {shift_exact}")


def test_criterion_07_potential_gradient_oracles():
    """Central finite differences confirm every potential gradient at
    relative tolerance 1e-5, and the gradient at the origin is exactly 0."""
    specs = [
        PotentialSpec("riesz", m=2, s=1.0),
        PotentialSpec("riesz", m=2, s=2.0),
        PotentialSpec("newtonian", m=2),
        PotentialSpec("newtonian", m=3),
        PotentialSpec("morse", m=2, morse_c=20.0),
        PotentialSpec("morse", m=3, morse_c=5.0),
    ]
    rng = np.random.default_rng(777)
    worst = 0.0
    for spec in specs:
        for _ in range(100):
            direction = rng.normal(size=spec.m)
            direction /= np.linalg.norm(direction)
            z = direction * rng.uniform(0.01, 10.0)
            grad = potential_gradient(spec, z)
            h = 1e-6 * max(1.0, np.linalg.norm(z))
            fd = np.array([
                (potential_value(spec, z + h * e) -
                 potential_value(spec, z - h * e)) / (2 * h)
                for e in np.eye(spec.m)
            ])
            worst = max(worst,
                        np.linalg.norm(grad - fd) / np.linalg.norm(fd))
        zero = potential_gradient(spec, np.zeros(spec.m))
        assert np.array_equal(zero, np.zeros(spec.m))
    _report(7, worst <= 1e-5,
            f"max FD relative error {worst:.2e} (need <= 1e-5), "
            "gradient at origin exactly zero")


def _simplex_grid(m: int, levels: int) -> np.ndarray:
    if m == 2:
        t = np.linspace(0.0, 1.0, levels + 1)
        return np.column_stack([t, 1.0 - t])
    pts = [(i / levels, j / levels, (levels - i - j) / levels)
           for i in range(levels + 1) for j in range(levels + 1 - i)]
    return np.array(pts)


def test_criterion_08_projection_matches_grid_oracle():
    """The simplex projection agrees with a dense-grid nearest-point oracle
    to within the grid spacing, and projecting twice changes nothing."""
    rng = np.random.default_rng(4242)
    worst = 0.0
    for m, levels in ((2, 4000), (3, 200)):
        grid = _simplex_grid(m, levels)
        spacing = np.sqrt(2.0) / levels
        for _ in range(500):
            v = rng.normal(scale=rng.uniform(0.5, 5.0), size=m)
            w = project_simplex(v)
            d2 = np.sum((grid - v) ** 2, axis=1)
            best = grid[np.argmin(d2)]
            assert np.sum((w - v) ** 2) <= d2.min() + 1e-12
            worst = max(worst, np.linalg.norm(w - best) / spacing)
            np.testing.assert_array_equal(project_simplex(w), w)
    _report(8, worst <= 1.0,
            f"max oracle deviation {worst:.3f} grid spacings on 1000 inputs, "
            "idempotence exact")


def test_criterion_09_hypervolume_matches_monte_carlo():
    """Staircase hypervolume agrees with a 1e6-sample area estimate to
    within 1e-2 on 50 random bi-objective clouds."""
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 40))
        images = rng.uniform(0.0, 1.0, size=(n, 2))
        gstar = rng.uniform(1.05, 1.3, size=2)
        hv = hypervolume_2d(images, gstar)
        samples = rng.uniform(0.0, gstar, size=(10**6, 2))
        dominated = np.zeros(len(samples), dtype=bool)
        for p in images:
            dominated |= np.all(samples >= p, axis=1)
        mc = dominated.mean() * gstar[0] * gstar[1]
        worst = max(worst, abs(hv - mc))
    _report(9, worst <= 1e-2, f"max |staircase - MC| = {worst:.4f} "
                              "over 50 instances (need <= 1e-2)")


def test_criterion_10_reference_front_quality(base):
    """Riesz relaxation on the linear front: near-uniform gaps, energy no
    higher than the equispaced start, and M=2 pinned to the endpoints."""
    problem = make_problem("lame", d=10, gamma=1.0)
    front = generate_reference(problem, m_points=100,
                               cache_dir=base / "cache")
    gaps = np.linalg.norm(np.diff(front.points, axis=0), axis=1)
    gap_ratio = float(gaps.max() / gaps.min())
    chart = front_chart(problem)
    pot = PotentialSpec("riesz", m=2, s=2.0)
    start = chart.h(image_equispaced_coords(chart, 100))
    e0, e1 = energy(pot, start), energy(pot, front.points)
    two = generate_reference(problem, m_points=2, cache_dir=base / "cache")
    endpoints = np.array([[0.0, 1.0], [1.0, 0.0]])
    end_err = float(np.abs(two.points - endpoints).max())
    ok = gap_ratio <= 1.2 and e1 <= e0 and end_err <= 1e-3
    _report(10, ok, f"gap ratio {gap_ratio:.4f} (<= 1.2), energy "
                    f"{e1:.2f} vs start {e0:.2f}, M=2 endpoint error "
                    f"{end_err:.1e} (<= 1e-3)")


def _tree_digest(root: Path) -> dict:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_criterion_11_determinism_of_artifacts(base):
    """Repeating a run or sweep command with the same config reproduces
    every artifact byte for byte, figures included."""
    flags = ["--d", "4", "--n-particles", "12", "--k-max", "40",
             "--runs", "2", "--metrics-every", "10"]
    for tag in ("x", "y"):
        assert main(["run", "--out", str(base / f"det_run_{tag}")]
                    + flags) == 0
        assert main(["sweep", "--axis", "tau", "--values", "0,0.1",
                     "--potential", "morse",
                     "--out", str(base / f"det_sweep_{tag}")] + flags) == 0
    run_same = _tree_digest(base / "det_run_x") == \
        _tree_digest(base / "det_run_y")
    sweep_same = _tree_digest(base / "det_sweep_x") == \
        _tree_digest(base / "det_sweep_y")
    _report(11, run_same and sweep_same,
            f"run artifacts identical: {run_same}, "
            f"sweep artifacts identical: {sweep_same}")


def test_criterion_12_mini_batch_consistency(base, lame1_tau0):
    """A full-size batch replays the exact full-sum trajectory, and a
    one-tenth batch keeps mean final GD within 3x of the full-batch mean."""
    problem = make_problem("lame", d=10, gamma=1.0)
    rec_full, rec_n = TrajectoryRecorder(), TrajectoryRecorder()
    iterate(problem, SolverConfig(k_max=250, seed=5), rec_full)
    iterate(problem, SolverConfig(k_max=250, seed=5, batch_size=100), rec_n)
    bit_exact = all(
        np.array_equal(a.positions, b.positions)
        and np.array_equal(a.weights, b.weights)
        for a, b in zip(rec_full.history, rec_n.history)
    )
    small, _ = _batch(base, "lame1_bs10", "lame", {"gamma": 1.0},
                      runs=10, batch_size=10)
    full10 = float(np.mean([h[-1].gd for h in lame1_tau0[0].histories[:10]]))
    small10 = float(np.mean([h[-1].gd for h in small.histories]))
    band = small10 / full10
    ok = bit_exact and band <= 3.0
    _report(12, ok, f"full-batch replay bit-exact: {bit_exact}, "
                    f"GD batch=10 {small10:.3g} vs full {full10:.3g} "
                    f"({band:.3g}x, need <= 3)")
