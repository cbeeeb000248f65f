"""Experiment orchestration: multi-run batches, sweeps, summaries, files.

An experiment executes R independent runs with seeds base..base+R-1,
persists per-run metric histories and final states, and reports a summary
row of final-metric means.  Every output byte is a function of the
configuration, so repeated invocations reproduce files exactly.
"""

from __future__ import annotations

import configparser
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import plotting
from .dynamics import NumericalBlowupError, SolverConfig, iterate
from .metrics import (
    MetricsCollector,
    MetricsRecord,
    ReferenceFront,
    default_reference_point,
    minimizer_map,
    read_records_csv,
    write_records_csv,
)
from .objectives import ObjectiveProblem, make_problem
from .potentials import PotentialSpec
from .reference import generate_reference

logger = logging.getLogger("amcbo")

SWEEP_AXES = ("tau", "sigma", "d", "N", "batch_size")

SUMMARY_COLUMNS = ("problem", "scenario", "runs", "completed", "seed_base",
                   "gd", "u_riesz", "u_newton", "u_morse", "hv", "igd")


@dataclass
class ExperimentConfig:
    """Everything a batch of runs needs, including where to write."""

    problem_name: str = "lame"
    problem_params: dict = field(default_factory=dict)
    d: int = 10
    solver: SolverConfig = field(default_factory=SolverConfig)
    runs: int = 25
    seed_base: int = 0
    metrics_every: int = 10
    out_dir: Path = Path("amcbo_out")
    reference_m: int = 100
    reference_cache: Path | None = None
    gstar: tuple[float, ...] | None = None
    sweep_axis: str | None = None
    sweep_values: list[float] | None = None
    make_figures: bool = True
    mean_field: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("need at least one run")
        if self.metrics_every < 1:
            raise ValueError("metrics cadence must be positive")
        self.out_dir = Path(self.out_dir)
        if self.sweep_values is not None and not all(
            np.isfinite(v) for v in self.sweep_values
        ):
            raise ValueError("sweep values must be finite")

    def problem(self) -> ObjectiveProblem:
        return make_problem(self.problem_name, d=self.d, **self.problem_params)

    def scenario(self) -> str:
        if self.solver.tau == 0 or self.solver.potential is None:
            return "none"
        return f"{self.solver.potential.kind},tau={self.solver.tau:g}"


@dataclass
class SummaryRow:
    problem: str
    scenario: str
    runs: int
    completed: int
    seed_base: int
    gd: float
    u_riesz: float
    u_newton: float
    u_morse: float
    hv: float
    igd: float


@dataclass
class SummaryTable:
    rows: list[SummaryRow]

    def write_csv(self, path: Path) -> None:
        lines = [",".join(SUMMARY_COLUMNS)]
        for r in self.rows:
            lines.append(",".join([
                r.problem, r.scenario, str(r.runs), str(r.completed),
                str(r.seed_base), repr(float(r.gd)), repr(float(r.u_riesz)),
                repr(float(r.u_newton)), repr(float(r.u_morse)),
                repr(float(r.hv)), repr(float(r.igd)),
            ]))
        Path(path).write_text("\n".join(lines) + "\n")


def format_table(table: SummaryTable) -> str:
    """Aligned text rendering of a summary, one row per scenario."""
    headers = ("problem", "scenario", "R", "GD", "U_R", "U_N", "U_M", "S", "IGD")
    rows = []
    for r in table.rows:
        rows.append((
            r.problem, r.scenario, f"{r.completed}/{r.runs}",
            f"{r.gd:.2e}", f"{r.u_riesz:.2e}", f"{r.u_newton:.2e}",
            f"{r.u_morse:.2e}", f"{r.hv:.2e}", f"{r.igd:.2e}",
        ))
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for row in rows:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(out)


@dataclass
class ExperimentResult:
    """In-memory counterpart of an experiment's on-disk artifacts."""

    config: ExperimentConfig
    problem: ObjectiveProblem
    reference: ReferenceFront
    gstar: np.ndarray
    histories: list[list[MetricsRecord]]
    finals: list[tuple[np.ndarray, np.ndarray] | None]
    statuses: list[dict]
    summary: SummaryTable

    @property
    def completed(self) -> list[int]:
        return [i for i, s in enumerate(self.statuses) if s["status"] == "ok"]


@dataclass
class SweepData:
    """Per-value summaries of a parameter sweep."""

    axis: str
    values: list[float]
    tables: list[SummaryTable]
    out_dir: Path


def _problem_label(problem: ObjectiveProblem) -> str:
    params = " ".join(f"{k}={v:g}" for k, v in sorted(problem.params.items()))
    return f"{problem.name} {params}".strip()


def _summarize(config: ExperimentConfig, problem: ObjectiveProblem,
               histories, statuses) -> SummaryTable:
    finals = [histories[i][-1] for i, s in enumerate(statuses)
              if s["status"] == "ok" and histories[i]]
    if finals:
        mean = lambda f: float(np.mean([f(rec) for rec in finals]))
    else:
        mean = lambda f: float("nan")
    row = SummaryRow(
        problem=_problem_label(problem),
        scenario=config.scenario(),
        runs=config.runs,
        completed=sum(1 for s in statuses if s["status"] == "ok"),
        seed_base=config.seed_base,
        gd=mean(lambda r: r.gd),
        u_riesz=mean(lambda r: r.u_riesz),
        u_newton=mean(lambda r: r.u_newton),
        u_morse=mean(lambda r: r.u_morse),
        hv=mean(lambda r: r.hypervolume),
        igd=mean(lambda r: r.igd),
    )
    return SummaryTable(rows=[row])


def _solver_manifest(solver: SolverConfig) -> dict:
    pot = solver.potential
    return {
        "lambda": solver.lam,
        "sigma": solver.sigma,
        "alpha": solver.alpha,
        "tau": solver.tau,
        "dt": solver.dt,
        "n_particles": solver.n_particles,
        "k_max": solver.k_max,
        "diffusion": solver.diffusion,
        "potential": None if pot is None else {
            "kind": pot.kind, "m": pot.m, "s": pot.s, "morse_c": pot.morse_c,
        },
        "batch_size": solver.batch_size,
        "box_projection": solver.box_projection,
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the batch, persist everything, and return the results.

    Blown-up runs are recorded with their failure iteration and excluded
    from the summary means.
    """
    problem = config.problem()
    config.solver.validate_for(problem)
    out = config.out_dir
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    cache_dir = config.reference_cache if config.reference_cache is not None else out
    reference = generate_reference(problem, config.reference_m, cache_dir=cache_dir)
    gstar = (np.asarray(config.gstar, dtype=float) if config.gstar is not None
             else default_reference_point(reference))
    minimizer = minimizer_map(problem) if config.mean_field else None

    histories: list[list[MetricsRecord]] = []
    finals: list[tuple[np.ndarray, np.ndarray] | None] = []
    statuses: list[dict] = []
    for r in range(config.runs):
        solver = replace(config.solver, seed=config.seed_base + r)
        collector = MetricsCollector(
            problem, reference, gstar=gstar, every=config.metrics_every,
            k_final=solver.k_max, minimizer=minimizer,
        )
        try:
            final = iterate(problem, solver, collector)
            statuses.append({"seed": solver.seed, "status": "ok"})
            finals.append((problem.evaluate_batch(final.positions),
                           final.weights.copy()))
        except NumericalBlowupError as exc:
            logger.warning("run %d blew up at iteration %s", r, exc.iteration)
            statuses.append({"seed": solver.seed, "status": "blowup",
                             "iteration": exc.iteration})
            finals.append(None)
        histories.append(collector.records)
        write_records_csv(runs_dir / f"run_{r:03d}_metrics.csv", collector.records)
        if finals[-1] is not None:
            images, weights = finals[-1]
            np.savetxt(runs_dir / f"run_{r:03d}_final_images.csv", images,
                       delimiter=",", fmt="%.17g",
                       header=",".join(f"g{j + 1}" for j in range(problem.m)),
                       comments="")
            np.savetxt(runs_dir / f"run_{r:03d}_final_weights.csv", weights,
                       delimiter=",", fmt="%.17g",
                       header=",".join(f"w{j + 1}" for j in range(problem.m)),
                       comments="")
        logger.info("run %d/%d done (%s)", r + 1, config.runs, statuses[-1]["status"])

    summary = _summarize(config, problem, histories, statuses)
    summary.write_csv(out / "summary.csv")

    failures = sum(1 for s in statuses if s["status"] != "ok")
    manifest = {
        "problem": {"name": problem.name, "d": problem.d, "m": problem.m,
                    "params": problem.params},
        "solver": _solver_manifest(config.solver),
        "runs": config.runs,
        "seed_base": config.seed_base,
        "seeds": [config.seed_base + r for r in range(config.runs)],
        "metrics_every": config.metrics_every,
        "reference_m": config.reference_m,
        "gstar": [float(v) for v in gstar],
        "scenario": config.scenario(),
        "run_status": statuses,
        "failures": failures,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    result = ExperimentResult(config, problem, reference, gstar, histories,
                              finals, statuses, summary)
    if config.make_figures:
        emit_plot_data(result, "metrics_vs_iteration")
        emit_plot_data(result, "front_scatter")
        emit_plot_data(result, "weight_histogram")
    return result


def _mean_records(result: ExperimentResult) -> list[MetricsRecord]:
    idx = result.completed
    if not idx:
        return []
    per_iter = zip(*(result.histories[i] for i in idx))
    out = []
    for group in per_iter:
        ks = {rec.iteration for rec in group}
        if len(ks) != 1:
            raise ValueError("run histories recorded at mismatched iterations")
        mf_vals = [rec.mf_err for rec in group]
        out.append(MetricsRecord(
            iteration=group[0].iteration,
            gd=float(np.mean([rec.gd for rec in group])),
            igd=float(np.mean([rec.igd for rec in group])),
            hypervolume=float(np.mean([rec.hypervolume for rec in group])),
            u_riesz=float(np.mean([rec.u_riesz for rec in group])),
            u_newton=float(np.mean([rec.u_newton for rec in group])),
            u_morse=float(np.mean([rec.u_morse for rec in group])),
            mf_err=(float(np.mean([v for v in mf_vals]))
                    if all(v is not None for v in mf_vals) else None),
            oob_frac=float(np.mean([rec.oob_frac for rec in group])),
        ))
    return out


def emit_plot_data(result, kind: str) -> list[Path]:
    """Write the delimited data behind one figure kind plus its rendering."""
    if kind == "metric_vs_sweep":
        if not isinstance(result, SweepData):
            raise ValueError("metric_vs_sweep needs sweep results")
        return _emit_sweep(result)
    if not isinstance(result, ExperimentResult):
        raise ValueError(f"plot kind {kind!r} needs experiment results")
    out = result.config.out_dir
    if kind == "metrics_vs_iteration":
        mean_recs = _mean_records(result)
        csv_path = out / "metrics_mean.csv"
        write_records_csv(csv_path, mean_recs)
        png = plotting.metrics_history_figure(
            mean_recs, out / "metrics_vs_iteration.png",
            title=f"{_problem_label(result.problem)} [{result.config.scenario()}]")
        return [csv_path, png]
    if kind == "front_scatter":
        idx = result.completed
        if not idx:
            raise ValueError("no completed run to plot")
        images = result.finals[idx[0]][0]
        csv_path = out / "front_scatter.csv"
        with csv_path.open("w") as fh:
            fh.write("set," + ",".join(f"g{j + 1}" for j in range(result.problem.m)) + "\n")
            for row in images:
                fh.write("particle," + ",".join(repr(float(v)) for v in row) + "\n")
            for row in result.reference.points:
                fh.write("reference," + ",".join(repr(float(v)) for v in row) + "\n")
        png = plotting.front_scatter_figure(
            images, result.reference.points, out / "front_scatter.png",
            title=_problem_label(result.problem))
        return [csv_path, png]
    if kind == "weight_histogram":
        idx = result.completed
        if not idx:
            raise ValueError("no completed run to plot")
        weights = result.finals[idx[0]][1]
        first = weights[:, 0]
        counts, edges = np.histogram(first, bins=np.linspace(0.0, 1.0, 21))
        csv_path = out / "weight_histogram.csv"
        with csv_path.open("w") as fh:
            fh.write("bin_left,bin_right,count\n")
            for i, c in enumerate(counts):
                fh.write(f"{repr(float(edges[i]))},{repr(float(edges[i + 1]))},{int(c)}\n")
        png = plotting.weight_histogram_figure(
            first, out / "weight_histogram.png",
            title=_problem_label(result.problem))
        return [csv_path, png]
    raise ValueError(f"unknown plot kind {kind!r}")


def _apply_sweep_value(config: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    sub = replace(config, sweep_axis=None, sweep_values=None,
                  out_dir=config.out_dir / f"{axis}_{value:g}",
                  reference_cache=(config.reference_cache
                                   if config.reference_cache is not None
                                   else config.out_dir),
                  problem_params=dict(config.problem_params))
    if axis == "tau":
        sub.solver = replace(config.solver, tau=float(value))
    elif axis == "sigma":
        sub.solver = replace(config.solver, sigma=float(value))
    elif axis == "d":
        sub.solver = replace(config.solver)
        sub.d = int(value)
    elif axis == "N":
        n = int(value)
        bs = config.solver.batch_size
        sub.solver = replace(config.solver, n_particles=n,
                             batch_size=min(bs, n) if bs is not None else None)
    elif axis == "batch_size":
        sub.solver = replace(config.solver, batch_size=int(value))
    else:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    return sub


def run_sweep(config: ExperimentConfig) -> list[SummaryTable]:
    """One experiment per sweep value, plus a long-format CSV and figure."""
    if config.sweep_axis is None or not config.sweep_values:
        raise ValueError("sweep requires an axis and a non-empty value list")
    if config.sweep_axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {config.sweep_axis!r}; choose from {SWEEP_AXES}")
    tables = []
    for value in config.sweep_values:
        sub = _apply_sweep_value(config, config.sweep_axis, value)
        logger.info("sweep %s = %g", config.sweep_axis, value)
        tables.append(run_experiment(sub).summary)
    data = SweepData(config.sweep_axis, list(config.sweep_values), tables,
                     config.out_dir)
    emit_plot_data(data, "metric_vs_sweep")
    return tables


def _emit_sweep(data: SweepData) -> list[Path]:
    out = Path(data.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep_long.csv"
    metric_names = ("gd", "igd", "hv", "u_riesz", "u_newton", "u_morse")
    with csv_path.open("w") as fh:
        fh.write("axis,value,metric,mean\n")
        for value, table in zip(data.values, data.tables):
            row = table.rows[0]
            for name in metric_names:
                fh.write(f"{data.axis},{repr(float(value))},{name},"
                         f"{repr(float(getattr(row, name)))}\n")
    series = {
        "GD": [t.rows[0].gd for t in data.tables],
        "IGD": [t.rows[0].igd for t in data.tables],
    }
    png = plotting.sweep_figure(data.axis, data.values, series,
                                out / "metric_vs_sweep.png")
    return [csv_path, png]


def recompute_summary(out_dir: Path) -> SummaryTable:
    """Rebuild the summary table from persisted per-run metric files."""
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text())
    run_files = sorted((out / "runs").glob("run_*_metrics.csv"))
    if not run_files:
        raise FileNotFoundError(f"no persisted runs under {out}")
    finals = []
    for i, path in enumerate(run_files):
        status = manifest["run_status"][i]["status"]
        records = read_records_csv(path)
        if status == "ok" and records:
            finals.append(records[-1])
    mean = (lambda f: float(np.mean([f(rec) for rec in finals]))) if finals \
        else (lambda f: float("nan"))
    params = " ".join(f"{k}={v:g}" for k, v in
                      sorted(manifest["problem"]["params"].items()))
    row = SummaryRow(
        problem=f"{manifest['problem']['name']} {params}".strip(),
        scenario=manifest["scenario"],
        runs=manifest["runs"],
        completed=len(finals),
        seed_base=manifest["seed_base"],
        gd=mean(lambda r: r.gd),
        u_riesz=mean(lambda r: r.u_riesz),
        u_newton=mean(lambda r: r.u_newton),
        u_morse=mean(lambda r: r.u_morse),
        hv=mean(lambda r: r.hypervolume),
        igd=mean(lambda r: r.igd),
    )
    return SummaryTable(rows=[row])


# Config-file handling: INI sections [problem], [solver], [experiment], [sweep];
# command-line flags override file values.

_SOLVER_KEYS = {
    "lambda": ("lam", float), "lam": ("lam", float), "sigma": ("sigma", float),
    "alpha": ("alpha", float), "tau": ("tau", float), "dt": ("dt", float),
    "n_particles": ("n_particles", int), "k_max": ("k_max", int),
    "diffusion": ("diffusion", str), "potential": ("potential", str),
    "morse_c": ("morse_c", float), "batch_size": ("batch_size", int),
    "box_projection": ("box_projection", None),
}

_EXPERIMENT_KEYS = {
    "runs": ("runs", int), "seed": ("seed", int),
    "metrics_every": ("metrics_every", int), "out": ("out", str),
    "reference_m": ("reference_m", int), "figures": ("figures", None),
    "mean_field": ("mean_field", None),
    "gstar": ("gstar", str),
}


def load_config_file(path: Path) -> dict:
    """Flatten an INI config into the option namespace the CLI uses."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    opts: dict = {}
    if parser.has_section("problem"):
        sec = parser["problem"]
        if "name" in sec:
            opts["problem"] = sec["name"]
        for key in ("gamma", "k", "s"):
            if key in sec:
                opts[key] = sec.getfloat(key)
        if "d" in sec:
            opts["d"] = sec.getint("d")
    if parser.has_section("solver"):
        sec = parser["solver"]
        for key, (dest, conv) in _SOLVER_KEYS.items():
            if key in sec:
                opts[dest] = sec.getboolean(key) if conv is None else conv(sec[key])
    if parser.has_section("experiment"):
        sec = parser["experiment"]
        for key, (dest, conv) in _EXPERIMENT_KEYS.items():
            if key in sec:
                opts[dest] = sec.getboolean(key) if conv is None else conv(sec[key])
    if parser.has_section("sweep"):
        sec = parser["sweep"]
        if "axis" in sec:
            opts["axis"] = sec["axis"]
        if "values" in sec:
            opts["values"] = [float(v) for v in sec["values"].split(",") if v.strip()]
    return opts


def build_experiment_config(opts: dict) -> ExperimentConfig:
    """Resolve a flat option namespace against the defaults."""
    problem_name = opts.get("problem", "lame")
    params = {}
    for key in ("gamma", "k", "s"):
        if opts.get(key) is not None:
            params[key] = float(opts[key])
    pot_name = opts.get("potential", "none") or "none"
    potential = None
    if pot_name != "none":
        potential = PotentialSpec(pot_name, m=2,
                                  morse_c=float(opts.get("morse_c") or 20.0))
    solver_kwargs = dict(
        lam=opts.get("lam"), sigma=opts.get("sigma"), alpha=opts.get("alpha"),
        tau=opts.get("tau"), dt=opts.get("dt"),
        n_particles=opts.get("n_particles"), k_max=opts.get("k_max"),
        diffusion=opts.get("diffusion"), batch_size=opts.get("batch_size"),
        box_projection=opts.get("box_projection"),
    )
    solver_kwargs = {k: v for k, v in solver_kwargs.items() if v is not None}
    solver = SolverConfig(potential=potential, **solver_kwargs)
    gstar = opts.get("gstar")
    if isinstance(gstar, str):
        gstar = tuple(float(v) for v in gstar.split(","))
    config_kwargs = dict(
        problem_name=problem_name,
        problem_params=params,
        solver=solver,
        gstar=gstar,
        sweep_axis=opts.get("axis"),
        sweep_values=opts.get("values"),
    )
    for key, dest in (("d", "d"), ("runs", "runs"), ("seed", "seed_base"),
                      ("metrics_every", "metrics_every"), ("out", "out_dir"),
                      ("reference_m", "reference_m"),
                      ("figures", "make_figures"), ("mean_field", "mean_field")):
        if opts.get(key) is not None:
            config_kwargs[dest] = opts[key]
    return ExperimentConfig(**config_kwargs)
