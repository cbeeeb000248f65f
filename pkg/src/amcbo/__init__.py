"""Adaptive multi-objective consensus-based optimization.

A particle swarm solves many Chebyshev-scalarized sub-problems at once;
each particle carries its own weight vector, and an optional pairwise
interaction adapts the weights toward a well-spread Pareto front.
"""

from .dynamics import (
    NumericalBlowupError,
    SolverConfig,
    Swarm,
    TrajectoryRecorder,
    diffusion_matrix,
    iterate,
    sample_batch,
    step_positions,
    step_weights_2d,
    step_weights_general,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    SummaryTable,
    emit_plot_data,
    run_experiment,
    run_sweep,
)
from .metrics import (
    MetricsCollector,
    MetricsRecord,
    ReferenceFront,
    default_reference_point,
    gd,
    hypervolume_2d,
    igd,
    mean_field_error,
    minimizer_map,
)
from .objectives import (
    FrontChart,
    ObjectiveProblem,
    UnsupportedProblemError,
    dist_to_box,
    front_chart,
    make_problem,
)
from .potentials import PotentialSpec, energy, potential_gradient, potential_value, radial_derivative
from .reference import (
    DegenerateChartError,
    FrontFlowConfig,
    chart_jacobian,
    flow_in_simplex,
    flow_on_front,
    generate_reference,
    image_equispaced_coords,
)
from .scalarization import chebyshev, chebyshev_matrix, consensus_point, consensus_points
from .simplex import project_simplex, project_simplex_rows, uniform_weights

__version__ = "0.1.0"

__all__ = [
    "DegenerateChartError",
    "ExperimentConfig",
    "ExperimentResult",
    "FrontChart",
    "FrontFlowConfig",
    "MetricsCollector",
    "MetricsRecord",
    "NumericalBlowupError",
    "ObjectiveProblem",
    "PotentialSpec",
    "ReferenceFront",
    "SolverConfig",
    "SummaryTable",
    "Swarm",
    "TrajectoryRecorder",
    "UnsupportedProblemError",
    "chart_jacobian",
    "chebyshev",
    "chebyshev_matrix",
    "consensus_point",
    "consensus_points",
    "default_reference_point",
    "diffusion_matrix",
    "dist_to_box",
    "emit_plot_data",
    "energy",
    "flow_in_simplex",
    "flow_on_front",
    "front_chart",
    "gd",
    "generate_reference",
    "image_equispaced_coords",
    "hypervolume_2d",
    "igd",
    "iterate",
    "make_problem",
    "mean_field_error",
    "minimizer_map",
    "potential_gradient",
    "potential_value",
    "project_simplex",
    "project_simplex_rows",
    "radial_derivative",
    "run_experiment",
    "run_sweep",
    "sample_batch",
    "step_positions",
    "step_weights_2d",
    "step_weights_general",
    "uniform_weights",
]
