"""Noise-induced landscape distortion for p=1 QAOA on constrained QUBOs."""

from .engine import (
    GateSchedule,
    OutcomeDistribution,
    apply_readout,
    build_schedule,
    cost_diagonal,
    energy_expectation,
    feasibility_fraction,
    ideal_distribution,
    noisy_distribution,
    sample_counts,
)
from .landscape import (
    LandscapeGrid,
    ParameterGrid,
    export_landscape,
    ingest_landscape,
    make_grid,
    scan_landscape,
)
from .metrics import (
    MetricsReport,
    approximation_ratio,
    build_report,
    landscape_span,
    lsc,
    lsc_decompose,
    optimal_parameter_shift,
    pearson_fidelity,
)
from .noise import NoiseSpec
from .optimize import OptimizationResult, optimize_parameters
from .qubo import (
    IsingHamiltonian,
    PortfolioInstance,
    QuboMatrix,
    brute_force_optimum,
    build_qubo,
    enumerate_feasible,
    generate_instance,
    qubo_energy,
    qubo_to_ising,
    random_search,
    simulated_annealing,
)
from .zne import ZneResult, propagate_std, richardson_extrapolate, run_zne

__version__ = "0.1.0"
