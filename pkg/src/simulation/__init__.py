"""
Simulation Package

This package runs the Monte Carlo study of the naive and proposed
unique-customer estimators:
- Benchmark parameters and the scenario catalog
- Dirichlet perturbation of r and f, multinomial count draws and
  monitored customer draws
- Absolute percentage error summaries
- Scenario runs and one-parameter sweeps
"""

from .metrics import ErrorSummary, absolute_percentage_errors, mape, summarize_errors
from .runner import (
    SWEEP_AXES,
    ReplicationOutcome,
    ScenarioResult,
    SweepResult,
    run_replication,
    run_scenario,
    run_sweep,
)
from .sampling import (
    dirichlet_perturb_columns,
    dirichlet_perturb_frequencies,
    sample_counts,
    sample_dirichlet,
    sample_monitored_customers,
    sample_multinomial,
)
from .scenarios import (
    ScenarioConfig,
    benchmark_parameters,
    find_scenario,
    scenario_catalog,
    with_dependent_last_column,
)

__all__ = [
    "ErrorSummary",
    "absolute_percentage_errors",
    "mape",
    "summarize_errors",
    "SWEEP_AXES",
    "ReplicationOutcome",
    "ScenarioResult",
    "SweepResult",
    "run_replication",
    "run_scenario",
    "run_sweep",
    "dirichlet_perturb_columns",
    "dirichlet_perturb_frequencies",
    "sample_counts",
    "sample_dirichlet",
    "sample_monitored_customers",
    "sample_multinomial",
    "ScenarioConfig",
    "benchmark_parameters",
    "find_scenario",
    "scenario_catalog",
    "with_dependent_last_column",
]
