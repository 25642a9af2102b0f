from .config import ConfigError, ExperimentConfig, parse_model, parse_seed, parse_set
from .experiments import (
    DIAGNOSTICS,
    ExperimentError,
    ExperimentReport,
    diag_atoms,
    diag_mean_ell,
    diag_neg_moments,
    diag_recursion,
    diag_tilt_martingale,
    run_energy,
    run_kpz_experiment,
    run_rho_moment,
)
from .oracle import enumerate_oracle

__all__ = [
    "ConfigError",
    "DIAGNOSTICS",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentReport",
    "diag_atoms",
    "diag_mean_ell",
    "diag_neg_moments",
    "diag_recursion",
    "diag_tilt_martingale",
    "enumerate_oracle",
    "parse_model",
    "parse_seed",
    "parse_set",
    "run_energy",
    "run_kpz_experiment",
    "run_rho_moment",
]
