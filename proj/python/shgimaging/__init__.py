"""Second-harmonic internal-data imaging toolkit."""

from ._core import (
    AdmissibilityError,
    ConfigError,
    DataConditionError,
    Grid,
    Inclusion,
    SolverError,
    __version__,
    add_noise,
    boundary_bump_trace,
    internal_data,
    make_phantom,
    plane_wave_trace,
    polarize,
    run_config,
    solve_coupled,
    solve_one_way,
    validate_config,
)

__all__ = [
    "AdmissibilityError",
    "ConfigError",
    "DataConditionError",
    "Grid",
    "Inclusion",
    "SolverError",
    "__version__",
    "add_noise",
    "boundary_bump_trace",
    "internal_data",
    "make_phantom",
    "plane_wave_trace",
    "polarize",
    "run_config",
    "solve_coupled",
    "solve_one_way",
    "validate_config",
]
