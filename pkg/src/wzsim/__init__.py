"""State-vector simulation of discretized Schrodinger dynamics.

Many-body wavefunctions on a uniform spatial grid, split-operator time
evolution with finite-difference or momentum-space kinetic factors,
Coulomb potential diagonals, and synthesis of diagonal phase circuits.
"""

__version__ = "0.1.0"

from .analytic import (
    BoxSeriesSpec,
    box_exact_density,
    dense_evolution_oracle,
    loglog_slope,
    rmse,
    yb_error,
)
from .circuits import (
    Circuit,
    Gate,
    circuit_from_text,
    circuit_to_text,
    circuit_unitary,
    count_kinetic_gates,
    synthesize_diagonal,
)
from .errors import NormDriftError, ResourceLimitError, ValidationError
from .evolution import (
    EvolutionPlan,
    EvolutionReport,
    evolve,
    prepare_operators,
    sample_configurations,
    step,
)
from .grid import (
    GridSpec,
    IndexCodec,
    ParticleSpec,
    StateVector,
    build_grid,
    cell_center,
    density,
    encode_state,
    marginal_density,
)
from .kinetic import (
    apply_kinetic_spectral,
    apply_kinetic_trotter,
    derivative_matrix,
    fourier_conjugation_diagnostic,
    momentum_matrix,
    trotter_coupling_block,
    trotter_factor_matrix,
)
from .potential import (
    DiagonalOperator,
    antidiagonal_fold,
    antidiagonal_symmetry_check,
    apply_diagonal_phase,
    build_coulomb_diagonal,
    composite_potential,
    level_spacing,
    potential_bounds,
    quantize_levels,
    wall_potential,
)

__all__ = [
    "BoxSeriesSpec",
    "Circuit",
    "DiagonalOperator",
    "EvolutionPlan",
    "EvolutionReport",
    "Gate",
    "GridSpec",
    "IndexCodec",
    "NormDriftError",
    "ParticleSpec",
    "ResourceLimitError",
    "StateVector",
    "ValidationError",
    "antidiagonal_fold",
    "antidiagonal_symmetry_check",
    "apply_diagonal_phase",
    "apply_kinetic_spectral",
    "apply_kinetic_trotter",
    "box_exact_density",
    "build_coulomb_diagonal",
    "build_grid",
    "cell_center",
    "circuit_from_text",
    "circuit_to_text",
    "circuit_unitary",
    "composite_potential",
    "count_kinetic_gates",
    "dense_evolution_oracle",
    "density",
    "derivative_matrix",
    "encode_state",
    "evolve",
    "fourier_conjugation_diagnostic",
    "level_spacing",
    "loglog_slope",
    "marginal_density",
    "momentum_matrix",
    "potential_bounds",
    "prepare_operators",
    "quantize_levels",
    "rmse",
    "sample_configurations",
    "step",
    "synthesize_diagonal",
    "trotter_coupling_block",
    "trotter_factor_matrix",
    "wall_potential",
    "yb_error",
]
