"""Simulation lab for the continuum limit of the Ablowitz-Ladik lattice."""
from .conserved import (
    DriftReport,
    GeneratingFunctionContext,
    drift_report,
    g_functional,
    generating_function,
    h2,
    hamiltonian,
    mass,
    suppression_ratio,
)
from .diagnostics import (
    NormProfile,
    convergence_error,
    cross_term_magnitude,
    equicontinuity_profile,
    sign_flip_check,
    strichartz_norm,
    tightness_profile,
)
from .dynamics import EvolutionParams, Trajectory, al_rhs, evolve, free_propagator
from .errors import ALError, ConfigError
from .grid import (
    ContinuumField,
    LatticeField,
    SpectralCoefficients,
    forward_transform,
    inverse_transform,
    project_arc,
    project_smooth,
    reconstruct,
    sample_initial_data,
    split_fields,
)
from .nls import NlsState, duhamel_residual, nls_solve, schrodinger_group
from .profiles import GaussianProfile

__version__ = "0.1.0"
