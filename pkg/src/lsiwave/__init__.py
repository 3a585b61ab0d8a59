"""Solitary waves of the three-component long wave-short wave interaction
system: construction, pseudospectral evolution and orbital-stability
diagnostics."""
from .dynamics import BlowUpError, EvolveConfig, evolve, rhs, step_ifrk4
from .functionals import (InvariantRecord, invariants, j_functional, j_functional_homogeneous,
                          j_gradient, lyapunov, pohozaev_residuals, pohozaev_terms,
                          profile_energy, scale_profile)
from .model import (AdmissibilityError, LsiState, PhysParams, SolitonProfile,
                    ground_state_profile, make_params, residual_cs1, solitary_state)
from .operators import (ConvergenceError, LinearizedOperator, constrained_rayleigh,
                        kernel_identities, quad_form_p, quad_form_q)
from .orbital import OrbitalFit, constraint_residuals, orbital_distance, optimal_phases
from .spectral import PeriodicGrid, default_grid

__version__ = "0.1.0"
