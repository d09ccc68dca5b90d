"""Solitary waves of the power-degenerate NLS.

Profiles by constrained minimization and shooting, identity verification,
spectral stability classification, and radial time evolution with virial
monitoring.
"""

from .asymptotics import DecayFit, OriginReport, fit_decay, origin_asymptotics
from .config import RunConfig, load_config, save_config
from .discretization import (Profile, RadialGrid, SectorOperator, assemble_operator,
                             build_grid, default_grading, gradient_energy,
                             weighted_inner, weighted_norm)
from .dynamics import EvolutionState, VirialTrace, evolve_and_trace, step
from .functionals import (IdentityReport, evaluate_identities, l2_scale, scaled_energy,
                          sphere_area)
from .ground_state import (MinimizerReport, ReconcileReport, ground_state,
                           minimize_weinstein, reconcile, shoot_profile)
from .model import (ModelParams, StabilityVerdict, classify_by_threshold, critical_power,
                    exists_window, mass_scaling_exponent, omega_rescale)
from .spectral import (SpectralReport, assemble_linearized, eigenpairs, morse_index,
                       slope_and_classify)

__version__ = "0.1.0"

__all__ = [
    "DecayFit", "OriginReport", "fit_decay", "origin_asymptotics",
    "RunConfig", "load_config", "save_config",
    "Profile", "RadialGrid", "SectorOperator", "assemble_operator", "build_grid",
    "default_grading", "gradient_energy", "weighted_inner", "weighted_norm",
    "EvolutionState", "VirialTrace", "evolve_and_trace", "step",
    "IdentityReport", "evaluate_identities", "l2_scale", "scaled_energy", "sphere_area",
    "MinimizerReport", "ReconcileReport", "ground_state", "minimize_weinstein",
    "reconcile", "shoot_profile",
    "ModelParams", "StabilityVerdict", "classify_by_threshold", "critical_power",
    "exists_window", "mass_scaling_exponent", "omega_rescale",
    "SpectralReport", "assemble_linearized", "eigenpairs", "morse_index",
    "slope_and_classify",
    "__version__",
]
