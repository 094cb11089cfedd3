"""
Spin dynamics: equations of motion, collapse envelope, branching and the
two-level amplitude integrator.
"""

from .equations import (
    SpinState,
    DynamicsConfig,
    cqd_rhs,
    state_rates,
    branch,
    collapse_envelope,
    collapse_times,
    unit_vector,
)
from .integrator import SpinTrajectory, integrate_spin, integrate_ensemble
from .two_level import (
    AmplitudePair,
    integrate_two_level,
    amplitudes_from_angles,
    default_tau_max,
    majorana_tau_scale,
)

__all__ = [
    "SpinState",
    "DynamicsConfig",
    "cqd_rhs",
    "state_rates",
    "branch",
    "collapse_envelope",
    "collapse_times",
    "unit_vector",
    "SpinTrajectory",
    "integrate_spin",
    "integrate_ensemble",
    "AmplitudePair",
    "integrate_two_level",
    "amplitudes_from_angles",
    "default_tau_max",
    "majorana_tau_scale",
]
