"""
Quantum-mechanics cross-checks: sequential measurements, entangled pairs and
two-stage tilted measurements, plus a check framework that runs them as a
suite.
"""

from .core import CheckLevel, CheckResult, CheckStrategy, VerificationReport, Verifier
from .quantum import (
    EntangledOutcome,
    EntangledPair,
    UNDETERMINED,
    entangle_mc,
    entangled_outcomes,
    second_axis,
    two_stage_cqd,
    two_stage_mc,
    two_stage_probability,
    two_stage_quadrature,
    two_stage_ratio_closed_form,
    uncertainty_grid,
    uncertainty_suite,
    x_split_after_z,
    x_split_mc,
)
from .setup import create_identity_verifier, create_quantum_verifier

__all__ = [
    "CheckLevel",
    "CheckResult",
    "CheckStrategy",
    "VerificationReport",
    "Verifier",
    "EntangledOutcome",
    "EntangledPair",
    "UNDETERMINED",
    "entangle_mc",
    "entangled_outcomes",
    "second_axis",
    "two_stage_cqd",
    "two_stage_mc",
    "two_stage_probability",
    "two_stage_quadrature",
    "two_stage_ratio_closed_form",
    "uncertainty_grid",
    "uncertainty_suite",
    "x_split_after_z",
    "x_split_mc",
    "create_identity_verifier",
    "create_quantum_verifier",
]
