"""
Checks run by the quantum verifier.

Identity checks compare two computation paths to rounding precision;
statistical checks compare Monte Carlo estimates against closed forms within
a number of standard errors.
"""

import math
from typing import Any, Dict, Sequence

import numpy as np
import structlog

from ..ensemble import density_operator, isotropic, heart, wavefunction
from ..flipmodel import adiabaticity, coefficient_form, coefficients, log_grid
from .core import CheckLevel, CheckResult, CheckStrategy
from .quantum import (
    entangle_mc,
    two_stage_mc,
    two_stage_probability,
    uncertainty_grid,
    x_split_mc,
)

logger = structlog.get_logger(__name__)

# Monte Carlo checks pass when the estimate lies within this many standard errors
DEFAULT_SIGMAS = 5.0


class UncertaintyEqualityCheck(CheckStrategy):
    """Sequential-measurement equality holds on a grid and the inequality is never violated."""

    def __init__(self, points: int = 100, tolerance: float = 1e-12):
        self.points = points
        self.tolerance = tolerance

    def check(self, context: Dict[str, Any]) -> CheckResult:
        records = uncertainty_grid(self.points)
        worst = max(record.residual for record in records)
        violations = sum(1 for record in records if not record.inequality_holds)
        errors = []
        if worst > self.tolerance:
            errors.append(f"Equality residual {worst:.3e} exceeds {self.tolerance:.0e}")
        if violations:
            errors.append(f"Inequality violated at {violations} grid points")
        return CheckResult(self.name, not errors, CheckLevel.IDENTITY, errors,
                           {"max_residual": worst, "grid_points": len(records)})


class TwoStageClosedFormCheck(CheckStrategy):
    """Second-stage probability ratio equals its closed form on [0, pi - 1e-3]."""

    def __init__(self, points: int = 200, tolerance: float = 1e-12):
        self.points = points
        self.tolerance = tolerance

    def check(self, context: Dict[str, Any]) -> CheckResult:
        worst = 0.0
        for alpha in np.linspace(0.0, math.pi - 1e-3, self.points):
            result = two_stage_probability(float(alpha))
            worst = max(worst, abs(result.ratio - result.ratio_closed_form))
        passed = worst <= self.tolerance
        errors = [] if passed else [f"Ratio mismatch {worst:.3e}"]
        return CheckResult(self.name, passed, CheckLevel.IDENTITY, errors, {"max_mismatch": worst})


class DensityFactorizationCheck(CheckStrategy):
    """Pre-averaging density operator equals the outer product of the wave function."""

    def __init__(self, points: int = 25, tolerance: float = 1e-12):
        self.points = points
        self.tolerance = tolerance

    def check(self, context: Dict[str, Any]) -> CheckResult:
        worst = 0.0
        for dist in (isotropic(), heart()):
            for theta in np.linspace(0.0, math.pi, self.points):
                for phi in np.linspace(0.0, 2.0 * math.pi, self.points, endpoint=False):
                    psi = np.array(wavefunction(float(theta), float(phi), dist))
                    rho = density_operator(float(theta), float(phi), dist).matrix
                    worst = max(worst, float(np.max(np.abs(rho - np.outer(psi, psi.conj())))))
        passed = worst <= self.tolerance
        errors = [] if passed else [f"Factorization mismatch {worst:.3e}"]
        return CheckResult(self.name, passed, CheckLevel.IDENTITY, errors, {"max_mismatch": worst})


class FlipParameterizationCheck(CheckStrategy):
    """Dimensionless and coefficient forms of W4 agree across the current range."""

    def __init__(self, points: int = 100, tolerance: float = 1e-6):
        self.points = points
        self.tolerance = tolerance

    def check(self, context: Dict[str, Any]) -> CheckResult:
        atom, apparatus = context.get("atom"), context.get("apparatus")
        coeffs = coefficients(atom, apparatus)
        worst = 0.0
        for current in log_grid(0.01, 0.5, self.points):
            params = adiabaticity(float(current), atom, apparatus)
            w4 = math.exp(-math.pi * math.sqrt(params.k0 ** 2 + params.k0 * params.k1)
                          - 0.5 * (math.pi * params.k1) ** 2 * params.f_r1)
            w4_coeff, _ = coefficient_form(float(current), coeffs)
            worst = max(worst, abs(w4 - w4_coeff) / max(w4, w4_coeff))
        passed = worst <= self.tolerance
        errors = [] if passed else [f"Relative mismatch {worst:.3e}"]
        return CheckResult(self.name, passed, CheckLevel.IDENTITY, errors, {"max_relative": worst})


class EntanglementCheck(CheckStrategy):
    """Every sampled pair collapses to opposite branches (same branch when correlated)."""

    def __init__(self, pairs: int = 100_000, correlated: bool = False):
        self.pairs = pairs
        self.correlated = correlated

    def check(self, context: Dict[str, Any]) -> CheckResult:
        summary = entangle_mc(self.pairs, context.get("seed", 0), self.correlated)
        passed = summary.prediction_holds_fraction == 1.0
        errors = [] if passed else [f"Pairing held for {summary.prediction_holds_fraction:.6f}"]
        return CheckResult(self.name, passed, CheckLevel.STATISTICAL, errors, summary.model_dump())


class XSplitCheck(CheckStrategy):
    """After a z collapse the x measurement splits evenly."""

    def __init__(self, samples: int = 200_000, sigmas: float = DEFAULT_SIGMAS):
        self.samples = samples
        self.sigmas = sigmas

    def check(self, context: Dict[str, Any]) -> CheckResult:
        errors = []
        metadata = {}
        for branch in (1, -1):
            estimate = x_split_mc(branch, self.samples, context.get("seed", 0))
            metadata[f"branch_{branch:+d}"] = estimate.model_dump()
            if not estimate.within(0.5, self.sigmas):
                errors.append(f"Branch {branch:+d}: {estimate.estimate:.5f} +- {estimate.stderr:.5f}")
        return CheckResult(self.name, not errors, CheckLevel.STATISTICAL, errors, metadata)


class TwoStageMonteCarloCheck(CheckStrategy):
    """Monte Carlo second-stage probabilities agree with the closed form."""

    def __init__(self, alphas: Sequence[float] = tuple(np.linspace(0.0, 11.0 * math.pi / 12.0, 12)),
                 samples: int = 200_000, sigmas: float = DEFAULT_SIGMAS):
        self.alphas = alphas
        self.samples = samples
        self.sigmas = sigmas

    def check(self, context: Dict[str, Any]) -> CheckResult:
        errors = []
        estimates = []
        for alpha in self.alphas:
            estimate = two_stage_mc(float(alpha), self.samples, context.get("seed", 0))
            estimates.append({"alpha": float(alpha), **estimate.model_dump()})
            if not estimate.within(estimate.analytic, self.sigmas):
                errors.append(f"alpha={alpha:.4f}: {estimate.estimate:.5f} vs {estimate.analytic:.5f}")
        return CheckResult(self.name, not errors, CheckLevel.STATISTICAL, errors,
                           {"estimates": estimates})
