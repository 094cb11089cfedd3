"""
Physical constants, atom parameters and apparatus geometry.

All quantities are SI: tesla, metres, seconds, amperes, radians. The
electron gyromagnetic ratio is stored signed (negative); formulas that need
its magnitude take ``abs(atom.gamma_e)`` explicitly.
"""

import math
from typing import Any, Dict, Optional, Tuple

import structlog
from pydantic import BaseModel, Field

from .errors import DomainError

logger = structlog.get_logger(__name__)

MU0 = 4.0e-7 * math.pi  # vacuum permeability, T·m/A
A0 = 5.29177210903e-11  # Bohr radius, m
HBAR = 1.054571817e-34  # J·s

# Top-hat torque average, in units of mu0/(pi R^3)
TOPHAT_TORQUE_KAPPA = 5.0 / 16.0

# Mean co-quantum polar angle under the heart-shaped distribution
THETA_N_MEAN = 5.0 * math.pi / 8.0


class AtomParams(BaseModel):
    """Constants of the modeled atom. Immutable."""
    model_config = {"frozen": True}

    gamma_e: float = Field(lt=0.0, description="electron gyromagnetic ratio, rad·Hz/T")
    gamma_n: float = Field(gt=0.0, description="nuclear gyromagnetic ratio, rad·Hz/T")
    mu_e: float = Field(ge=0.0, description="electron moment magnitude, J/T")
    mu_n: float = Field(ge=0.0, description="nuclear moment magnitude, J/T")
    radius: float = Field(gt=0.0, description="van der Waals radius, m")
    b_n: float = Field(ge=0.0, description="field of the nucleus at the electron, T")
    b_e: float = Field(ge=0.0, description="field of the electron at the nucleus, T")


class ApparatusParams(BaseModel):
    """Geometry and fields of the inner rotation chamber. Immutable."""
    model_config = {"frozen": True}

    z_a: float = Field(1.05e-4, gt=0.0, description="beam-wire distance, m")
    v: float = Field(800.0, gt=0.0, description="most likely atom speed, m/s")
    b_r: float = Field(0.42e-4, gt=0.0, description="remnant fringe field, T")
    flight_path: float = Field(16.3e-3, gt=0.0, description="inner-chamber path length, m")
    current: float = Field(0.1, gt=0.0, description="wire current, A")
    i_min: float = Field(0.01, gt=0.0, description="lowest scanned current, A")
    i_max: float = Field(0.5, gt=0.0, description="highest scanned current, A")

    @property
    def flight_time(self) -> float:
        return self.flight_path / self.v


def internal_fields(atom: AtomParams, kappa: float = TOPHAT_TORQUE_KAPPA) -> Tuple[float, float]:
    """
    Internal fields each moment produces at the other.

    Args:
        atom: atom whose moments and radius are used
        kappa: coefficient in units of mu0/(pi R^3)

    Returns:
        (b_n, b_e) in tesla
    """
    if atom.radius <= 0.0:
        raise DomainError("radius must be positive", {"radius": atom.radius})
    if kappa <= 0.0:
        raise DomainError("kappa must be positive", {"kappa": kappa})
    prefactor = kappa * MU0 / (math.pi * atom.radius ** 3)
    return prefactor * atom.mu_n, prefactor * atom.mu_e


def potassium39(kappa: float = TOPHAT_TORQUE_KAPPA) -> AtomParams:
    """Potassium-39 constants with internal fields for the given kappa."""
    base = AtomParams.model_construct(
        gamma_e=-1.761e11,
        gamma_n=1.250e7,
        mu_e=9.285e-24,
        mu_n=1.977e-27,
        radius=2.75e-10,
        b_n=0.0,
        b_e=0.0,
    )
    b_n, b_e = internal_fields(base, kappa)
    return AtomParams(**{**base.model_dump(), "b_n": b_n, "b_e": b_e})


def with_overrides(atom: AtomParams, overrides: Optional[Dict[str, Any]] = None,
                   kappa: float = TOPHAT_TORQUE_KAPPA) -> AtomParams:
    """
    Apply field overrides to an atom.

    Internal fields are recomputed from the (possibly overridden) moments and
    radius unless b_n or b_e are themselves overridden.
    """
    overrides = dict(overrides or {})
    if not overrides:
        return atom
    values = {**atom.model_dump(), **overrides}
    draft = AtomParams.model_construct(**values)
    b_n, b_e = internal_fields(draft, kappa)
    if "b_n" not in overrides:
        values["b_n"] = b_n
    if "b_e" not in overrides:
        values["b_e"] = b_e
    updated = AtomParams(**values)
    logger.debug("Applied atom overrides", keys=sorted(overrides))
    return updated


def frisch_segre(overrides: Optional[Dict[str, Any]] = None) -> ApparatusParams:
    """Frisch–Segrè inner rotation chamber, with optional field overrides."""
    return ApparatusParams(**(overrides or {}))
