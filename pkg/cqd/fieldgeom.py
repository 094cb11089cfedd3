"""
Magnetic field of the inner rotation chamber.

Near the null point the field of the wire plus the remnant fringe field is a
quadrupole: B = (0, B_y, G v t) along the beam, with t = 0 at the null point.
"""

import math
from typing import Tuple

import numpy as np
import structlog
from pydantic import BaseModel

from .atomkit import MU0, ApparatusParams
from .errors import DomainError

logger = structlog.get_logger(__name__)


class ChamberField(BaseModel):
    """Quadrupole approximation at one wire current."""
    model_config = {"frozen": True}

    gradient: float  # T/m
    b_y: float  # T
    b_r_eff: float  # T
    current: float  # A
    z_a: float  # m


def corrected_remnant(b_r: float, b_n: float, theta_n: float) -> float:
    """Remnant field shifted by the mean longitudinal nuclear field."""
    return b_r + b_n * math.cos(theta_n)


def chamber_field(apparatus: ApparatusParams, b_r_eff: float) -> ChamberField:
    """
    Field gradient and transverse field at the apparatus current.

    Raises:
        DomainError: if the current is not positive
    """
    current = apparatus.current
    if current <= 0.0:
        raise DomainError("wire current must be positive", {"current": current})
    gradient = 2.0 * math.pi * b_r_eff ** 2 / (MU0 * current)
    return ChamberField(
        gradient=gradient,
        b_y=gradient * apparatus.z_a,
        b_r_eff=b_r_eff,
        current=current,
        z_a=apparatus.z_a,
    )


def field_at_current(apparatus: ApparatusParams, current: float, b_r_eff: float) -> ChamberField:
    return chamber_field(apparatus.model_copy(update={"current": current}), b_r_eff)


def quadrupole_at(field: ChamberField, t, v: float) -> Tuple[float, float, float]:
    """Field components (B_x, B_y, B_z) seen by an atom at time t."""
    return 0.0, field.b_y, field.gradient * v * t


def wire_field_peak(current: float, z_a: float) -> float:
    """Wire field at the point of closest approach."""
    if z_a <= 0.0:
        raise DomainError("beam-wire distance must be positive", {"z_a": z_a})
    return MU0 * current / (2.0 * math.pi * z_a)


def wire_bz_profile(current: float, z_a: float, v: float, t):
    """Longitudinal wire field along the flight, t = 0 above the wire."""
    u = v * np.asarray(t, dtype=float) / z_a
    return wire_field_peak(current, z_a) * u / (1.0 + u * u)
