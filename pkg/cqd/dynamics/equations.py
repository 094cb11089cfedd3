"""
Equations of motion for the coupled electron and nuclear moments.

State vectors are laid out as ``[theta_e, phi_e, theta_n, phi_n, phase_e]``
where ``phase_e`` accumulates |dphi_e/dt| without wrapping. All rate
functions accept a trailing ensemble axis so many trajectories can share a
single solver call.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field

from ..atomkit import AtomParams
from ..errors import DomainError
from ..models import Physics

logger = structlog.get_logger(__name__)

TWO_PI = 2.0 * math.pi
POLE_EPSILON = 1e-9
_FIXED_POINT_ITERATIONS = 60


@dataclass(frozen=True)
class SpinState:
    """Angles of the electron and nuclear unit moments."""
    theta_e: float
    phi_e: float
    theta_n: float
    phi_n: float
    phase_e: float = 0.0

    def __post_init__(self):
        for name in ("theta_e", "theta_n"):
            value = getattr(self, name)
            if not -1e-12 <= value <= math.pi + 1e-12:
                raise DomainError(f"{name} must lie in [0, pi]", {name: value})
            object.__setattr__(self, name, min(max(value, 0.0), math.pi))
        object.__setattr__(self, "phi_e", self.phi_e % TWO_PI)
        object.__setattr__(self, "phi_n", self.phi_n % TWO_PI)

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta_e, self.phi_e, self.theta_n, self.phi_n, self.phase_e])

    @classmethod
    def from_vector(cls, y: Sequence[float]) -> "SpinState":
        theta_e = min(max(float(y[0]), 0.0), math.pi)
        theta_n = min(max(float(y[2]), 0.0), math.pi)
        return cls(theta_e, float(y[1]), theta_n, float(y[3]), float(y[4]))

    def electron_vector(self) -> np.ndarray:
        return unit_vector(self.theta_e, self.phi_e)

    def nuclear_vector(self) -> np.ndarray:
        return unit_vector(self.theta_n, self.phi_n)


class DynamicsConfig(BaseModel):
    """Physics selection for the equations of motion."""
    model_config = {"frozen": True}

    k_i: float = Field(0.0, ge=0.0, description="induction factor")
    physics: Physics = Physics.CQD
    include_b_n: bool = True
    include_b_e: bool = True
    hold_nucleus: bool = False
    pole_epsilon: float = Field(POLE_EPSILON, gt=0.0)


def unit_vector(theta, phi) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def precession_rates(gamma, theta, phi, field, partner_field, theta_p, phi_p):
    """
    Undamped rates (dtheta/dt, dphi/dt) of one moment.

    ``field`` is the external (B_x, B_y, B_z); ``partner_field`` the magnitude
    of the internal field along the partner moment at (theta_p, phi_p).
    """
    b_x, b_y, b_z = field
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    transverse_p = partner_field * np.sin(theta_p)
    d_theta = -gamma * ((-b_x * sin_phi + b_y * cos_phi)
                        + transverse_p * np.sin(phi_p - phi))
    cot = np.cos(theta) / np.where(np.sin(theta) == 0.0, 1.0, np.sin(theta))
    d_phi = -gamma * (b_z + partner_field * np.cos(theta_p)
                      - cot * ((b_x * cos_phi + b_y * sin_phi)
                               + transverse_p * np.cos(phi_p - phi)))
    return d_theta, d_phi


def _damped(p_theta, p_phi, theta, k, physics: Physics, sign):
    """Apply the induction term to precession rates (interior points only)."""
    if physics == Physics.BLOCH or not np.any(k):
        return p_theta, p_phi
    sin_t = np.sin(theta)
    sin_t = np.where(sin_t == 0.0, 1.0, sin_t)
    if physics == Physics.LLG:
        scale = 1.0 + k * k
        return (p_theta + k * sin_t * p_phi) / scale, (p_phi - k * p_theta / sin_t) / scale

    # Signed induction: both rates depend on |each other|, solve by iteration
    d_theta, d_phi = p_theta, p_phi
    for _ in range(_FIXED_POINT_ITERATIONS):
        new_theta = p_theta - sign * k * np.abs(d_phi) * sin_t
        new_phi = p_phi - np.abs(sign) * np.sign(d_phi) * k * np.abs(new_theta) / sin_t
        converged = (np.all(np.abs(new_theta - d_theta) <= 1e-15 * (np.abs(new_theta) + 1e-300))
                     and np.all(np.abs(new_phi - d_phi) <= 1e-15 * (np.abs(new_phi) + 1e-300)))
        d_theta, d_phi = new_theta, new_phi
        if converged:
            break
    return d_theta, d_phi


def state_rates(y: np.ndarray, field: Tuple[float, float, float],
                atom: AtomParams, config: DynamicsConfig) -> np.ndarray:
    """
    Time derivative of a state vector (or a (5, N) block of them).

    Poles: when a polar angle is within ``pole_epsilon`` of 0 or pi its
    azimuthal rate is zero and no induction acts.
    """
    theta_e = np.clip(y[0], 0.0, math.pi)
    theta_n = np.clip(y[2], 0.0, math.pi)
    phi_e, phi_n = y[1], y[3]
    eps = config.pole_epsilon
    b_n = atom.b_n if config.include_b_n else 0.0
    b_e = atom.b_e if config.include_b_e else 0.0
    k = 0.0 if config.physics == Physics.BLOCH else config.k_i

    pe_theta, pe_phi = precession_rates(atom.gamma_e, theta_e, phi_e, field, b_n, theta_n, phi_n)
    pn_theta, pn_phi = precession_rates(atom.gamma_n, theta_n, phi_n, field, b_e, theta_e, phi_e)

    # Postulated signs: the electron moves away from the nucleus in polar angle and vice versa
    sign_e = np.sign(theta_n - theta_e)
    sign_n = np.sign(theta_e - theta_n)

    de_theta, de_phi = _damped(pe_theta, pe_phi, theta_e, k, config.physics, sign_e)
    dn_theta, dn_phi = _damped(pn_theta, pn_phi, theta_n, k, config.physics, sign_n)

    pole_e = (theta_e < eps) | (theta_e > math.pi - eps)
    pole_n = (theta_n < eps) | (theta_n > math.pi - eps)
    de_theta = np.where(pole_e, pe_theta, de_theta)
    de_phi = np.where(pole_e, 0.0, de_phi)
    dn_theta = np.where(pole_n, pn_theta, dn_theta)
    dn_phi = np.where(pole_n, 0.0, dn_phi)

    if config.hold_nucleus:
        dn_theta = np.zeros_like(dn_theta)

    return np.array([de_theta, de_phi, dn_theta, dn_phi, np.abs(de_phi)])


def cqd_rhs(state: SpinState, field: Tuple[float, float, float],
            atom: AtomParams, config: DynamicsConfig) -> np.ndarray:
    """Rates (dtheta_e, dphi_e, dtheta_n, dphi_n) for one state."""
    rates = state_rates(state.as_vector(), field, atom, config)
    return np.asarray(rates[:4], dtype=float)


def branch(theta_n: float, theta_e: float) -> int:
    """Collapse branch: +1 toward +z, -1 toward -z, 0 at an exact tie."""
    for name, value in (("theta_n", theta_n), ("theta_e", theta_e)):
        if not 0.0 <= value <= math.pi:
            raise DomainError(f"{name} must lie in [0, pi]", {name: value})
    return int(np.sign(theta_n - theta_e))


def collapse_envelope(theta0: float, k_i: float, delta_phi: float, sign: int) -> float:
    """Polar angle after |delta_phi| of precession under induction factor k_i."""
    if not 0.0 < theta0 < math.pi:
        raise DomainError("theta0 must lie in (0, pi)", {"theta0": theta0})
    with np.errstate(over="ignore"):
        ratio = np.exp(-sign * k_i * abs(delta_phi))
    return float(2.0 * np.arctan(math.tan(theta0 / 2.0) * ratio))


def collapse_times(k_i: float, omega: float) -> Tuple[float, float]:
    """
    Precession cycles N_c and time T_c per e-fold of tan(theta/2).

    k_i = 0 never collapses and returns (inf, inf).
    """
    if k_i < 0.0:
        raise DomainError("k_i must be non-negative", {"k_i": k_i})
    if k_i == 0.0:
        return math.inf, math.inf
    if omega == 0.0:
        raise DomainError("Larmor frequency must be non-zero", {"omega": omega})
    return 1.0 / (TWO_PI * k_i), 1.0 / (k_i * abs(omega))
