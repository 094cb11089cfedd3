"""
Analytic spin-flip chain for the inner rotation chamber.

The flip fraction after the chamber is built up from successive rotation
effects:

    W1 = exp(-pi k_m)                       uncorrected Majorana, squared
    W2 = exp(-pi k0)                        remnant field corrected by B_n cos<theta_n>
    W3 = exp(-pi sqrt(k0^2 + k0 k1))        transverse nuclear field added
    W4 = W3 exp(-(pi k1)^2 f_r1 / 2)        nuclear-resonant rotation
    W_cqd = W4 exp(-c_ri I)                 induction

The same chain is also computed from the current coefficients
c_r0, c_rs, c_r1, c_ri and the two forms are cross-checked on every call.
"""

import math
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field
from scipy.optimize import minimize_scalar

from .atomkit import MU0, THETA_N_MEAN, AtomParams, ApparatusParams, potassium39
from .errors import DomainError, NumericError
from .fieldgeom import corrected_remnant, field_at_current
from .models import FlipCurveRow, FlipModel

logger = structlog.get_logger(__name__)

DUAL_FORM_RTOL = 1e-6
PEAK_GRID_POINTS = 400


class AdiabaticityParams(BaseModel):
    """Dimensionless adiabaticity parameters at one current."""
    model_config = {"frozen": True}

    current: float = Field(gt=0.0)
    k_m: float
    k0: float
    k1: float
    w_n: float
    f_r1: float


class FlipCoefficients(BaseModel):
    """Current coefficients of the flip exponent; c_ri multiplies I."""
    model_config = {"frozen": True}

    c_r0: float = Field(ge=0.0, description="null-point rotation, A")
    c_rs: float = Field(ge=0.0, description="rotation saturation")
    c_r1: float = Field(ge=0.0, description="nuclear-resonant rotation, A^-3")
    c_ri: float = Field(ge=0.0, description="induction rotation, A^-1")


class FlipExponents(BaseModel):
    """Exponents of W_cqd and the effective path lengths behind them."""
    model_config = {"frozen": True}

    e_r0: float
    e_r1: float
    e_i: float
    path_r0: float  # pi y_r0, m
    path_r1: float  # pi y_r1, m
    path_ratio: float
    f_r0: float
    f_r1: float

    @property
    def total(self) -> float:
        return self.e_r0 + self.e_r1 + self.e_i


def _defaults(atom: Optional[AtomParams], apparatus: Optional[ApparatusParams]):
    return atom or potassium39(), apparatus or ApparatusParams()


def _check_current(current: float):
    if not current > 0.0:
        raise DomainError("wire current must be positive", {"current": current})


def transverse_nuclear_field(atom: AtomParams, theta_n_mean: float = THETA_N_MEAN) -> float:
    return atom.b_n * math.sin(theta_n_mean)


def nuclear_larmor_period(atom: AtomParams) -> float:
    """Precession period of the nucleus in the electron's field; infinite when b_e = 0."""
    if atom.b_e == 0.0:
        return math.inf
    return 2.0 * math.pi / (atom.gamma_n * atom.b_e)


def adiabaticity(current: float, atom: Optional[AtomParams] = None,
                 apparatus: Optional[ApparatusParams] = None,
                 theta_n_mean: float = THETA_N_MEAN) -> AdiabaticityParams:
    """
    Adiabaticity parameters of the null-point passage at ``current``.

    Raises:
        DomainError: if the current is not positive
    """
    _check_current(current)
    atom, apparatus = _defaults(atom, apparatus)
    gamma = abs(atom.gamma_e)
    transit = apparatus.z_a / apparatus.v

    bare = field_at_current(apparatus, current, apparatus.b_r)
    corrected = field_at_current(apparatus, current,
                                 corrected_remnant(apparatus.b_r, atom.b_n, theta_n_mean))
    transverse = transverse_nuclear_field(atom, theta_n_mean)

    k0 = transit * gamma * corrected.b_y
    k1 = transit * gamma * transverse ** 2 / corrected.b_y
    path_r1 = math.pi * apparatus.z_a * transverse / corrected.b_y
    return AdiabaticityParams(
        current=current,
        k_m=transit * gamma * bare.b_y,
        k0=k0,
        k1=k1,
        w_n=2.0 * atom.gamma_n * atom.b_e / math.sqrt(gamma * corrected.gradient * apparatus.v),
        f_r1=path_r1 / (apparatus.v * nuclear_larmor_period(atom)),
    )


def majorana(k_m: float) -> float:
    """Majorana flip probability exp(-pi |k_m| / 2)."""
    return math.exp(-math.pi * abs(k_m) / 2.0)


def rabi_revised(w_m: float) -> float:
    """Rabi's revision for nuclear spin 3/2: W_m^(1/4) / 4."""
    if not 0.0 <= w_m <= 1.0:
        raise DomainError("W_m must lie in [0, 1]", {"w_m": w_m})
    return w_m ** 0.25 / 4.0


def resonant_only(k1: float) -> float:
    return math.exp(-math.pi * k1)


def direct_combination(k0: float, k1: float) -> float:
    """Linear sum of the two adiabaticity parameters instead of the quadrature sum."""
    return math.exp(-math.pi * (k0 + k1))


def induction_coefficient(k_i: float, atom: Optional[AtomParams] = None,
                          apparatus: Optional[ApparatusParams] = None) -> float:
    """c_ri: induction exponent per ampere for induction factor ``k_i``."""
    if k_i < 0.0:
        raise DomainError("k_i must be non-negative", {"k_i": k_i})
    atom, apparatus = _defaults(atom, apparatus)
    return k_i * induction_scale(atom, apparatus)


def induction_scale(atom: AtomParams, apparatus: ApparatusParams) -> float:
    """c_ri / k_i = (2 mu0 |gamma_e| / (pi v)) ln(T_f v / (2 z_a))."""
    log_term = math.log(apparatus.flight_time * apparatus.v / (2.0 * apparatus.z_a))
    return 2.0 * MU0 * abs(atom.gamma_e) / (math.pi * apparatus.v) * log_term


def coefficients(atom: Optional[AtomParams] = None, apparatus: Optional[ApparatusParams] = None,
                 theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0) -> FlipCoefficients:
    atom, apparatus = _defaults(atom, apparatus)
    gamma = abs(atom.gamma_e)
    v, z_a = apparatus.v, apparatus.z_a
    remnant = corrected_remnant(apparatus.b_r, atom.b_n, theta_n_mean)
    transverse = transverse_nuclear_field(atom, theta_n_mean)
    return FlipCoefficients(
        c_r0=2.0 * math.pi ** 2 * gamma * remnant ** 2 * z_a ** 2 / (MU0 * v),
        c_rs=math.pi * gamma * transverse * z_a / v,
        c_r1=(MU0 ** 3 * gamma ** 2 * atom.gamma_n / (32.0 * math.pi * v ** 3)
              * atom.b_e * transverse ** 5 / remnant ** 6),
        c_ri=induction_coefficient(k_i, atom, apparatus),
    )


def exponents(current: float, atom: Optional[AtomParams] = None,
              apparatus: Optional[ApparatusParams] = None,
              theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0) -> FlipExponents:
    """Null-point, resonant and induction exponents at ``current``."""
    _check_current(current)
    atom, apparatus = _defaults(atom, apparatus)
    params = adiabaticity(current, atom, apparatus, theta_n_mean)
    corrected = field_at_current(apparatus, current,
                                 corrected_remnant(apparatus.b_r, atom.b_n, theta_n_mean))
    transverse = transverse_nuclear_field(atom, theta_n_mean)

    e_r0 = (math.pi * apparatus.z_a / apparatus.v * abs(atom.gamma_e)
            * math.hypot(corrected.b_y, transverse))
    path_r0 = math.pi * corrected.b_y / corrected.gradient
    path_r1 = math.pi * apparatus.z_a * transverse / corrected.b_y
    return FlipExponents(
        e_r0=e_r0,
        e_r1=0.5 * (math.pi * params.k1) ** 2 * params.f_r1,
        e_i=induction_coefficient(k_i, atom, apparatus) * current,
        path_r0=path_r0,
        path_r1=path_r1,
        path_ratio=path_r1 / path_r0,
        f_r0=params.f_r1 * path_r0 / path_r1,
        f_r1=params.f_r1,
    )


def coefficient_form(current: float, coeffs: FlipCoefficients) -> Tuple[float, float]:
    """(W4, W_cqd) from the current coefficients."""
    w4 = math.exp(-math.hypot(coeffs.c_r0 / current, coeffs.c_rs) - coeffs.c_r1 * current ** 3)
    return w4, w4 * math.exp(-coeffs.c_ri * current)


def w_chain(current: float, atom: Optional[AtomParams] = None,
            apparatus: Optional[ApparatusParams] = None,
            theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0) -> FlipCurveRow:
    """
    Every flip model at one current.

    Raises:
        DomainError: if the current is not positive
        NumericError: if the dimensionless and coefficient forms disagree
    """
    atom, apparatus = _defaults(atom, apparatus)
    params = adiabaticity(current, atom, apparatus, theta_n_mean)
    coeffs = coefficients(atom, apparatus, theta_n_mean, k_i)
    k_m, k0, k1 = params.k_m, params.k0, params.k1

    w_m = majorana(k_m)
    w3 = math.exp(-math.pi * math.sqrt(k0 * k0 + k0 * k1))
    w4 = w3 * math.exp(-0.5 * (math.pi * k1) ** 2 * params.f_r1)
    w_cqd = w4 * math.exp(-coeffs.c_ri * current)

    w4_alt, w_cqd_alt = coefficient_form(current, coeffs)
    for name, value, other in (("W4", w4, w4_alt), ("W_cqd", w_cqd, w_cqd_alt)):
        if abs(value - other) > DUAL_FORM_RTOL * max(abs(value), abs(other)):
            logger.error("Flip parameterizations disagree", quantity=name, current=current,
                         dimensionless=value, coefficient=other)
            raise NumericError("flip parameterizations disagree",
                               {"quantity": name, "current": current,
                                "dimensionless": value, "coefficient": other})

    return FlipCurveRow(
        current=current,
        k_m=k_m,
        k0=k0,
        k1=k1,
        f_r1=params.f_r1,
        W_m=w_m,
        W_rabi=rabi_revised(w_m),
        W1=math.exp(-math.pi * k_m),
        W2=math.exp(-math.pi * k0),
        W3=w3,
        W4=w4,
        W_cqd=w_cqd,
        W_R=resonant_only(k1),
        W_direct=direct_combination(k0, k1),
    )


_MODEL_COLUMNS: Dict[FlipModel, str] = {
    FlipModel.WM: "W_m",
    FlipModel.RABI: "W_rabi",
    FlipModel.W1: "W1",
    FlipModel.W2: "W2",
    FlipModel.W3: "W3",
    FlipModel.W4: "W4",
    FlipModel.WCQD: "W_cqd",
    FlipModel.WR: "W_R",
    FlipModel.DIRECT: "W_direct",
}


def predict(model: FlipModel, current: float, atom: Optional[AtomParams] = None,
            apparatus: Optional[ApparatusParams] = None,
            theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0) -> float:
    """Flip fraction of one model at one current."""
    row = w_chain(current, atom, apparatus, theta_n_mean, k_i)
    return getattr(row, _MODEL_COLUMNS[FlipModel(model)])


def log_grid(i_min: float, i_max: float, points: int) -> np.ndarray:
    if not 0.0 < i_min < i_max:
        raise DomainError("current range must satisfy 0 < i_min < i_max",
                          {"i_min": i_min, "i_max": i_max})
    if points < 2:
        raise DomainError("at least two grid points are required", {"points": points})
    return np.geomspace(i_min, i_max, points)


def flip_curve(i_min: Optional[float] = None, i_max: Optional[float] = None,
               points: int = 50, atom: Optional[AtomParams] = None,
               apparatus: Optional[ApparatusParams] = None,
               theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0) -> List[FlipCurveRow]:
    """Scan of every flip model over a log-spaced current grid."""
    atom, apparatus = _defaults(atom, apparatus)
    i_min = apparatus.i_min if i_min is None else i_min
    i_max = apparatus.i_max if i_max is None else i_max
    rows = [w_chain(float(current), atom, apparatus, theta_n_mean, k_i)
            for current in log_grid(i_min, i_max, points)]
    logger.info("Flip curve computed", points=len(rows), i_min=i_min, i_max=i_max, k_i=k_i)
    return rows


def find_peak(model: FlipModel = FlipModel.W4, atom: Optional[AtomParams] = None,
              apparatus: Optional[ApparatusParams] = None,
              theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0,
              points: int = PEAK_GRID_POINTS) -> Tuple[float, float]:
    """
    Location and value of the maximum flip fraction on [i_min, i_max].

    A log-spaced grid brackets the maximum, then a bounded scalar search in
    log-current refines it.
    """
    atom, apparatus = _defaults(atom, apparatus)
    grid = log_grid(apparatus.i_min, apparatus.i_max, points)
    values = np.array([predict(model, float(i), atom, apparatus, theta_n_mean, k_i) for i in grid])
    best = int(np.argmax(values))
    if best in (0, len(grid) - 1):
        return float(grid[best]), float(values[best])

    result = minimize_scalar(
        lambda log_i: -predict(model, math.exp(log_i), atom, apparatus, theta_n_mean, k_i),
        bounds=(math.log(grid[best - 1]), math.log(grid[best + 1])),
        method="bounded",
        options={"xatol": 1e-10},
    )
    current = math.exp(result.x)
    logger.debug("Peak located", model=str(model), current=current, value=-result.fun)
    return current, float(-result.fun)


def crossover_current(atom: Optional[AtomParams] = None,
                      apparatus: Optional[ApparatusParams] = None,
                      theta_n_mean: float = THETA_N_MEAN) -> float:
    """Current at which k0 = k1, i.e. B'_y equals the transverse nuclear field."""
    atom, apparatus = _defaults(atom, apparatus)
    remnant = corrected_remnant(apparatus.b_r, atom.b_n, theta_n_mean)
    transverse = transverse_nuclear_field(atom, theta_n_mean)
    if transverse <= 0.0:
        raise DomainError("transverse nuclear field must be positive", {"theta_n_mean": theta_n_mean})
    return 2.0 * math.pi * remnant ** 2 * apparatus.z_a / (MU0 * transverse)
