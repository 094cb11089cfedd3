"""
Internal-field coefficients from the electron radial density.

The coefficient kappa expresses the field one moment produces at the other as
``B = kappa * mu0 / (pi R^3) * mu``. Two averages are provided:

* torque average: the field that reproduces the volumetric torque exerted on
  the circulating electron density by a point nuclear dipole (contact term
  excluded);
* self average: the contact term alone, ``kappa_s = (2/3) rho(0) pi R^3``.

Densities are Gaussian, top-hat, or the tabulated 4s radial function of
potassium. The Gaussian and the table are scaled so that the mean radius
equals the atomic radius R; the top-hat fills the ball of radius R.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, trapezoid

from .atomkit import potassium39
from .errors import DomainError, NumericError
from .metrics import track_duration
from .models import DensityKind, KappaChoice

logger = structlog.get_logger(__name__)

NORMALIZATION_TOLERANCE = 1e-3
QUAD_RTOL = 1e-4

# Normalized P(4s) of potassium versus r/a0
_HARTREE_4S = """
      0.000   0.0000   0.005   0.0142   0.010   0.0257   0.015   0.0349
      0.020   0.0421   0.030   0.0509   0.040   0.0540   0.050   0.0527
      0.060   0.0480   0.070   0.0409   0.080   0.0321   0.090   0.0220
      0.100   0.0113   0.120  -0.0108   0.140  -0.0321   0.160  -0.0511
      0.180  -0.0673   0.200  -0.0801   0.220  -0.0896   0.240  -0.0958
      0.260  -0.0989   0.280  -0.0993   0.300  -0.0972   0.350  -0.0830
      0.400  -0.0598   0.450  -0.0312   0.500  -0.0003   0.550   0.0307
      0.600   0.0601   0.700   0.1105   0.800   0.1465   0.900   0.1679
      1.000   0.1761   1.100   0.1734   1.200   0.1623   1.400   0.1226
      1.600   0.0699   1.800   0.0119   2.000  -0.0470   2.200  -0.1040
      2.400  -0.1578   2.600  -0.2074   2.800  -0.2524   3.000  -0.2926
      3.200  -0.3279   3.400  -0.3583   3.600  -0.3840   3.800  -0.4052
      4.000  -0.4221   4.500  -0.4476   5.000  -0.4530   5.500  -0.4430
      6.000  -0.4220   6.500  -0.3937   7.000  -0.3609   7.500  -0.3264
      8.000  -0.2916   8.500  -0.2578   9.000  -0.2261   9.500  -0.1967
     10.000  -0.1700  11.000  -0.1246  12.000  -0.0896  13.000  -0.0634
     14.000  -0.0443  15.000  -0.0305  16.000  -0.0209  17.000  -0.0138
     18.000  -0.0095  19.000  -0.0063  20.000  -0.0042  21.000  -0.0028
     22.000  -0.0018  23.000  -0.0012  24.000  -0.0008  25.000  -0.0005
     26.000  -0.0003  27.000  -0.0002  28.000  -0.0001  29.000  -0.0001
     30.000   0.0000  31.000   0.0000
"""

# 4*pi*psi_s(0)^2 * a0^3 for the 4s orbital
_CONTACT_4S = 9.76

CONTACT_CONVENTIONS = ("published", "scaled")


def hartree_table() -> Tuple[np.ndarray, np.ndarray]:
    """Return (r/a0, P) columns of the embedded 4s table."""
    pairs = np.array(_HARTREE_4S.split(), dtype=float).reshape(-1, 2)
    return pairs[:, 0].copy(), pairs[:, 1].copy()


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """
    Spherically symmetric probability density rho(r) in 1/m^3.

    ``radii``/``values`` always hold a tabulation; analytic densities also
    carry ``function`` (and ``support``) so integrals can use adaptive
    quadrature instead of the grid.
    """
    kind: DensityKind
    radii: np.ndarray
    values: np.ndarray
    scale_radius: float
    radius: float
    contact_density: float
    function: Optional[Callable[[float], float]] = None
    support: float = math.inf

    def __post_init__(self):
        if np.any(self.values < 0.0) or self.contact_density < 0.0:
            raise DomainError("density must be non-negative", {"kind": self.kind.value})
        if np.any(np.diff(self.radii) <= 0.0):
            raise DomainError("radial grid must be strictly ascending", {"kind": self.kind.value})
        total = self.normalization()
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise DomainError("density is not normalized",
                              {"kind": self.kind.value, "integral": total})

    def __call__(self, r: float) -> float:
        if self.function is not None:
            return self.function(r)
        return float(np.interp(r, self.radii, self.values, right=0.0))

    def normalization(self) -> float:
        """Integral of rho(r) * 4 pi r^2 dr."""
        return _radial_integral(self, lambda r: 4.0 * math.pi * r * r)

    def mean_radius(self) -> float:
        return _radial_integral(self, lambda r: 4.0 * math.pi * r ** 3)


def _radial_integral(density: RadialDensity, weight: Callable) -> float:
    """Integrate rho(r) * weight(r) dr over the density's support."""
    if density.function is None:
        radii = density.radii
        return float(trapezoid(density.values * weight(radii), radii))

    # Integrate in units of the scale radius; SI magnitudes defeat absolute tolerances
    scale = density.scale_radius
    upper = density.support / scale
    value, abserr, info = quad(lambda u: density.function(u * scale) * weight(u * scale), 0.0, upper,
                               epsabs=0.0, epsrel=QUAD_RTOL * 1e-2, limit=200, full_output=1)[:3]
    if abserr > QUAD_RTOL * max(abs(value), 1e-300):
        raise NumericError("radial quadrature did not converge",
                           {"kind": density.kind.value, "value": value, "residual": abserr})
    return float(value) * scale


def gaussian_density(radius: float, points: int = 400) -> RadialDensity:
    """Gaussian density with mean radius 2 a0 / sqrt(pi) = radius."""
    if radius <= 0.0:
        raise DomainError("radius must be positive", {"radius": radius})
    a0 = radius * math.sqrt(math.pi) / 2.0
    norm = 1.0 / (math.pi ** 1.5 * a0 ** 3)

    def rho(r):
        return norm * np.exp(-(r / a0) ** 2)

    # exp(-144) is below double precision relative to the peak
    cutoff = 12.0 * a0
    radii = np.linspace(0.0, cutoff, points)
    return RadialDensity(DensityKind.GAUSSIAN, radii, rho(radii), a0, radius,
                         contact_density=norm, function=rho, support=cutoff)


def tophat_density(radius: float, points: int = 400) -> RadialDensity:
    """Uniform ball of the atomic radius."""
    if radius <= 0.0:
        raise DomainError("radius must be positive", {"radius": radius})
    ball = radius
    level = 3.0 / (4.0 * math.pi * ball ** 3)

    def rho(r):
        return np.where(np.asarray(r) <= ball, level, 0.0)

    radii = np.linspace(0.0, ball, points)
    return RadialDensity(DensityKind.TOPHAT, radii, np.full(points, level), ball, radius,
                         contact_density=level, function=lambda r: float(rho(r)), support=ball)


def load_hartree_table(radius: Optional[float] = None,
                       contact_convention: str = "published") -> RadialDensity:
    """
    Tabulated 4s density on the table grid, with mean radius scaled to R.

    The contact density rho(0) follows ``contact_convention``:

    * ``"published"``: rho(0) * pi R^3 = (9.76 / 4) * <r>/a0, i.e. the
      contact value carries one power of the radial scale factor (about 14.2
      for potassium);
    * ``"scaled"``: rho(0) = 9.76 / (4 pi a^3) with a the rescaled Bohr
      length, the full cubic scaling of psi_s(0)^2.
    """
    if contact_convention not in CONTACT_CONVENTIONS:
        raise DomainError("unknown contact convention", {"convention": contact_convention})
    radius = potassium39().radius if radius is None else radius
    if radius <= 0.0:
        raise DomainError("radius must be positive", {"radius": radius})

    x, p = hartree_table()
    prob = p * p
    norm = float(trapezoid(prob, x))
    mean_x = float(trapezoid(prob * x, x)) / norm
    a = radius / mean_x

    values = np.zeros_like(x)
    inner = x > 0.0
    values[inner] = prob[inner] / (norm * 4.0 * math.pi * x[inner] ** 2 * a ** 3)

    if contact_convention == "published":
        contact = _CONTACT_4S / 4.0 * mean_x / (math.pi * radius ** 3)
    else:
        contact = _CONTACT_4S / (4.0 * math.pi * a ** 3)
    # Grid value at the origin is only used by interpolation
    values[0] = 0.0

    logger.debug("Loaded 4s table", points=len(x), norm=norm, mean_x=mean_x,
                 convention=contact_convention)
    return RadialDensity(DensityKind.TABULATED, x * a, values, a, radius,
                         contact_density=contact)


def density_from_grid(radii, values, radius: float,
                      contact_density: Optional[float] = None) -> RadialDensity:
    """User-supplied tabulated density; rescaled so that <r> = radius and renormalized."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if radii.shape != values.shape or radii.ndim != 1 or len(radii) < 3:
        raise DomainError("grid and values must be 1-D of equal length >= 3")
    if np.any(values < 0.0):
        raise DomainError("density must be non-negative")
    norm = float(trapezoid(values * 4.0 * math.pi * radii ** 2, radii))
    if norm <= 0.0:
        raise DomainError("density integrates to zero")
    mean_r = float(trapezoid(values * 4.0 * math.pi * radii ** 3, radii)) / norm
    scale = radius / mean_r
    scaled = values / norm / scale ** 3
    contact = scaled[0] if contact_density is None else contact_density
    return RadialDensity(DensityKind.TABULATED, radii * scale, scaled, scale, radius,
                         contact_density=float(contact))


@lru_cache(maxsize=1)
def _angular_factors(n_polar: int = 16, n_azimuth: int = 32) -> Tuple[float, float]:
    """
    Sphere integrals of the torque and moment kernels.

    With the electron circulating about z and the nuclear moment along x, the
    torque kernel is (z - c r) x (3 s r - x) and the moment kernel is
    (z - c r), where c = r.z and s = r.x. Returns (torque_y, moment_z).
    """
    nodes, weights = leggauss(n_polar)
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    cos_t = nodes[:, None]
    sin_t = np.sqrt(1.0 - cos_t ** 2)
    r_hat = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), np.broadcast_to(cos_t, (n_polar, n_azimuth))], axis=-1)
    z_hat = np.array([0.0, 0.0, 1.0])
    x_hat = np.array([1.0, 0.0, 0.0])

    c = r_hat[..., 2:3]
    s = r_hat[..., 0:1]
    circulation = z_hat - c * r_hat
    dipole = 3.0 * s * r_hat - x_hat
    kernel = np.cross(circulation, dipole)

    area = weights[:, None, None] * (2.0 * math.pi / n_azimuth)
    torque = np.sum(kernel * area, axis=(0, 1))
    moment = np.sum(circulation * area, axis=(0, 1))
    return float(torque[1]), float(moment[2])


@track_duration("kappa_torque")
def torque_avg_coefficient(density: RadialDensity) -> float:
    """
    Torque-averaged kappa.

    The circulating density gives dm = -(1/2) rho [r^2 z - r (r.z)] dV; the
    nuclear dipole field (contact term excluded) acting on dm gives the total
    torque. The effective field is torque / moment, reported in units of
    mu0 mu_n / (pi R^3).

    Raises:
        NumericError: if the radial quadrature does not converge
    """
    torque_y, moment_z = _angular_factors()
    # dV = r^2 dr dOmega; B carries 1/(4 pi r^3)
    radial_torque = _radial_integral(density, lambda r: r)
    radial_moment = _radial_integral(density, lambda r: r ** 4)
    torque = -0.5 / (4.0 * math.pi) * torque_y * radial_torque
    moment = -0.5 * moment_z * radial_moment
    if moment == 0.0:
        raise NumericError("electron moment vanishes", {"kind": density.kind.value})

    kappa = torque / moment * math.pi * density.radius ** 3
    logger.info("Computed torque-averaged kappa", kind=density.kind.value, kappa=kappa)
    return kappa


def self_avg_coefficient(density: RadialDensity) -> float:
    """Self-averaged kappa_s = (2/3) rho(0) pi R^3."""
    return 2.0 / 3.0 * density.contact_density * math.pi * density.radius ** 3


def build_density(kind: DensityKind, radius: float,
                  contact_convention: str = "published") -> RadialDensity:
    kind = DensityKind(kind)
    if kind == DensityKind.GAUSSIAN:
        return gaussian_density(radius)
    if kind == DensityKind.TOPHAT:
        return tophat_density(radius)
    return load_hartree_table(radius, contact_convention)


@lru_cache(maxsize=None)
def kappa_for(choice: KappaChoice, radius: Optional[float] = None,
              contact_convention: str = "published") -> float:
    """Resolve a kappa selection to its numeric coefficient."""
    choice = KappaChoice(choice)
    radius = potassium39().radius if radius is None else radius
    kind_name, averaging = choice.value.split("-")
    density = build_density(DensityKind(kind_name), radius, contact_convention)
    if averaging == "torque":
        return torque_avg_coefficient(density)
    return self_avg_coefficient(density)


def kappa_table(contact_convention: str = "published") -> List[Dict[str, object]]:
    """All density × averaging combinations, in a stable order."""
    rows = []
    for kind in (DensityKind.GAUSSIAN, DensityKind.TABULATED, DensityKind.TOPHAT):
        for averaging in ("torque", "self"):
            choice = KappaChoice(f"{kind.value}-{averaging}")
            rows.append({
                "density": kind.value,
                "averaging": averaging,
                "kappa": kappa_for(choice, contact_convention=contact_convention),
            })
    return rows
