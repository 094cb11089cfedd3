"""
Co-quantum angular distributions.

All distributions are azimuthally uniform; ``pdf`` is a probability per
steradian and ``cdf`` the azimuthally integrated cumulative probability in
the polar angle.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import structlog
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from ..errors import DomainError
from ..models import DistributionKind

logger = structlog.get_logger(__name__)

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True, eq=False)
class AngularDistribution:
    """Samplable, integrable distribution of directions on the sphere."""
    kind: DistributionKind
    pdf_theta: Callable  # theta -> probability per steradian
    cdf_theta: Callable  # theta -> P(Theta <= theta)
    inverse_cdf: Callable  # u in [0, 1) -> theta
    label: str = ""

    def pdf(self, theta, phi=0.0):
        return self.pdf_theta(_check_theta(theta))

    def cdf(self, theta):
        return self.cdf_theta(_check_theta(theta))

    def mean_theta(self) -> float:
        from scipy.integrate import quad
        return quad(lambda t: t * float(self.pdf_theta(t)) * 2.0 * math.pi * math.sin(t),
                    0.0, math.pi, epsabs=0.0, epsrel=1e-10)[0]


def _check_theta(theta):
    values = np.asarray(theta, dtype=float)
    if np.any(values < -1e-12) or np.any(values > math.pi + 1e-12):
        raise DomainError("polar angle must lie in [0, pi]")
    clipped = np.clip(values, 0.0, math.pi)
    return float(clipped) if clipped.ndim == 0 else clipped


def heart_pdf(theta):
    """Heart-shaped density (1 - cos theta) / (4 pi)."""
    theta = _check_theta(theta)
    return (1.0 - np.cos(theta)) / FOUR_PI


def heart_inverted_pdf(theta):
    theta = _check_theta(theta)
    return (1.0 + np.cos(theta)) / FOUR_PI


def isotropic() -> AngularDistribution:
    return AngularDistribution(
        kind=DistributionKind.ISOTROPIC,
        pdf_theta=lambda t: np.zeros_like(np.asarray(t, dtype=float)) + 1.0 / FOUR_PI,
        cdf_theta=lambda t: np.sin(np.asarray(t) / 2.0) ** 2,
        inverse_cdf=lambda u: np.arccos(1.0 - 2.0 * np.asarray(u)),
        label="isotropic",
    )


def heart() -> AngularDistribution:
    # CDF (1 - cos)^2 / 4 = sin^4(theta/2)
    return AngularDistribution(
        kind=DistributionKind.HEART,
        pdf_theta=lambda t: (1.0 - np.cos(t)) / FOUR_PI,
        cdf_theta=lambda t: np.sin(np.asarray(t) / 2.0) ** 4,
        inverse_cdf=lambda u: np.arccos(1.0 - 2.0 * np.sqrt(np.asarray(u))),
        label="heart",
    )


def heart_inverted() -> AngularDistribution:
    # CDF 1 - (1 + cos)^2 / 4 = 1 - cos^4(theta/2)
    return AngularDistribution(
        kind=DistributionKind.HEART_INVERTED,
        pdf_theta=lambda t: (1.0 + np.cos(t)) / FOUR_PI,
        cdf_theta=lambda t: 1.0 - np.cos(np.asarray(t) / 2.0) ** 4,
        inverse_cdf=lambda u: np.arccos(np.clip(2.0 * np.sqrt(1.0 - np.asarray(u)) - 1.0, -1.0, 1.0)),
        label="heart_inverted",
    )


def custom_distribution(theta_grid, cdf_values, label: str = "custom") -> AngularDistribution:
    """
    Distribution from a tabulated polar CDF, interpolated monotonically.

    The grid must start at 0 and end at pi; the CDF must be non-decreasing
    from 0 to 1.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    cdf_values = np.asarray(cdf_values, dtype=float)
    if theta_grid.ndim != 1 or theta_grid.shape != cdf_values.shape or len(theta_grid) < 3:
        raise DomainError("theta grid and CDF must be 1-D of equal length >= 3")
    if abs(theta_grid[0]) > 1e-12 or abs(theta_grid[-1] - math.pi) > 1e-12:
        raise DomainError("theta grid must span [0, pi]")
    if np.any(np.diff(theta_grid) <= 0.0) or np.any(np.diff(cdf_values) < -1e-12):
        raise DomainError("theta grid must ascend and the CDF must be non-decreasing")
    if abs(cdf_values[0]) > 1e-9 or abs(cdf_values[-1] - 1.0) > 1e-6:
        raise DomainError("CDF must run from 0 to 1",
                          {"first": float(cdf_values[0]), "last": float(cdf_values[-1])})
    cdf_values = np.maximum.accumulate(np.clip(cdf_values, 0.0, 1.0))
    cdf_values[-1] = 1.0

    forward = PchipInterpolator(theta_grid, cdf_values)
    density = forward.derivative()
    # Drop flat stretches so the inverse is a function
    keep = np.concatenate([[True], np.diff(cdf_values) > 0.0])
    backward = PchipInterpolator(cdf_values[keep], theta_grid[keep])

    def pdf_theta(t):
        t = np.asarray(t, dtype=float)
        sin_t = np.sin(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = np.where(sin_t > 1e-12, density(t) / (2.0 * math.pi * np.where(sin_t > 1e-12, sin_t, 1.0)), 0.0)
        value = np.maximum(value, 0.0)
        return float(value) if value.ndim == 0 else value

    return AngularDistribution(
        kind=DistributionKind.CUSTOM,
        pdf_theta=pdf_theta,
        cdf_theta=lambda t: np.clip(forward(t), 0.0, 1.0),
        inverse_cdf=lambda u: np.clip(backward(u), 0.0, math.pi),
        label=label,
    )


def by_name(name: str) -> AngularDistribution:
    """Resolve a CLI/config name (iso, isotropic, heart, heart_inverted)."""
    key = name.strip().lower()
    if key in ("iso", "isotropic"):
        return isotropic()
    if key == "heart":
        return heart()
    if key in ("heart_inverted", "heart-inverted", "inverted"):
        return heart_inverted()
    raise DomainError("unknown distribution", {"name": name})


def slit_reshape(dist_n: AngularDistribution, dist_e: AngularDistribution, branch: int,
                 points: int = 2001) -> AngularDistribution:
    """
    Co-quantum distribution after slit selection of one collapse branch.

    The +z branch keeps nuclei with theta_n > theta_e, weighted by twice the
    electron CDF; the -z branch keeps the complement. Requires an isotropic
    nuclear prior. A non-isotropic electron distribution yields a tabulated
    distribution renormalized to unit probability.

    Raises:
        DomainError: for a non-isotropic nuclear prior or a branch other than +-1
    """
    if dist_n.kind != DistributionKind.ISOTROPIC:
        raise DomainError("slit reshaping assumes an isotropic co-quantum prior",
                          {"kind": dist_n.kind.value})
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1", {"branch": branch})

    if dist_e.kind == DistributionKind.ISOTROPIC:
        return heart() if branch == 1 else heart_inverted()

    grid = np.linspace(0.0, math.pi, points)
    electron_cdf = np.asarray(dist_e.cdf(grid), dtype=float)
    weight = electron_cdf if branch == 1 else 1.0 - electron_cdf
    # d(CDF) = p_n0 * 2 * weight * 2 pi sin(theta) dtheta with p_n0 = 1/(4 pi)
    cumulative = cumulative_trapezoid(weight * np.sin(grid), grid, initial=0.0)
    total = cumulative[-1]
    if total <= 0.0:
        raise DomainError("selected branch has zero probability", {"branch": branch})
    if abs(total - 1.0) > 1e-6:
        logger.info("Renormalized reshaped distribution", branch=branch, mass=total)
    return custom_distribution(grid, cumulative / total, label=f"reshaped_{'plus' if branch == 1 else 'minus'}")
