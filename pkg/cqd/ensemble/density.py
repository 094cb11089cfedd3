"""
Pre-averaging density operators and wave functions in the {+z, -z} basis.

For a fixed electron direction the co-quantum average gives the collapse
weights <C+>^2 = P(theta_n > theta_e) and <C->^2 = P(theta_n < theta_e).
The resulting operator factorizes into a pure state.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.integrate import quad

from ..errors import DomainError
from ..models import DistributionKind, MCEstimate
from .distributions import AngularDistribution, isotropic
from .sampling import MIN_SAMPLES, bernoulli_estimate, chunked_sum, sample

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class DensityMatrix2:
    """2x2 density operator; rows and columns ordered (+z, -z)."""
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise DomainError("density matrix must be 2x2", {"shape": matrix.shape})
        if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=1e-12):
            raise DomainError("density matrix must be Hermitian")
        if abs(np.trace(matrix).real - 1.0) > 1e-9:
            raise DomainError("density matrix must have unit trace", {"trace": np.trace(matrix).real})
        if np.min(np.linalg.eigvalsh(matrix)) < -1e-12:
            raise DomainError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", matrix)

    def __getitem__(self, index):
        return self.matrix[index]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def is_pure(self, tol: float = 1e-12) -> bool:
        return abs(self.purity - 1.0) <= tol


def _collapse_weights(theta_e: float, dist_n: AngularDistribution) -> Tuple[float, float]:
    if not 0.0 <= theta_e <= math.pi:
        raise DomainError("theta_e must lie in [0, pi]", {"theta_e": theta_e})
    minus = float(min(max(dist_n.cdf(theta_e), 0.0), 1.0))
    return 1.0 - minus, minus


def wavefunction(theta_e: float, phi_e: float,
                 dist_n: Optional[AngularDistribution] = None) -> Tuple[complex, complex]:
    """Amplitudes (<C+>, <C-> e^{i phi_e}) on (+z, -z)."""
    plus, minus = _collapse_weights(theta_e, dist_n or isotropic())
    return complex(math.sqrt(plus)), math.sqrt(minus) * cmath.exp(1j * phi_e)


def density_operator(theta_e: float, phi_e: float,
                     dist_n: Optional[AngularDistribution] = None) -> DensityMatrix2:
    """Pre-averaging density operator for one electron direction."""
    plus, minus = _collapse_weights(theta_e, dist_n or isotropic())
    coherence = math.sqrt(plus * minus)
    return DensityMatrix2(np.array([
        [plus, coherence * cmath.exp(-1j * phi_e)],
        [coherence * cmath.exp(1j * phi_e), minus],
    ]))


def mixed_density(dist_e: AngularDistribution,
                  dist_n: Optional[AngularDistribution] = None) -> DensityMatrix2:
    """
    Average of the pre-averaging operator over an isotropic electron ensemble.

    Raises:
        DomainError: for a non-isotropic electron distribution
    """
    if dist_e.kind != DistributionKind.ISOTROPIC:
        raise DomainError("mixed density requires an isotropic electron distribution",
                          {"kind": dist_e.kind.value})
    dist_n = dist_n or isotropic()

    def weight(theta):
        return float(dist_e.pdf(theta)) * 2.0 * math.pi * math.sin(theta)

    minus = quad(lambda t: weight(t) * float(dist_n.cdf(t)), 0.0, math.pi,
                 epsabs=1e-14, epsrel=1e-12)[0]
    polar_coherence = quad(lambda t: weight(t) * math.sqrt(math.prod(_collapse_weights(t, dist_n))),
                           0.0, math.pi, epsabs=1e-14, epsrel=1e-12)[0]
    # Azimuthal average of exp(-i phi)
    azimuth = complex(quad(math.cos, 0.0, 2.0 * math.pi)[0],
                      -quad(math.sin, 0.0, 2.0 * math.pi)[0]) / (2.0 * math.pi)
    off = polar_coherence * azimuth
    plus = 1.0 - minus
    logger.debug("Mixed density computed", plus=plus, minus=minus, off=abs(off))
    return DensityMatrix2(np.array([[plus, off], [off.conjugate(), minus]]))


def mixed_density_mc(n_samples: int, seed: int = 0,
                     dist_n: Optional[AngularDistribution] = None) -> Tuple[DensityMatrix2, np.ndarray]:
    """
    Monte Carlo average of the pre-averaging operator over isotropic electrons.

    Returns the averaged operator and the entrywise standard errors.
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError("at least 1000 samples are required", {"n_samples": n_samples})
    dist_n = dist_n or isotropic()
    dist_e = isotropic()

    def chunk(rng, size):
        theta, phi = sample(dist_e, rng, size)
        minus = np.clip(np.asarray(dist_n.cdf(theta), dtype=float), 0.0, 1.0)
        coherence = np.sqrt((1.0 - minus) * minus)
        real, imag = coherence * np.cos(phi), -coherence * np.sin(phi)
        return [minus.sum(), np.square(minus).sum(), real.sum(), np.square(real).sum(),
                imag.sum(), np.square(imag).sum()]

    sums = chunked_sum(n_samples, seed, "mixed_density", chunk)
    means = sums[0::2] / n_samples
    errors = np.sqrt(np.maximum(sums[1::2] / n_samples - means ** 2, 0.0) / n_samples)
    minus, off = means[0], complex(means[1], means[2])
    matrix = DensityMatrix2(np.array([[1.0 - minus, off], [off.conjugate(), minus]]))
    stderr = np.array([[errors[0], math.hypot(errors[1], errors[2])],
                       [math.hypot(errors[1], errors[2]), errors[0]]])
    return matrix, stderr


def cross_term_mc(dist_n: AngularDistribution, theta_e: float, n_samples: int, seed: int = 0,
                  identical: bool = True) -> MCEstimate:
    """
    Monte Carlo estimate of the co-quantum average <C+ C->.

    With ``identical`` each product pairs the two indicators of the same
    realization, which are mutually exclusive; otherwise the indicators come
    from independent realizations and the average tends to <C+><C->.
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError("at least 1000 samples are required", {"n_samples": n_samples})
    plus, minus = _collapse_weights(theta_e, dist_n)

    def chunk(rng, size):
        first, _ = sample(dist_n, rng, size)
        second = first if identical else sample(dist_n, rng, size)[0]
        c_plus = first > theta_e
        c_minus = second < theta_e
        return [np.count_nonzero(c_plus & c_minus)]

    (count,) = chunked_sum(n_samples, seed, f"cross_term:{'same' if identical else 'independent'}", chunk)
    return bernoulli_estimate(count, n_samples, 0.0 if identical else plus * minus)
