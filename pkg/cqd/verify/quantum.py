"""
Quantum-mechanical cross-checks of the collapse rule.

Spin moments are reported in units of hbar/2. Frame changes are done with
explicit 3-vectors; closed-form identities are left to the tests.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple

import numpy as np
import structlog
from scipy.integrate import dblquad, quad

from ..dynamics import unit_vector
from ..ensemble import flip_probability, heart, heart_inverted, isotropic, sample
from ..ensemble.sampling import bernoulli_estimate, chunked_sum
from ..errors import DomainError
from ..models import EntangleSummary, MCEstimate, MeasurementRecord, TwoStageResult

logger = structlog.get_logger(__name__)

MIN_TWO_STAGE_SAMPLES = 10_000


def _check_polar(name: str, value: float):
    if not 0.0 <= value <= math.pi:
        raise DomainError(f"{name} must lie in [0, pi]", {name: value})


def uncertainty_suite(theta_ez: float, phi_ez: float) -> MeasurementRecord:
    """
    Sequential z-then-x measurement moments of an electron at (theta_ez, phi_ez).

    The z spread follows from the isotropic collapse weights, the x spread
    from the even x-split of a z-collapsed atom.
    """
    _check_polar("theta_ez", theta_ez)
    moment = unit_vector(theta_ez, phi_ez)
    cos_ey = float(moment[1])

    p_minus = flip_probability(theta_ez, isotropic())
    delta_sz = 2.0 * math.sqrt(max((1.0 - p_minus) * p_minus, 0.0))
    plus_x, minus_x = x_split_after_z(1)
    delta_sx = 2.0 * math.sqrt(plus_x * minus_x)

    s_y = -cos_ey
    residual = abs(delta_sz * delta_sx * abs(math.sin(phi_ez)) - abs(s_y))
    return MeasurementRecord(theta_ez=theta_ez, phi_ez=phi_ez, s_y_exp=s_y,
                             delta_sz=delta_sz, delta_sx=min(delta_sx, 1.0), residual=residual)


def uncertainty_grid(points: int = 100):
    """Measurement records on a points x points grid of theta in [0, pi], phi in [0, 2 pi)."""
    if points < 2:
        raise DomainError("grid needs at least two points per axis", {"points": points})
    thetas = np.linspace(0.0, math.pi, points)
    phis = np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)
    return [uncertainty_suite(float(t), float(p)) for t in thetas for p in phis]


@lru_cache(maxsize=2)
def _x_hemisphere_fraction(sign: float) -> float:
    # Collapse to +x when the co-quantum sits in the -x hemisphere, phi in [pi/2, 3 pi/2]
    def density(phi, theta):
        return (1.0 - sign * math.cos(theta)) / (4.0 * math.pi) * math.sin(theta)

    value, _ = dblquad(density, 0.0, math.pi, 0.5 * math.pi, 1.5 * math.pi,
                       epsabs=1e-10, epsrel=1e-10)
    return value


def x_split_after_z(branch: int) -> Tuple[float, float]:
    """
    Probabilities of +x and -x after the atom collapsed along +z or -z.

    Integrates the reshaped co-quantum density over the x hemispheres.
    """
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1", {"branch": branch})
    plus = _x_hemisphere_fraction(float(branch))
    return plus, 1.0 - plus


def x_split_mc(branch: int, n_samples: int, seed: int = 0) -> MCEstimate:
    """Monte Carlo +x probability after a z collapse onto ``branch``."""
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1", {"branch": branch})
    dist = heart() if branch == 1 else heart_inverted()

    def chunk(rng, size):
        theta, phi = sample(dist, rng, size)
        n_x = np.sin(theta) * np.cos(phi)
        return [np.count_nonzero(n_x < 0.0)]

    (count,) = chunked_sum(n_samples, seed, f"x_split:{branch}", chunk)
    return bernoulli_estimate(count, n_samples, 0.5)


@dataclass(frozen=True)
class EntangledPair:
    """
    Atom 1 angles and a quantization axis; atom 2 sits at the antipodes.

    With ``correlated`` atom 2 is parallel to atom 1 instead.
    """
    theta_e1: float
    phi_e1: float
    theta_n1: float
    phi_n1: float
    quant_axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    correlated: bool = False

    def __post_init__(self):
        _check_polar("theta_e1", self.theta_e1)
        _check_polar("theta_n1", self.theta_n1)
        axis = np.asarray(self.quant_axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise DomainError("quantization axis must be non-zero")
        object.__setattr__(self, "quant_axis", tuple(axis / norm))

    def moments(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(mu_e1, mu_n1, mu_e2, mu_n2) unit vectors."""
        mu_e1 = unit_vector(self.theta_e1, self.phi_e1)
        mu_n1 = unit_vector(self.theta_n1, self.phi_n1)
        partner = 1.0 if self.correlated else -1.0
        return mu_e1, mu_n1, partner * mu_e1, partner * mu_n1


class EntangledOutcome(NamedTuple):
    branch1: int
    branch2: int

    @property
    def undetermined(self) -> bool:
        return self.branch1 == 0


UNDETERMINED = EntangledOutcome(0, 0)


def _branch_from_cosines(cos_e, cos_n):
    # theta_n > theta_e exactly when cos(theta_n) < cos(theta_e)
    return np.sign(cos_e - cos_n).astype(int)


def entangled_outcomes(pair: EntangledPair) -> EntangledOutcome:
    """
    Collapse branches of both atoms along the pair's quantization axis.

    Returns UNDETERMINED when atom 1 has an exact electron/co-quantum tie.
    """
    axis = np.asarray(pair.quant_axis)
    mu_e1, mu_n1, mu_e2, mu_n2 = pair.moments()
    branch1 = int(_branch_from_cosines(np.dot(mu_e1, axis), np.dot(mu_n1, axis)))
    if branch1 == 0:
        return UNDETERMINED
    branch2 = int(_branch_from_cosines(np.dot(mu_e2, axis), np.dot(mu_n2, axis)))
    return EntangledOutcome(branch1, branch2)


def entangle_mc(n_pairs: int, seed: int = 0, correlated: bool = False) -> EntangleSummary:
    """
    Random pairs and random axes: branch statistics and the pairing prediction.

    Atom 1's electron and co-quantum are isotropic; each pair gets its own
    isotropic quantization axis.
    """
    if n_pairs < 1:
        raise DomainError("at least one pair is required", {"n_pairs": n_pairs})
    iso = isotropic()
    partner = 1.0 if correlated else -1.0

    def chunk(rng, size):
        mu_e = unit_vector(*sample(iso, rng, size))
        mu_n = unit_vector(*sample(iso, rng, size))
        axis = unit_vector(*sample(iso, rng, size))
        cos_e1, cos_n1 = np.sum(mu_e * axis, axis=0), np.sum(mu_n * axis, axis=0)
        cos_e2 = np.sum((partner * mu_e) * axis, axis=0)
        cos_n2 = np.sum((partner * mu_n) * axis, axis=0)
        b1 = _branch_from_cosines(cos_e1, cos_n1)
        b2 = _branch_from_cosines(cos_e2, cos_n2)
        determined = b1 != 0
        return [np.count_nonzero(determined & (b1 == 1)),
                np.count_nonzero(determined & (b2 == partner * b1)),
                np.count_nonzero(~determined)]

    experiment = "entangle:correlated" if correlated else "entangle:anti"
    plus, holds, undetermined = chunked_sum(n_pairs, seed, experiment, chunk)
    determined = n_pairs - int(undetermined)
    estimate = bernoulli_estimate(plus, max(determined, 1))
    summary = EntangleSummary(
        n=n_pairs,
        correlated=correlated,
        p_branch1_plus=estimate.estimate,
        stderr=estimate.stderr,
        prediction_holds_fraction=holds / determined if determined else 1.0,
        undetermined=int(undetermined),
    )
    logger.info("Entangled pairs sampled", n=n_pairs, correlated=correlated,
                holds=summary.prediction_holds_fraction)
    return summary


def _check_alpha(alpha: float):
    if not 0.0 <= alpha < math.pi:
        raise DomainError("alpha must lie in [0, pi)", {"alpha": alpha})


def two_stage_cqd(alpha: float) -> float:
    """+z' probability at the second stage after +z selection at the first."""
    # (1 + cos alpha)^2 (2 - cos alpha) / 4, with 1 + cos alpha = 2 cos^2(alpha/2)
    return math.cos(alpha / 2.0) ** 4 * (2.0 - math.cos(alpha))


def two_stage_ratio_closed_form(alpha: float) -> float:
    c = math.cos(alpha)
    return (9.0 - (2.0 * c - 1.0) ** 2) / 8.0


def two_stage_probability(alpha: float, mc_samples: Optional[int] = None,
                          seed: int = 0) -> TwoStageResult:
    """
    Second-stage +z' probability at tilt ``alpha`` against quantum mechanics.

    Raises:
        DomainError: for alpha outside [0, pi); alpha = pi is a 0/0 ratio
    """
    _check_alpha(alpha)
    p_cqd = two_stage_cqd(alpha)
    p_qm = math.cos(alpha / 2.0) ** 2
    return TwoStageResult(
        alpha=alpha,
        p_cqd=p_cqd,
        p_qm=p_qm,
        ratio=p_cqd / p_qm,
        ratio_closed_form=two_stage_ratio_closed_form(alpha),
        mc=two_stage_mc(alpha, mc_samples, seed) if mc_samples else None,
    )


def second_axis(alpha: float) -> np.ndarray:
    """Second-stage quantization axis: +z rotated by alpha about +y."""
    rotation = np.array([[math.cos(alpha), 0.0, math.sin(alpha)],
                         [0.0, 1.0, 0.0],
                         [-math.sin(alpha), 0.0, math.cos(alpha)]])
    return rotation @ np.array([0.0, 0.0, 1.0])


def two_stage_mc(alpha: float, n_samples: int, seed: int = 0) -> MCEstimate:
    """
    Monte Carlo second-stage probability.

    Co-quanta are drawn from the heart shape left by the first stage; the
    electron sits at +z, so it is at polar angle alpha from the new axis and
    collapses to +z' when the co-quantum's angle from that axis exceeds alpha.
    """
    _check_alpha(alpha)
    if n_samples < MIN_TWO_STAGE_SAMPLES:
        raise DomainError("at least 10000 samples are required", {"n_samples": n_samples})
    axis = second_axis(alpha)
    electron = np.array([0.0, 0.0, 1.0])
    cos_e = float(np.dot(electron, axis))
    dist = heart()

    def chunk(rng, size):
        theta, phi = sample(dist, rng, size)
        cos_n = axis @ unit_vector(theta, phi)
        return [np.count_nonzero(cos_n < cos_e)]

    (count,) = chunked_sum(n_samples, seed, "two_stage", chunk)
    return bernoulli_estimate(count, n_samples, two_stage_cqd(alpha))


def two_stage_quadrature(alpha: float) -> float:
    """
    Second-stage probability by integrating the heart shape over the region
    collapsing to +z'.

    For each co-quantum polar angle the admissible azimuths form an arc whose
    length is known, leaving a one-dimensional integral.
    """
    _check_alpha(alpha)
    if alpha == 0.0:
        return 1.0
    cos_a, sin_a = math.cos(alpha), math.sin(alpha)

    def arc(theta):
        sin_t = math.sin(theta)
        if sin_t == 0.0:
            return 2.0 * math.pi if math.cos(theta) < cos_a else 0.0
        bound = cos_a * (1.0 - math.cos(theta)) / (sin_t * sin_a)
        if bound >= 1.0:
            return 2.0 * math.pi
        if bound <= -1.0:
            return 0.0
        return 2.0 * math.pi - 2.0 * math.acos(bound)

    value, _ = quad(lambda t: (1.0 - math.cos(t)) / (4.0 * math.pi) * math.sin(t) * arc(t),
                    0.0, math.pi, epsabs=1e-13, epsrel=1e-11, limit=200)
    return value
