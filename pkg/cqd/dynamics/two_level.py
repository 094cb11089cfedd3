"""
Two-level amplitude equations for passage through the null point.

In dimensionless time tau the interaction-picture amplitudes obey

    f' = [-i sqrt(k1) exp(-i phi_n) - sqrt(k0)] exp(+2i tau^2) g
    g' = [-i sqrt(k1) exp(+i phi_n) + sqrt(k0)] exp(-2i tau^2) f

with phi_n = phi_n0 + w_n tau. The spin-frame amplitudes are
c1 = exp(-i tau^2) f and c2 = exp(+i tau^2) g. With k1 = 0 this is the
Landau-Zener problem of the quadrupole field, |f(+inf)|^2 = exp(-pi k0 / 2).
"""

import cmath
import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.integrate import solve_ivp
from scipy.special import fresnel

from ..errors import DomainError, NumericError
from ..metrics import metrics_collector

logger = structlog.get_logger(__name__)

DEFAULT_TOL = 1e-6
_SPAN_FACTOR = 20.0
_MIN_SPAN_FACTOR = 10.0


@dataclass(frozen=True)
class AmplitudePair:
    f: complex
    g: complex
    tau: float

    @property
    def norm(self) -> float:
        return abs(self.f) ** 2 + abs(self.g) ** 2

    @property
    def stay_probability(self) -> float:
        return abs(self.f) ** 2

    def spin_amplitudes(self) -> Tuple[complex, complex]:
        """(c1, c2) in the spin frame."""
        phase = cmath.exp(-1j * self.tau ** 2)
        return phase * self.f, self.g / phase

    def polar_cosine(self) -> float:
        """cos(theta) of the equivalent classical moment."""
        return abs(self.f) ** 2 - abs(self.g) ** 2


def amplitudes_from_angles(theta: float, phi: float, tau: float) -> Tuple[complex, complex]:
    """Interaction-picture (f, g) of the state cos(theta/2)|+z> + sin(theta/2)e^{i phi}|-z>."""
    c1 = math.cos(theta / 2.0)
    c2 = math.sin(theta / 2.0) * cmath.exp(1j * phi)
    phase = cmath.exp(1j * tau ** 2)
    return c1 * phase, c2 / phase


def default_tau_max(k0: float, k1: float, w_n: float = 0.0) -> float:
    return _SPAN_FACTOR * max(1.0, math.sqrt(k0), math.sqrt(k1)) + abs(w_n) / 4.0


def _chirp_tail(u: float) -> complex:
    """Integral of exp(2i s^2) over s in [u, inf), u >= 0."""
    s_val, c_val = fresnel(2.0 * u / math.sqrt(math.pi))
    return math.sqrt(math.pi) / 2.0 * complex(0.5 - c_val, 0.5 - s_val)


def _tail_integrals(k0: float, k1: float, phi_n0: float, w_n: float,
                    tau_max: float) -> Tuple[complex, complex, complex, complex]:
    """
    First-order couplings accumulated outside [-tau_max, tau_max].

    Returns (A_low, B_low, A_high, B_high): integrals of the f <- g and
    g <- f coupling kernels over (-inf, -tau_max) and (tau_max, inf).
    """
    center = w_n / 4.0
    detune = cmath.exp(-1j * w_n ** 2 / 8.0)
    rot = cmath.exp(-1j * phi_n0)
    root0, root1 = math.sqrt(k0), math.sqrt(k1)

    def a_kernel(static_tail, resonant_tail):
        return -root0 * static_tail - 1j * root1 * rot * detune * resonant_tail

    def b_kernel(static_tail, resonant_tail):
        return root0 * static_tail.conjugate() - 1j * root1 * (rot * detune).conjugate() * resonant_tail.conjugate()

    static = _chirp_tail(tau_max)
    low_res = _chirp_tail(tau_max + center)
    high_res = _chirp_tail(tau_max - center)
    return (a_kernel(static, low_res), b_kernel(static, low_res),
            a_kernel(static, high_res), b_kernel(static, high_res))


def integrate_two_level(k0: float, k1: float = 0.0, phi_n0: float = 0.0, w_n: float = 0.0,
                        tau_max: Optional[float] = None, tol: float = DEFAULT_TOL,
                        initial: Optional[Tuple[complex, complex]] = None,
                        tail_correction: bool = True) -> AmplitudePair:
    """
    Integrate (f, g) from -tau_max to +tau_max.

    Args:
        k0: null-point adiabaticity parameter
        k1: transverse nuclear adiabaticity parameter
        phi_n0: nuclear azimuth at tau = 0
        w_n: nuclear Larmor rate in tau units
        tau_max: half-span, at least 10 max(1, sqrt(k0), sqrt(k1)); default
            20 max(1, sqrt(k0), sqrt(k1)) + |w_n|/4
        tol: allowed norm drift
        initial: (f, g) at -tau_max (default (1, 0), taken as the state at -inf
            when the tail correction is on)
        tail_correction: add first-order Fresnel tails for the truncated span

    Returns:
        AmplitudePair at +tau_max (at +inf with the tail correction)

    Raises:
        NumericError: if the norm drifts by more than 10 tol
    """
    if k0 < 0.0 or k1 < 0.0:
        raise DomainError("adiabaticity parameters must be non-negative", {"k0": k0, "k1": k1})
    if tol <= 0.0:
        raise DomainError("tolerance must be positive", {"tol": tol})
    minimum = _MIN_SPAN_FACTOR * max(1.0, math.sqrt(k0), math.sqrt(k1))
    tau_max = default_tau_max(k0, k1, w_n) if tau_max is None else float(tau_max)
    if tau_max < minimum:
        raise DomainError("tau span too short", {"tau_max": tau_max, "minimum": minimum})
    if tail_correction and tau_max - abs(w_n) / 4.0 <= 0.0:
        raise DomainError("tau span must enclose the resonance", {"tau_max": tau_max, "w_n": w_n})

    f0, g0 = (1.0 + 0j, 0j) if initial is None else (complex(initial[0]), complex(initial[1]))
    root0, root1 = math.sqrt(k0), math.sqrt(k1)

    if tail_correction:
        a_low, b_low, a_high, b_high = _tail_integrals(k0, k1, phi_n0, w_n, tau_max)
        f0, g0 = f0 + a_low * g0, g0 + b_low * f0
        norm = math.sqrt(abs(f0) ** 2 + abs(g0) ** 2)
        f0, g0 = f0 / norm, g0 / norm

    def rhs(tau, y):
        phi_n = phi_n0 + w_n * tau
        chirp = np.exp(2j * tau * tau)
        coupling_f = (-1j * root1 * np.exp(-1j * phi_n) - root0) * chirp
        coupling_g = (-1j * root1 * np.exp(1j * phi_n) + root0) / chirp
        return np.array([coupling_f * y[1], coupling_g * y[0]])

    start = time.time()
    solution = solve_ivp(rhs, (-tau_max, tau_max), np.array([f0, g0], dtype=complex),
                         method="DOP853", rtol=tol * 1e-3, atol=tol * 1e-4)
    steps = int(solution.t.size)
    duration = time.time() - start
    if not solution.success:
        metrics_collector.record_integration("two_level", duration, steps=steps, ok=False)
        raise NumericError(f"two-level integration failed: {solution.message}",
                           {"k0": k0, "k1": k1})

    norms = np.abs(solution.y[0]) ** 2 + np.abs(solution.y[1]) ** 2
    initial_norm = abs(f0) ** 2 + abs(g0) ** 2
    drift = float(np.max(np.abs(norms - initial_norm)))
    metrics_collector.record_integration("two_level", duration, steps=steps, ok=drift <= 10.0 * tol)
    if drift > 10.0 * tol:
        raise NumericError("two-level norm drift exceeded tolerance",
                           {"drift": drift, "tol": tol, "k0": k0, "k1": k1})

    f_end, g_end = complex(solution.y[0, -1]), complex(solution.y[1, -1])
    if tail_correction:
        f_end, g_end = f_end + a_high * g_end, g_end + b_high * f_end
        norm = math.sqrt(abs(f_end) ** 2 + abs(g_end) ** 2)
        f_end, g_end = f_end / norm, g_end / norm

    logger.debug("Two-level integration completed", k0=k0, k1=k1, w_n=w_n, tau_max=tau_max,
                 steps=steps, drift=drift, stay=abs(f_end) ** 2)
    return AmplitudePair(f_end, g_end, tau_max)


def majorana_tau_scale(gamma: float, gradient: float, v: float) -> float:
    """Factor a in tau = a t for a moment crossing a quadrupole null point."""
    return 0.5 * math.sqrt(abs(gamma) * gradient * v)
