"""
Adaptive integration of spin trajectories.
"""

import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.integrate import solve_ivp

from ..atomkit import AtomParams, potassium39
from ..errors import DomainError, NumericError
from ..metrics import metrics_collector
from .equations import DynamicsConfig, SpinState, state_rates

logger = structlog.get_logger(__name__)

FieldFunction = Callable[[float], Tuple[float, float, float]]

DEFAULT_TOL = 1e-8
METHOD = "DOP853"


@dataclass(frozen=True, eq=False)
class SpinTrajectory:
    """Solver-step samples of one trajectory."""
    t: np.ndarray
    theta_e: np.ndarray
    phi_e: np.ndarray
    theta_n: np.ndarray
    phi_n: np.ndarray
    phase_e: np.ndarray
    steps: int

    @property
    def final(self) -> SpinState:
        return self.state(-1)

    def state(self, index: int) -> SpinState:
        return SpinState(float(self.theta_e[index]), float(self.phi_e[index]),
                         float(self.theta_n[index]), float(self.phi_n[index]),
                         float(self.phase_e[index]))

    def __len__(self) -> int:
        return len(self.t)


def _solve(rhs, y0: np.ndarray, t_span: Tuple[float, float], tol: float,
           kind: str, max_step: float, t_eval=None):
    if tol <= 0.0:
        raise DomainError("tolerance must be positive", {"tol": tol})
    start = time.time()
    solution = solve_ivp(rhs, t_span, y0, method=METHOD, rtol=tol, atol=tol * 1e-2,
                         max_step=max_step, t_eval=t_eval)
    duration = time.time() - start
    steps = int(solution.t.size)
    metrics_collector.record_integration(kind, duration, steps=steps, ok=solution.success)
    if not solution.success:
        logger.error("Integration failed", kind=kind, message=solution.message,
                     t_reached=float(solution.t[-1]) if solution.t.size else None)
        raise NumericError(f"{kind} integration failed: {solution.message}",
                           {"t_reached": float(solution.t[-1]) if solution.t.size else t_span[0],
                            "status": solution.status})
    logger.debug("Integration completed", kind=kind, steps=steps, nfev=solution.nfev,
                 duration=duration)
    return solution


def integrate_spin(state0: SpinState, field_fn: FieldFunction, t_span: Sequence[float],
                   config: Optional[DynamicsConfig] = None, tol: float = DEFAULT_TOL,
                   atom: Optional[AtomParams] = None, max_step: float = math.inf,
                   t_eval=None) -> SpinTrajectory:
    """
    Integrate one trajectory over ``t_span`` (seconds).

    Polar angles in the returned samples are clamped to [0, pi]; the
    azimuths are wrapped to [0, 2 pi) and ``phase_e`` is left unwrapped.

    Raises:
        NumericError: on step-size underflow or any other solver failure
    """
    config = config or DynamicsConfig()
    atom = atom or potassium39()

    def rhs(t, y):
        return state_rates(y, field_fn(t), atom, config)

    solution = _solve(rhs, state0.as_vector(), (float(t_span[0]), float(t_span[1])), tol,
                      f"spin_{config.physics.value}", max_step, t_eval)
    y = solution.y
    return SpinTrajectory(
        t=solution.t,
        theta_e=np.clip(y[0], 0.0, math.pi),
        phi_e=np.mod(y[1], 2.0 * math.pi),
        theta_n=np.clip(y[2], 0.0, math.pi),
        phi_n=np.mod(y[3], 2.0 * math.pi),
        phase_e=y[4],
        steps=solution.t.size,
    )


def integrate_ensemble(states: Sequence[SpinState], field_fn: FieldFunction,
                       t_span: Sequence[float], config: Optional[DynamicsConfig] = None,
                       tol: float = DEFAULT_TOL, atom: Optional[AtomParams] = None) -> List[SpinState]:
    """
    Integrate independent trajectories sharing one field in a single solver call.

    Returns the final state of each trajectory, in input order.
    """
    config = config or DynamicsConfig()
    atom = atom or potassium39()
    count = len(states)
    if count == 0:
        return []
    block = np.stack([state.as_vector() for state in states], axis=1)

    def rhs(t, y):
        return state_rates(y.reshape(5, count), field_fn(t), atom, config).reshape(-1)

    solution = _solve(rhs, block.reshape(-1), (float(t_span[0]), float(t_span[1])), tol,
                      f"ensemble_{config.physics.value}", math.inf)
    final = solution.y[:, -1].reshape(5, count)
    logger.info("Ensemble integrated", trajectories=count, steps=solution.t.size)
    return [SpinState.from_vector(final[:, i]) for i in range(count)]
