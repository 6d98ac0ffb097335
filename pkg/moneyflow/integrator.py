"""Adaptive integration of the equations of motion.

Integration uses :func:`scipy.integrate.solve_ivp` with an explicit embedded
Runge-Kutta pair (``DOP853`` by default, ``RK45`` selectable) and the method's
own continuous extension for dense output. Leaving the band
``rho_epsilon < rho < 1 - rho_epsilon`` stops the solve through a terminal
event; the resulting :class:`Trajectory` records this as
``TerminationKind.BOUNDARY_REACHED`` instead of raising. A solver failure raises
:class:`StepFailure` whose partial trajectory is marked ``STEP_FAILED``.

Example
-------
.. code-block:: python

    from moneyflow import InitialSpec, IntegratorConfig, ModelParams, State, integrate

    params = ModelParams(alpha1=1.5, alpha2=10.0)
    spec = InitialSpec(State(eta=0.2, upsilon=0.0, rho=0.5), c0=0.0)
    traj = integrate(params, spec, IntegratorConfig(t_end=50.0))
    print(traj.termination.kind)  # TerminationKind.COMPLETED
    print(traj.state_at(25.0))
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from ._errors import DomainError, StepFailure
from .dynamics import (
    InitialSpec,
    ModelParams,
    State,
    closure_defect,
    resolve_closure,
    vector_field,
)

logger = logging.getLogger(__name__)

METHODS = ("DOP853", "RK45")


@dataclass(frozen=True)
class IntegratorConfig:
    """Solver settings. Times are in units of tau."""

    t_end: float = 50.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    rho_epsilon: float = 1e-12
    method: str = "DOP853"

    def __post_init__(self) -> None:
        for name in ("t_end", "rel_tol", "abs_tol", "max_step", "rho_epsilon"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, value)
        if self.rho_epsilon >= 0.5:
            raise DomainError(f"rho_epsilon must be < 0.5, got {self.rho_epsilon!r}")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")


class TerminationKind(str, Enum):
    COMPLETED = "completed"
    BOUNDARY_REACHED = "boundary-reached"
    STEP_FAILED = "step-failed"


@dataclass(frozen=True)
class Termination:
    """How an integration ended and at which tau."""

    kind: TerminationKind
    tau: float

    @property
    def completed(self) -> bool:
        return self.kind is TerminationKind.COMPLETED


@dataclass(frozen=True)
class Trajectory:
    """An immutable, densely interpolated solution.

    Attributes:
        params: Parameters the trajectory was produced with.
        c0: The closure constant used.
        taus: Accepted step times, strictly increasing, starting at 0.
        states: ``(n, 3)`` array of ``(eta, upsilon, rho)`` at ``taus``.
        derivatives: ``(n, 3)`` array of ``(eta', upsilon', rho')`` evaluated
            from the right-hand side when the trajectory was built.
        termination: :class:`Termination`.
        dense: The solver's continuous extension, callable on tau.
    """

    params: ModelParams
    c0: float
    taus: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    termination: Termination
    dense: Callable[[Any], np.ndarray] = field(repr=False, compare=False)

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=float)
        states = np.asarray(self.states, dtype=float)
        derivatives = np.asarray(self.derivatives, dtype=float)
        if states.shape != (taus.size, 3) or derivatives.shape != states.shape:
            raise ValueError(
                f"inconsistent shapes: taus {taus.shape}, states {states.shape}, "
                f"derivatives {derivatives.shape}"
            )
        for name, array in (("taus", taus), ("states", states), ("derivatives", derivatives)):
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    def __len__(self) -> int:
        return int(self.taus.size)

    @property
    def t_end(self) -> float:
        return float(self.taus[-1])

    @property
    def eta(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def upsilon(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def rho(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def initial_state(self) -> State:
        return State.from_array(self.states[0])

    def sample(self, taus) -> np.ndarray:
        """Interpolated states at ``taus`` as an ``(n, 3)`` array."""
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        if taus.size and (taus.min() < self.taus[0] or taus.max() > self.t_end):
            raise DomainError(
                f"requested tau outside [{self.taus[0]}, {self.t_end}]: "
                f"[{taus.min()}, {taus.max()}]"
            )
        return np.asarray(self.dense(taus), dtype=float).reshape(3, -1).T

    def state_at(self, tau: float) -> State:
        return State.from_array(self.sample(tau)[0])

    def derivatives_at(self, taus) -> np.ndarray:
        """Right-hand side evaluated on the interpolated states, ``(n, 3)``."""
        states = self.sample(taus)
        return np.column_stack(
            vector_field(self.params, self.c0, states[:, 0], states[:, 1], states[:, 2])
        )


def _boundary_events(epsilon: float) -> List[Callable[[float, np.ndarray], float]]:
    def lower(t: float, y: np.ndarray) -> float:
        return y[2] - epsilon

    def upper(t: float, y: np.ndarray) -> float:
        return (1.0 - epsilon) - y[2]

    for event in (lower, upper):
        event.terminal = True  # type: ignore[attr-defined]
        event.direction = -1  # type: ignore[attr-defined]
    return [lower, upper]


def _field(params: ModelParams, c0: float) -> Callable[[float, np.ndarray], np.ndarray]:
    def fun(t: float, y: np.ndarray) -> np.ndarray:
        # Trial stages may step past the boundary; the NaNs reject the step.
        with np.errstate(invalid="ignore"):
            return np.array(vector_field(params, c0, y[0], y[1], y[2]))

    return fun


def _solve(params: ModelParams, c0: float, y0: np.ndarray, t_span, cfg: IntegratorConfig):
    return solve_ivp(
        _field(params, c0),
        t_span,
        y0,
        method=cfg.method,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        dense_output=True,
        events=_boundary_events(cfg.rho_epsilon),
    )


def _build(params: ModelParams, c0: float, solution, termination: Termination) -> Trajectory:
    states = np.ascontiguousarray(solution.y.T)
    derivatives = np.column_stack(
        vector_field(params, c0, states[:, 0], states[:, 1], states[:, 2])
    )
    return Trajectory(
        params=params,
        c0=c0,
        taus=solution.t,
        states=states,
        derivatives=derivatives,
        termination=termination,
        dense=solution.sol,
    )


def integrate(
    params: ModelParams, spec: InitialSpec, cfg: Optional[IntegratorConfig] = None
) -> Trajectory:
    """Integrate from ``spec`` over ``[0, cfg.t_end]``.

    Identical inputs give bit-identical samples on one platform.

    Raises:
        DomainError: If the initial state is outside the rho band.
        StepFailure: If the solver gives up; ``.partial`` holds what was solved.
    """
    cfg = cfg or IntegratorConfig()
    c0, _ = resolve_closure(params, spec)
    state0 = spec.state0
    if not cfg.rho_epsilon < state0.rho < 1.0 - cfg.rho_epsilon:
        raise DomainError(
            f"initial rho {state0.rho!r} outside [{cfg.rho_epsilon}, {1.0 - cfg.rho_epsilon}]"
        )

    solution = _solve(params, c0, state0.as_array(), (0.0, cfg.t_end), cfg)
    logger.debug(
        "solve_ivp(%s) status=%d steps=%d nfev=%d",
        cfg.method,
        solution.status,
        solution.t.size,
        solution.nfev,
    )

    if solution.status == -1:
        partial = None
        if solution.t.size > 1:
            try:
                partial = _build(
                    params,
                    c0,
                    solution,
                    Termination(TerminationKind.STEP_FAILED, float(solution.t[-1])),
                )
            except (ValueError, TypeError):
                partial = None
        raise StepFailure(
            f"integration failed at tau={solution.t[-1]!r}: {solution.message}", partial
        )

    if solution.status == 1:
        tau = float(solution.t[-1])
        logger.warning("rho left the band [eps, 1 - eps] at tau=%r", tau)
        termination = Termination(TerminationKind.BOUNDARY_REACHED, tau)
    else:
        termination = Termination(TerminationKind.COMPLETED, float(solution.t[-1]))
    return _build(params, c0, solution, termination)


def propagate(
    params: ModelParams,
    c0: float,
    state: State,
    tau_from: float,
    tau_to: float,
    cfg: Optional[IntegratorConfig] = None,
) -> State:
    """Carry ``state`` from ``tau_from`` to ``tau_to`` (either direction).

    Raises:
        DomainError: If rho leaves the band on the way.
        StepFailure: If the solver gives up.
    """
    cfg = cfg or IntegratorConfig()
    solution = _solve(params, c0, state.as_array(), (tau_from, tau_to), cfg)
    if solution.status == -1:
        raise StepFailure(f"propagation failed: {solution.message}")
    if solution.status == 1:
        raise DomainError(f"rho left the band during propagation at tau={solution.t[-1]!r}")
    return State.from_array(solution.y[:, -1])


def closure_residual(traj: Trajectory) -> float:
    """Largest ``|eta' + alpha1 rho' + alpha2 (rho - 1/2) - C0|`` over the samples.

    Uses the derivatives stored with the trajectory, so a sample altered
    after construction shows up as a large residual.
    """
    residual, _ = closure_defect(
        traj.params, traj.c0, traj.rho, traj.derivatives[:, 0], traj.derivatives[:, 2]
    )
    return float(np.max(residual))
