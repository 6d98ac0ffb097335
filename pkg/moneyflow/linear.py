"""Linearized solutions, regime classification and envelope measurement.

About the point ``rho = 1/2``, ``upsilon + eta = 0`` the system reduces to

.. code-block:: text

    rho~'' + 2 gamma rho~' + (alpha2 - 4) rho~ = C0,     eta~ = rho~'

with ``gamma = (alpha1 - k) / 2``: zero for the correct equations and
``(alpha1 - 1) / 2`` for the erratum form. For ``alpha2 > 4`` the solution
oscillates at ``omega = sqrt(alpha2 - 4 - gamma^2)`` about
``C0 / (alpha2 - 4)``, while the mean of ``eta`` drifts at
``-4 C0 / (alpha2 - 4)`` and the mean of ``upsilon`` at the opposite rate.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from ._errors import DegenerateError, FitError
from .dynamics import InitialSpec, ModelParams, resolve_closure
from .integrator import Trajectory

logger = logging.getLogger(__name__)

EXTREMUM_XTOL = 1e-8


class Regime(str, Enum):
    NEUTRAL_OSCILLATION = "neutral-oscillation"
    EXPONENTIAL_DECAY_OF_S = "exponential-decay-of-S"
    EXPONENTIAL_GROWTH_OF_S = "exponential-growth-of-S"
    NON_OSCILLATORY = "non-oscillatory"


class Classification(NamedTuple):
    regime: Regime
    tau_c: Optional[float]


@dataclass(frozen=True)
class LinearPrediction:
    """Closed-form description of the linearized motion.

    For the oscillatory branch ``rho~ = A e^(-damping tau) sin(omega tau + theta)
    + rho_offset``. For the non-oscillatory branch ``omega == 0`` and
    ``rho~ = c1 e^(r1 tau) + c2 e^(r2 tau) + rho_offset`` with
    ``(r1, r2) = exponents`` and ``(c1, c2) = coefficients``.
    """

    omega: float
    nu: float
    amplitude: float
    theta: float
    rho_offset: float
    eta_drift_rate: float
    upsilon_drift_rate: float
    damping: float
    tau_c: float
    exponents: Tuple[float, float]
    coefficients: Tuple[float, float]
    alpha1: float
    alpha2: float
    upsilon_coupling: float
    c0: float
    eta0: float
    upsilon0: float
    rho_tilde0: float

    @property
    def oscillatory(self) -> bool:
        return self.omega > 0.0

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega if self.oscillatory else math.inf


class LinearSolution(NamedTuple):
    rho_tilde: np.ndarray
    eta_tilde: np.ndarray
    eta: np.ndarray
    upsilon: np.ndarray


class EnvelopeFit(NamedTuple):
    """Measured damping, angular frequency and drift rates (all per tau)."""

    damping: float
    omega: float
    drift: float
    upsilon_drift: float
    extrema: int


def time_scale(alpha2: float, c0: float) -> float:
    """``tau_c = 0.25 (alpha2 - 4) / |C0|``; infinite for ``C0 == 0``."""
    if c0 == 0.0:
        return math.inf
    return 0.25 * (alpha2 - 4) / abs(c0)


def classify(params: ModelParams, c0: float) -> Classification:
    """Classify the long-time behaviour of ``S`` from ``alpha2`` and ``C0``."""
    if params.alpha2 <= 4:
        return Classification(Regime.NON_OSCILLATORY, None)
    if c0 == 0.0:
        return Classification(Regime.NEUTRAL_OSCILLATION, None)
    regime = Regime.EXPONENTIAL_DECAY_OF_S if c0 > 0 else Regime.EXPONENTIAL_GROWTH_OF_S
    return Classification(regime, time_scale(params.alpha2, c0))


def linearize(params: ModelParams, spec: InitialSpec) -> LinearPrediction:
    """Linear prediction for an initial spec.

    Raises:
        DegenerateError: For ``alpha2 == 4`` (no general solution of the
            stated form) or a critically damped erratum system.
    """
    c0, _ = resolve_closure(params, spec)
    s = spec.state0
    stiffness = params.alpha2 - 4
    if stiffness == 0.0:
        raise DegenerateError("alpha2 == 4: marginal case, no oscillation frequency exists")

    gamma = (params.alpha1 - params.upsilon_coupling) / 2.0
    discriminant = stiffness - gamma**2
    rho_offset = c0 / stiffness
    x = s.rho_tilde - rho_offset
    v = s.eta_tilde

    if discriminant > 0.0:
        omega = math.sqrt(discriminant)
        amplitude = math.hypot(x, (v + gamma * x) / omega)
        theta = math.atan2(x, (v + gamma * x) / omega)
        exponents = (-gamma, -gamma)
        coefficients = (0.0, 0.0)
    elif discriminant == 0.0:
        raise DegenerateError("critically damped linear system: repeated real exponent")
    else:
        omega = 0.0
        amplitude = theta = 0.0
        root = math.sqrt(-discriminant)
        r1, r2 = -gamma + root, -gamma - root
        c1 = (v - r2 * x) / (r1 - r2)
        exponents = (r1, r2)
        coefficients = (c1, x - c1)

    return LinearPrediction(
        omega=omega,
        nu=omega / (2.0 * math.pi),
        amplitude=amplitude,
        theta=theta,
        rho_offset=rho_offset,
        eta_drift_rate=-4.0 * c0 / stiffness,
        upsilon_drift_rate=4.0 * c0 / stiffness,
        damping=gamma,
        tau_c=time_scale(params.alpha2, c0) if stiffness > 0 else math.inf,
        exponents=exponents,
        coefficients=coefficients,
        alpha1=params.alpha1,
        alpha2=params.alpha2,
        upsilon_coupling=params.upsilon_coupling,
        c0=c0,
        eta0=s.eta,
        upsilon0=s.upsilon,
        rho_tilde0=s.rho_tilde,
    )


def linear_trajectory(pred: LinearPrediction, tau) -> LinearSolution:
    """Evaluate the linear solution at ``tau`` (scalar or array)."""
    tau = np.asarray(tau, dtype=float)
    if pred.oscillatory:
        gamma, omega, amplitude = pred.damping, pred.omega, pred.amplitude
        phase = omega * tau + pred.theta
        envelope = np.exp(-gamma * tau)
        rho_tilde = amplitude * envelope * np.sin(phase) + pred.rho_offset
        eta_tilde = amplitude * envelope * (omega * np.cos(phase) - gamma * np.sin(phase))
        antiderivative = envelope * (-gamma * np.sin(phase) - omega * np.cos(phase)) - (
            -gamma * math.sin(pred.theta) - omega * math.cos(pred.theta)
        )
        integral = amplitude * antiderivative / (gamma**2 + omega**2)
    else:
        (r1, r2), (c1, c2) = pred.exponents, pred.coefficients
        rho_tilde = c1 * np.exp(r1 * tau) + c2 * np.exp(r2 * tau) + pred.rho_offset
        eta_tilde = c1 * r1 * np.exp(r1 * tau) + c2 * r2 * np.exp(r2 * tau)
        integral = c1 * np.expm1(r1 * tau) / r1 + c2 * np.expm1(r2 * tau) / r2
    integral = integral + pred.rho_offset * tau

    shift = rho_tilde - pred.rho_tilde0
    eta = pred.eta0 - pred.alpha1 * shift - pred.alpha2 * integral + pred.c0 * tau
    upsilon = pred.upsilon0 + 4.0 * integral + pred.upsilon_coupling * shift
    return LinearSolution(rho_tilde, eta_tilde, eta, upsilon)


def _uniform_grid(traj: Trajectory, resolution: float) -> np.ndarray:
    count = max(int(math.ceil((traj.t_end - traj.taus[0]) / resolution)), 1) + 1
    return np.linspace(traj.taus[0], traj.t_end, count)


def _extremum_times(traj: Trajectory, resolution: float) -> np.ndarray:
    """Zeros of ``rho'``, i.e. of ``upsilon + eta``, refined by bisection."""
    grid = _uniform_grid(traj, resolution)
    states = traj.sample(grid)
    q = states[:, 0] + states[:, 1]
    positive = q > 0.0
    brackets = np.nonzero(positive[1:] != positive[:-1])[0]

    def q_at(tau: float) -> float:
        eta, upsilon, _ = traj.dense(tau)
        return float(eta + upsilon)

    return np.array(
        [bisect(q_at, grid[i], grid[i + 1], xtol=EXTREMUM_XTOL) for i in brackets], dtype=float
    )


def envelope_fit(traj: Trajectory, resolution: float = 0.01) -> EnvelopeFit:
    """Measure damping, frequency and drift of a numerical trajectory.

    Damping is the negated OLS slope of ``log`` half peak-to-peak amplitude
    between successive extrema of ``rho~``; ``omega`` is ``pi`` over the mean
    spacing of those extrema; the drifts are OLS slopes of ``eta`` and
    ``upsilon`` on a uniform grid.

    Raises:
        FitError: If fewer than three extrema are found.
    """
    times = _extremum_times(traj, resolution)
    if times.size < 3:
        raise FitError(f"need at least 3 extrema of rho, found {times.size}")

    rho_tilde = traj.sample(times)[:, 2] - 0.5
    amplitudes = np.abs(np.diff(rho_tilde)) / 2.0
    midpoints = (times[1:] + times[:-1]) / 2.0
    usable = amplitudes > 0.0
    if np.count_nonzero(usable) < 2:
        raise FitError("oscillation amplitude vanished; cannot fit an envelope")
    slope, _ = np.polyfit(midpoints[usable], np.log(amplitudes[usable]), 1)
    omega = math.pi * (times.size - 1) / (times[-1] - times[0])

    grid = _uniform_grid(traj, resolution)
    states = traj.sample(grid)
    drift, _ = np.polyfit(grid, states[:, 0], 1)
    upsilon_drift, _ = np.polyfit(grid, states[:, 1], 1)

    fit = EnvelopeFit(
        damping=float(-slope),
        omega=float(omega),
        drift=float(drift),
        upsilon_drift=float(upsilon_drift),
        extrema=int(times.size),
    )
    logger.debug("envelope fit: %s", fit)
    return fit
