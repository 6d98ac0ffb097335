"""Equations of motion of the fast money flow model.

The state is ``(eta, upsilon, rho)``: the dimensionless log exchange rate
``eta = beta * ln S``, the phase difference ``upsilon = phi1 - phi2`` and the
fraction ``rho`` of agents holding currency 1. Time is the dimensionless
``tau = h * t``. The first-order system is

.. code-block:: text

    eta'     = alpha2 (1/2 - rho) - 2 alpha1 sqrt(rho (1 - rho)) sinh(upsilon + eta) + C0
    upsilon' = (2 rho - 1) / sqrt(rho (1 - rho)) cosh(upsilon + eta)
               + 2 k sqrt(rho (1 - rho)) sinh(upsilon + eta)
    rho'     = 2 sqrt(rho (1 - rho)) sinh(upsilon + eta)

with ``k = alpha1`` for :attr:`Variant.CORRECT` and ``k = 1`` for
:attr:`Variant.ILINSKI_ERRATUM`, the form in which the equations were
originally printed.

Example
-------
.. code-block:: python

    from moneyflow import InitialSpec, ModelParams, State, resolve_closure, rhs

    params = ModelParams(alpha1=1.5, alpha2=10.0)
    state = State(eta=0.2, upsilon=0.0, rho=0.5)
    d = rhs(params, 0.0, state)
    print(d.rho_prime)  # 0.2013...

    c0, eta_prime0 = resolve_closure(params, InitialSpec(state, c0=0.0))
    print(eta_prime0)  # -0.3020...
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from ._errors import DomainError, NonFiniteError

logger = logging.getLogger(__name__)

# Tolerance for the closure identity, in units in the last place of the summed
# term magnitudes.
CLOSURE_ULPS = 4

ArrayLike = Union[float, np.ndarray]


class Variant(str, Enum):
    """Which form of the upsilon equation to integrate."""

    CORRECT = "correct"
    ILINSKI_ERRATUM = "ilinski-erratum"

    @classmethod
    def parse(cls, value: Union[str, "Variant"]) -> "Variant":
        """Accept a member, its value, or its name in any case.

        ``"erratum"`` is accepted as shorthand for ``ILINSKI_ERRATUM``.
        """
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("_", "-")
        if text == "erratum":
            return cls.ILINSKI_ERRATUM
        for member in cls:
            if text in (member.value, member.name.lower().replace("_", "-")):
                return member
        raise DomainError(f"unknown variant {value!r}; expected one of {[m.value for m in cls]}")


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless couplings of the model.

    Args:
        alpha1: Farmer coupling ``2 beta f`` (>= 0).
        alpha2: Volatility coupling ``M beta^2 sigma^2 / h`` (> 0).
        beta: Log-rate scale (> 0). Enters only the observables S and R.
        variant: :class:`Variant` (or its string value).
    """

    alpha1: float
    alpha2: float
    beta: float = 1.0
    variant: Variant = Variant.CORRECT

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2", "beta"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.alpha1 < 0:
            raise DomainError(f"alpha1 must be >= 0, got {self.alpha1!r}")
        if self.alpha2 <= 0:
            raise DomainError(f"alpha2 must be > 0, got {self.alpha2!r}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta!r}")
        object.__setattr__(self, "variant", Variant.parse(self.variant))

    @property
    def upsilon_coupling(self) -> float:
        """Coefficient ``k`` of the sinh term in the upsilon equation."""
        return self.alpha1 if self.variant is Variant.CORRECT else 1.0

    def with_variant(self, variant: Union[str, Variant]) -> "ModelParams":
        return dataclasses.replace(self, variant=Variant.parse(variant))


@dataclass(frozen=True)
class RawParams:
    """Dimensional market parameters.

    Args:
        sigma2: Volatility (1/time).
        h: Transition rate (1/time); sets ``tau = h * t``.
        M: Number of agents.
        f: Farmer coefficient (>= 0).
        beta: Log-rate scale.
        T: Investment horizon (time).
    """

    sigma2: float
    h: float
    M: int
    f: float
    beta: float = 1.0
    T: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sigma2", "h", "f", "beta", "T"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        for name in ("sigma2", "h", "beta", "T"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.f < 0:
            raise DomainError(f"f must be >= 0, got {self.f!r}")
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be an integer >= 1, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))

    def derive(self, variant: Union[str, Variant] = Variant.CORRECT) -> ModelParams:
        """Return ``alpha1 = 2 beta f`` and ``alpha2 = M beta^2 sigma2 / h``."""
        return ModelParams(
            alpha1=2 * self.beta * self.f,
            alpha2=self.M * self.beta**2 * self.sigma2 / self.h,
            beta=self.beta,
            variant=variant,
        )

    def to_tau(self, t: ArrayLike) -> ArrayLike:
        return self.h * t

    def to_time(self, tau: ArrayLike) -> ArrayLike:
        return tau / self.h

    @property
    def horizon_tau(self) -> float:
        """The investment horizon in units of tau."""
        return self.h * self.T


@dataclass(frozen=True)
class State:
    """A point ``(eta, upsilon, rho)`` of the phase space, with ``0 < rho < 1``."""

    eta: float
    upsilon: float
    rho: float

    def __post_init__(self) -> None:
        for name in ("eta", "upsilon", "rho"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise NonFiniteError(f"state component {name} is not finite: {value!r}")
            object.__setattr__(self, name, value)
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (0, 1), got {self.rho!r}")

    @property
    def rho_tilde(self) -> float:
        return self.rho - 0.5

    @property
    def eta_tilde(self) -> float:
        return self.upsilon + self.eta

    def exchange_rate(self, beta: float = 1.0) -> float:
        """``S = exp(eta / beta)``."""
        return math.exp(self.eta / beta)

    def as_array(self) -> np.ndarray:
        return np.array([self.eta, self.upsilon, self.rho], dtype=float)

    @classmethod
    def from_array(cls, values) -> "State":
        eta, upsilon, rho = (float(v) for v in values)
        return cls(eta, upsilon, rho)


@dataclass(frozen=True)
class Derivatives:
    """``(eta', upsilon', rho')`` per unit tau."""

    eta_prime: float
    upsilon_prime: float
    rho_prime: float

    def as_array(self) -> np.ndarray:
        return np.array([self.eta_prime, self.upsilon_prime, self.rho_prime], dtype=float)


@dataclass(frozen=True)
class InitialSpec:
    """Initial state plus exactly one of ``c0`` or ``eta_prime0``.

    The missing value follows from the closure relation
    ``C0 = eta'(0) + alpha1 rho'(0) + alpha2 (rho(0) - 1/2)``; see
    :func:`resolve_closure`.
    """

    state0: State
    c0: Optional[float] = None
    eta_prime0: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.c0 is None) == (self.eta_prime0 is None):
            raise DomainError("exactly one of c0 and eta_prime0 must be given")
        if self.c0 is not None:
            object.__setattr__(self, "c0", _require_finite("c0", self.c0))
        if self.eta_prime0 is not None:
            object.__setattr__(self, "eta_prime0", _require_finite("eta_prime0", self.eta_prime0))

    @classmethod
    def from_c0(cls, state0: State, c0: float) -> "InitialSpec":
        return cls(state0, c0=c0)

    @classmethod
    def from_eta_prime(cls, state0: State, eta_prime0: float) -> "InitialSpec":
        return cls(state0, eta_prime0=eta_prime0)


class Observables(NamedTuple):
    """Market observables derived from a state and its derivatives.

    ``psi1`` and ``psi2`` are ``None`` unless the agent count is known.
    """

    S: float
    R: float
    F: float
    psi1: Optional[complex]
    psi2: Optional[complex]


def vector_field(
    params: ModelParams, c0: float, eta: ArrayLike, upsilon: ArrayLike, rho: ArrayLike
) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Evaluate the right-hand side on scalars or arrays without domain checks.

    This is the kernel shared by :func:`rhs`, the integrator and every sampled
    output, so the closure identity holds identically across all of them.
    """
    q = upsilon + eta
    root = np.sqrt(rho * (1.0 - rho))
    rho_prime = 2.0 * root * np.sinh(q)
    eta_prime = params.alpha2 * (0.5 - rho) - params.alpha1 * rho_prime + c0
    upsilon_prime = (2.0 * rho - 1.0) / root * np.cosh(q) + params.upsilon_coupling * rho_prime
    return eta_prime, upsilon_prime, rho_prime


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho!r}")


def rhs(params: ModelParams, c0: float, s: State) -> Derivatives:
    """Right-hand side of the equations of motion at state ``s``.

    Raises:
        DomainError: If ``rho`` is not in ``(0, 1)``.
        NonFiniteError: If any derivative is NaN or infinite.
    """
    _check_rho(s.rho)
    eta_prime, upsilon_prime, rho_prime = (
        float(v) for v in vector_field(params, c0, s.eta, s.upsilon, s.rho)
    )
    if not (math.isfinite(eta_prime) and math.isfinite(upsilon_prime) and math.isfinite(rho_prime)):
        raise NonFiniteError(
            f"non-finite derivatives ({eta_prime}, {upsilon_prime}, {rho_prime}) at {s}"
        )
    return Derivatives(eta_prime, upsilon_prime, rho_prime)


def linearized_rhs(params: ModelParams, c0: float, s: State) -> Derivatives:
    """The system linearized about ``rho = 1/2``, ``upsilon + eta = 0``.

    ``rho~' = eta~``, ``eta' = -alpha2 rho~ - alpha1 eta~ + C0`` and
    ``upsilon' = 4 rho~ + k eta~``.
    """
    rho_tilde, eta_tilde = s.rho_tilde, s.eta_tilde
    return Derivatives(
        eta_prime=-params.alpha2 * rho_tilde - params.alpha1 * eta_tilde + c0,
        upsilon_prime=4.0 * rho_tilde + params.upsilon_coupling * eta_tilde,
        rho_prime=eta_tilde,
    )


def resolve_closure(params: ModelParams, spec: InitialSpec) -> Tuple[float, float]:
    """Return the consistent pair ``(c0, eta_prime0)`` for an initial spec.

    ``rho'(0)`` always comes from the rho equation, so giving either value
    determines the other.
    """
    s = spec.state0
    _check_rho(s.rho)
    rho_prime0 = float(2.0 * math.sqrt(s.rho * (1.0 - s.rho)) * math.sinh(s.upsilon + s.eta))
    if spec.c0 is not None:
        c0 = spec.c0
        eta_prime0 = params.alpha2 * (0.5 - s.rho) - params.alpha1 * rho_prime0 + c0
    else:
        eta_prime0 = float(spec.eta_prime0)  # type: ignore[arg-type]
        c0 = eta_prime0 + params.alpha1 * rho_prime0 + params.alpha2 * (s.rho - 0.5)
    logger.debug("closure resolved: c0=%r eta_prime0=%r", c0, eta_prime0)
    return c0, eta_prime0


def closure_defect(
    params: ModelParams, c0: float, rho: ArrayLike, eta_prime: ArrayLike, rho_prime: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    """Residual of ``eta' + alpha1 rho' + alpha2 (rho - 1/2) = C0`` and its scale.

    Returns:
        ``(residual, bound)`` where ``bound`` is :data:`CLOSURE_ULPS` units in
        the last place of the summed absolute term magnitudes.
    """
    farmer = params.alpha1 * rho_prime
    restoring = params.alpha2 * (rho - 0.5)
    residual = np.abs(eta_prime + farmer + restoring - c0)
    scale = np.abs(eta_prime) + np.abs(farmer) + np.abs(restoring) + abs(c0)
    return residual, CLOSURE_ULPS * np.spacing(scale)


def lagrangian(params: ModelParams, s: State, d: Derivatives) -> float:
    """Reduced Lagrangian (the ``phi2'`` term is a total derivative and dropped)."""
    _check_rho(s.rho)
    kinetic = (d.eta_prime + params.alpha1 * d.rho_prime) ** 2 / (2.0 * params.alpha2)
    hopping = 2.0 * math.sqrt(s.rho * (1.0 - s.rho)) * math.cosh(s.eta_tilde)
    return -kinetic + s.rho * d.upsilon_prime + hopping


def energy_array(
    params: ModelParams, c0: float, eta: ArrayLike, upsilon: ArrayLike, rho: ArrayLike
) -> ArrayLike:
    """Vectorized :func:`energy` without domain checks."""
    drive = params.alpha2 * (0.5 - rho) + c0
    return -(drive**2) / (2.0 * params.alpha2) - 2.0 * np.sqrt(rho * (1.0 - rho)) * np.cosh(
        upsilon + eta
    )


def energy(params: ModelParams, c0: float, s: State) -> float:
    """First integral of the correct-variant flow.

    ``E = -(alpha2 (1/2 - rho) + C0)^2 / (2 alpha2) - 2 sqrt(rho (1 - rho)) cosh(upsilon + eta)``.
    Along the erratum flow ``dE/dtau = (alpha1 - 1) rho'^2``, so it is not conserved there.
    """
    _check_rho(s.rho)
    return float(energy_array(params, c0, s.eta, s.upsilon, s.rho))


def observables(
    params: ModelParams, s: State, d: Derivatives, raw: Optional[RawParams] = None
) -> Observables:
    """Exchange rate, return, Farmer's term and the coherent-state amplitudes.

    ``f`` is taken from ``raw`` when given, otherwise from ``alpha1 / (2 beta)``.
    The amplitudes use the gauge ``phi2 = 0``, ``phi1 = upsilon``.
    """
    _check_rho(s.rho)
    f = raw.f if raw is not None else params.alpha1 / (2.0 * params.beta)
    psi1 = psi2 = None
    if raw is not None:
        psi1 = complex(math.sqrt(raw.M * s.rho) * np.exp(-1j * s.upsilon))
        psi2 = complex(math.sqrt(raw.M * (1.0 - s.rho)))
    return Observables(
        S=s.exchange_rate(params.beta),
        R=d.eta_prime / params.beta,
        F=f * (2.0 * s.rho - 1.0),
        psi1=psi1,
        psi2=psi2,
    )


def gauge_shift(s: State, c: float) -> State:
    """Redenominate: ``(eta + c, upsilon - c, rho)``."""
    return State(s.eta + c, s.upsilon - c, s.rho)


def swap_currencies(s: State, c0: float) -> Tuple[State, float]:
    """Exchange the roles of the two currencies: ``(-eta, -upsilon, 1 - rho)``, ``-C0``."""
    return State(-s.eta, -s.upsilon, 1.0 - s.rho), -c0
