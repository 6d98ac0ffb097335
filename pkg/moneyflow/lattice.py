"""Discrete-time lattice of two currencies.

Currencies can be exchanged only at ``t_n = n dt``. The elementary plaquette
between ``t_n`` and ``t_{n+1}`` carries the round-trip arbitrage return
``S_n / S_{n+1} + S_{n+1} / S_n - 2`` (the lattice curvature). This module
evaluates plaquettes, the discrete action built from them, path weights, and
the single-step transition and Hamiltonian matrices, including their known
defects: the transition matrix is singular and the Hamiltonian diverges as
``1 / dt``.

Example
-------
.. code-block:: python

    from moneyflow.lattice import plaquette_return, transition_matrix

    plaquette_return(1.0, 1.0)            # 0.0, no arbitrage
    transition_matrix(2.0, 1.0).determinant  # 0.0 exactly
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from ._errors import DomainError

logger = logging.getLogger(__name__)

CoefficientRule = Callable[[np.ndarray, float], np.ndarray]

# Each exp rounds within one ulp and the product adds half an ulp.
ENTRIES_DETERMINANT_ULPS = 4


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class RateSequence:
    """Exchange rates ``S_n`` sampled at ``t_n = n dt``."""

    rates: np.ndarray
    dt: float
    beta: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        rates = np.array(self.rates, dtype=float)
        if rates.ndim != 1 or rates.size == 0:
            raise DomainError("rates must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0.0):
            raise DomainError("all rates must be finite and positive")
        rates.flags.writeable = False
        object.__setattr__(self, "rates", rates)
        for name in ("dt", "beta", "sigma2"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))

    def __len__(self) -> int:
        return int(self.rates.size)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.rates.size) * self.dt

    @property
    def log_rates(self) -> np.ndarray:
        return np.log(self.rates)


def sample_log_path(
    y: Callable[[np.ndarray], np.ndarray],
    horizon: float,
    dt: float,
    sigma2: float = 1.0,
    beta: float = 1.0,
    trailing: bool = True,
) -> RateSequence:
    """Sample ``S(t) = exp(y(t))`` on ``t_n = n dt``.

    With ``trailing=True`` the samples run to ``n = N + 1`` where
    ``N dt = horizon``, so that summing plaquettes over ``n = 0..N`` covers
    the action's full summation range. With ``trailing=False`` they stop at
    ``t_N = horizon``.
    """
    horizon, dt = _positive("horizon", horizon), _positive("dt", dt)
    steps = int(round(horizon / dt))
    count = steps + 2 if trailing else steps + 1
    times = np.arange(count) * dt
    return RateSequence(np.exp(y(times)), dt=dt, beta=beta, sigma2=sigma2)


def plaquette_return(s_n: float, s_next: float) -> float:
    """Total arbitrage return around one plaquette, ``>= 0``.

    Evaluated as ``(S_n - S_{n+1})^2 / (S_n S_{n+1})``, which equals
    ``S_n / S_{n+1} + S_{n+1} / S_n - 2`` and cannot round below zero.
    """
    s_n, s_next = _positive("S_n", s_n), _positive("S_next", s_next)
    return (s_n - s_next) ** 2 / (s_n * s_next)


def loop_returns(s_n: float, s_next: float) -> Tuple[float, float]:
    """``(clockwise, counter-clockwise)`` round-trip returns of a plaquette."""
    s_n, s_next = _positive("S_n", s_n), _positive("S_next", s_next)
    return s_next / s_n - 1.0, s_n / s_next - 1.0


def plaquette_returns(seq: RateSequence) -> np.ndarray:
    """Vectorized :func:`plaquette_return` over consecutive pairs."""
    left, right = seq.rates[:-1], seq.rates[1:]
    return (left - right) ** 2 / (left * right)


def continuum_coefficient(sigma2: float) -> CoefficientRule:
    """The rule ``a_n = 1 / (2 sigma2 dt)``, i.e. ``a_n dt -> 1 / (2 sigma2)``."""
    sigma2 = _positive("sigma2", sigma2)

    def rule(n: np.ndarray, dt: float) -> np.ndarray:
        return np.full(np.shape(n), 1.0 / (2.0 * sigma2 * dt))

    return rule


def discrete_action(seq: RateSequence, coefficient: Optional[CoefficientRule] = None) -> float:
    """``A1 = sum_n a_n (S_n / S_{n+1} + S_{n+1} / S_n - 2)`` over consecutive pairs.

    Args:
        seq: At least two rates.
        coefficient: ``rule(n, dt) -> a_n`` evaluated on the integer array of
            plaquette indices; defaults to :func:`continuum_coefficient` with
            the sequence's ``sigma2``.
    """
    if len(seq) < 2:
        raise DomainError("discrete_action needs at least two rates")
    rule = coefficient or continuum_coefficient(seq.sigma2)
    n = np.arange(len(seq) - 1)
    weights = np.asarray(rule(n, seq.dt), dtype=float)
    return float(np.sum(weights * plaquette_returns(seq)))


def continuum_action(
    dydt: Callable[[float], float], horizon: float, sigma2: float = 1.0
) -> float:
    """``(1 / 2 sigma2) * integral_0^horizon (dy/dt)^2 dt`` by adaptive quadrature."""
    sigma2 = _positive("sigma2", sigma2)
    value, abserr = quad(lambda t: dydt(t) ** 2, 0.0, _positive("horizon", horizon), limit=200)
    logger.debug("continuum action quadrature: %r (abs err %.3g)", value, abserr)
    return value / (2.0 * sigma2)


@dataclass(frozen=True)
class LatticePath:
    """Parallel-transport factors ``U_1 ... U_J`` collected along a path."""

    factors: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        factors = tuple(float(u) for u in self.factors)
        for u in factors:
            if not (math.isfinite(u) and u > 0.0):
                raise DomainError(f"transport factors must be positive and finite, got {u!r}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_holdings(
        cls, rates: Sequence[float], start: int, holdings: Iterable[int]
    ) -> "LatticePath":
        """Build the path of a trader who holds ``holdings[n]`` after trading at ``t_n``.

        Currencies are numbered 1 and 2; ``start`` is the holding before
        ``t_0``. Exchanging 2 -> 1 at ``t_n`` contributes ``S_n``, 1 -> 2
        contributes ``1 / S_n``, and keeping the position contributes 1.
        """
        current = start
        factors: List[float] = []
        for s_n, held in zip(rates, holdings):
            if held not in (1, 2) or current not in (1, 2):
                raise DomainError(f"holdings must be currency 1 or 2, got {held!r}")
            s_n = _positive("S_n", s_n)
            if held == current:
                factors.append(1.0)
            elif held == 1:
                factors.append(s_n)
            else:
                factors.append(1.0 / s_n)
            current = held
        return cls(tuple(factors))

    def log_return(self) -> float:
        """``s(Q) = ln(U_1 U_2 ... U_J)``."""
        return float(np.sum(np.log(self.factors))) if self.factors else 0.0


def path_weight(path: LatticePath, beta: float) -> float:
    """Unnormalized weight ``(U_1 ... U_J)^beta = exp(beta s(Q))``."""
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta!r}")
    return float(np.prod(path.factors)) ** beta


@dataclass(frozen=True)
class TransitionMatrix:
    """The single-step matrix ``[[1, S^beta], [S^-beta, 1]]``.

    The hopping weights are kept as ``exp(+-beta ln S)``. :attr:`determinant`
    is the algebraic determinant taken in log space, ``1 - exp(w - w)``, and is
    exactly zero for every input. :attr:`entries_determinant` multiplies the
    rounded :attr:`entries` instead and lands within
    :data:`ENTRIES_DETERMINANT_ULPS` machine epsilons of zero.
    """

    log_weight: float

    @property
    def entries(self) -> np.ndarray:
        return np.array(
            [[1.0, math.exp(self.log_weight)], [math.exp(-self.log_weight), 1.0]], dtype=float
        )

    @property
    def determinant(self) -> float:
        return 1.0 - math.exp(self.log_weight - self.log_weight)

    @property
    def entries_determinant(self) -> float:
        """``e00 e11 - e01 e10`` evaluated on the floating-point entries."""
        e = self.entries
        return float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])

    def column_sums(self) -> np.ndarray:
        """Column sums; a stochastic matrix would have all ones."""
        return self.entries.sum(axis=0)


def transition_matrix(s: float, beta: float) -> TransitionMatrix:
    s = _positive("S", s)
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta!r}")
    return TransitionMatrix(beta * math.log(s))


def apply(m: TransitionMatrix, p: Sequence[float], normalize: bool = False) -> np.ndarray:
    """Matrix-vector product ``m @ p``, optionally rescaled to sum to one."""
    result = m.entries @ np.asarray(p, dtype=float)
    if normalize:
        total = result.sum()
        if total == 0.0:
            raise DomainError("cannot normalize a zero state vector")
        result = result / total
    return result


def hamiltonian_matrix(s: float, beta: float, dt: float) -> np.ndarray:
    """``(1 / dt) [[0, S^beta], [S^-beta, 0]]``, divergent as ``dt -> 0``."""
    m = transition_matrix(s, beta)
    scale = 1.0 / _positive("dt", dt)
    hopping = m.entries - np.eye(2)
    return scale * hopping
