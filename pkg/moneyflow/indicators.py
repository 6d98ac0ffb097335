"""Volume and return indicators built from a trajectory.

Trading volume is identified with ``V = |rho'|`` and the return with
``R = eta' / beta = S' / S``. Positive and negative volume indices follow the
usual market convention: PVI is multiplied by ``1 + r_k`` on steps where the
volume strictly rises, NVI on steps where it strictly falls, with
``r_k = S_k / S_{k-1} - 1``. A second, stylized continuous PVI (flat while
volume falls, slope ``sign(R)`` while it rises) is provided so the two
constructions can be compared with :func:`compare_indicators`.

Example
-------
.. code-block:: python

    import numpy as np
    from moneyflow.indicators import volume_indices

    pvi, nvi = volume_indices(np.array([1.0, 2.0, 1.0]), np.array([0.05, 0.03]))
    # pvi -> [1000, 1050, 1050], nvi -> [1000, 1000, 1030]
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.stats import spearmanr

from ._errors import GridMismatch, SamplingError
from .dynamics import vector_field
from .integrator import Trajectory

logger = logging.getLogger(__name__)

DEFAULT_DTAU = 0.05
DEFAULT_BASE = 1000.0


class IndexTrace(NamedTuple):
    """Index levels on a time grid."""

    taus: np.ndarray
    levels: np.ndarray
    name: str = ""


class DivergenceReport(NamedTuple):
    max_gap: float
    rank_correlation: float
    first_disagreement: Optional[float]


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class IndicatorSeries:
    """Volume, return and price samples with optional PVI/NVI levels."""

    taus: np.ndarray
    V: np.ndarray
    R: np.ndarray
    S: np.ndarray
    beta: float = 1.0
    base: float = DEFAULT_BASE
    PVI: Optional[np.ndarray] = None
    NVI: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        for name in ("taus", "V", "R", "S", "PVI", "NVI"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value))
        size = self.taus.size
        for name in ("V", "R", "S", "PVI", "NVI"):
            value = getattr(self, name)
            if value is not None and value.shape != (size,):
                raise SamplingError(f"{name} has shape {value.shape}, expected ({size},)")
        if np.any(self.V < 0.0):
            raise SamplingError("volume must be non-negative")

    def __len__(self) -> int:
        return int(self.taus.size)

    def returns(self) -> np.ndarray:
        """Per-step price returns ``S_k / S_{k-1} - 1`` (length ``n - 1``)."""
        return self.S[1:] / self.S[:-1] - 1.0

    def pvi_trace(self) -> IndexTrace:
        if self.PVI is None:
            raise ValueError("PVI not computed; call recursive_pvi_nvi first")
        return IndexTrace(self.taus, self.PVI, "PVI")

    def nvi_trace(self) -> IndexTrace:
        if self.NVI is None:
            raise ValueError("NVI not computed; call recursive_pvi_nvi first")
        return IndexTrace(self.taus, self.NVI, "NVI")


def sampling_grid(traj: Trajectory, dtau: float) -> np.ndarray:
    """Times ``tau_0 + k dtau`` that lie within the trajectory."""
    if not (math.isfinite(dtau) and dtau > 0.0):
        raise SamplingError(f"dtau must be positive, got {dtau!r}")
    start = float(traj.taus[0])
    count = int(math.floor((traj.t_end - start) / dtau + 1e-9)) + 1
    taus = start + np.arange(count) * dtau
    return taus[taus <= traj.t_end]


def sample_indicators(
    traj: Trajectory,
    beta: Optional[float] = None,
    dtau_s: float = DEFAULT_DTAU,
    base: float = DEFAULT_BASE,
) -> IndicatorSeries:
    """Sample ``V``, ``R`` and ``S`` at ``tau_k = k dtau_s``.

    ``R`` is ``eta' / beta``; ``beta`` defaults to the trajectory's own.

    Raises:
        SamplingError: If ``dtau_s <= 0`` or the trajectory spans less than
            two sampling intervals.
    """
    beta = traj.params.beta if beta is None else float(beta)
    if not (math.isfinite(dtau_s) and dtau_s > 0.0):
        raise SamplingError(f"dtau_s must be positive, got {dtau_s!r}")
    span = traj.t_end - float(traj.taus[0])
    if span < 2.0 * dtau_s:
        raise SamplingError(f"trajectory spans {span!r}, need at least {2.0 * dtau_s!r}")

    taus = sampling_grid(traj, dtau_s)
    states = traj.sample(taus)
    eta_prime, _, rho_prime = vector_field(
        traj.params, traj.c0, states[:, 0], states[:, 1], states[:, 2]
    )
    return IndicatorSeries(
        taus=taus,
        V=np.abs(rho_prime),
        R=eta_prime / beta,
        S=np.exp(states[:, 0] / beta),
        beta=beta,
        base=base,
    )


def volume_indices(
    volume: np.ndarray, returns: np.ndarray, base: float = DEFAULT_BASE
) -> Tuple[np.ndarray, np.ndarray]:
    """The PVI/NVI recursion.

    Args:
        volume: ``n`` volume samples.
        returns: ``n - 1`` per-step returns, ``returns[k - 1]`` belonging to step ``k``.
        base: Level at the first sample.

    Returns:
        ``(pvi, nvi)``, each of length ``n``. Ties update neither index.
    """
    volume = np.asarray(volume, dtype=float)
    returns = np.asarray(returns, dtype=float)
    if returns.shape != (max(volume.size - 1, 0),):
        raise SamplingError(
            f"expected {volume.size - 1} returns for {volume.size} volumes, got {returns.size}"
        )
    rising = volume[1:] > volume[:-1]
    falling = volume[1:] < volume[:-1]
    growth = 1.0 + returns
    pvi = base * np.concatenate(([1.0], np.cumprod(np.where(rising, growth, 1.0))))
    nvi = base * np.concatenate(([1.0], np.cumprod(np.where(falling, growth, 1.0))))
    return pvi, nvi


def recursive_pvi_nvi(series: IndicatorSeries) -> IndicatorSeries:
    """Return a copy of ``series`` with PVI and NVI filled in."""
    pvi, nvi = volume_indices(series.V, series.returns(), series.base)
    return dataclasses.replace(series, PVI=pvi, NVI=nvi)


def stylized_continuous_pvi(series: IndicatorSeries) -> IndexTrace:
    """Piecewise-linear PVI: slope 0 where ``V`` falls, ``sign(R)`` where it rises.

    ``V'`` is estimated by central differences; levels start at ``series.base``.
    """
    if len(series) < 2:
        raise SamplingError("need at least two samples")
    dv = np.gradient(series.V, series.taus)
    slope = np.where(dv > 0.0, np.sign(series.R), 0.0)
    steps = slope[:-1] * np.diff(series.taus)
    levels = series.base + np.concatenate(([0.0], np.cumsum(steps)))
    return IndexTrace(series.taus, levels, "PVI_stylized")


def compare_indicators(a: IndexTrace, b: IndexTrace, atol: float = 0.0) -> DivergenceReport:
    """Gap, Spearman rank correlation and first disagreement of two traces.

    Raises:
        GridMismatch: If the traces are not on the same grid.
    """
    if a.taus.shape != b.taus.shape or not np.array_equal(a.taus, b.taus):
        raise GridMismatch(
            f"grids differ: {a.name or 'a'} has {a.taus.size} points, "
            f"{b.name or 'b'} has {b.taus.size}"
        )
    gap = np.abs(np.asarray(a.levels, dtype=float) - np.asarray(b.levels, dtype=float))
    disagree = np.nonzero(gap > atol)[0]
    first = float(a.taus[disagree[0]]) if disagree.size else None

    if np.array_equal(a.levels, b.levels):
        correlation = 1.0
    elif np.ptp(a.levels) == 0.0 or np.ptp(b.levels) == 0.0:
        correlation = math.nan
    else:
        correlation = float(spearmanr(a.levels, b.levels)[0])
    report = DivergenceReport(
        max_gap=float(gap.max()) if gap.size else 0.0,
        rank_correlation=correlation,
        first_disagreement=first,
    )
    logger.debug("divergence %s vs %s: %s", a.name, b.name, report)
    return report
