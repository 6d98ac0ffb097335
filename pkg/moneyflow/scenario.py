"""Run scenarios and parameter sweeps, emitting CSV, SVG and JSON artifacts.

A scenario integrates one configuration, samples it on the ``dtau`` grid and
writes into ``cfg.output.dir``:

``trajectory.csv``
    tau, eta, upsilon, rho, rho_tilde, eta_tilde, S, V, R, energy,
    closure_residual. The closure identity is checked on every row before
    anything is written.
``indicators.csv``
    tau, V, R, PVI, NVI, PVI_stylized.
``trajectory.svg``, ``indicators.svg``, ``indices.svg``
    Line plots, regenerated losslessly from the two CSV files.
``report.json``
    Linear prediction, regime, envelope fit, termination, indicator divergence
    and the config overrides.

Example
-------
.. code-block:: python

    import asyncio
    from moneyflow import load_config, run_scenario

    cfg = load_config(preset="fig-correct", flags=[("output.dir", "runs/fig2")])
    report = asyncio.run(run_scenario(cfg))
    print(report.fit.damping)  # ~0
"""

import asyncio
import dataclasses
import enum
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import aiofiles
import numpy as np

from . import lattice
from ._errors import (
    ConfigError,
    DegenerateError,
    FitError,
    InvariantViolation,
    MoneyFlowError,
    SamplingError,
    StepFailure,
)
from .config import ScenarioConfig, numeric_key
from .csvio import read_columns, write_columns, write_table
from .dynamics import closure_defect, energy_array, vector_field
from .indicators import (
    DivergenceReport,
    IndicatorSeries,
    compare_indicators,
    recursive_pvi_nvi,
    sample_indicators,
    sampling_grid,
    stylized_continuous_pvi,
)
from .integrator import Termination, Trajectory, integrate
from .linear import (
    Classification,
    EnvelopeFit,
    LinearPrediction,
    classify,
    envelope_fit,
    linearize,
)
from .svg import index_plot, indicator_plot, trajectory_plot

logger = logging.getLogger(__name__)

PathLike = Union[str, "os.PathLike[str]"]

TRAJECTORY_COLUMNS = (
    "tau",
    "eta",
    "upsilon",
    "rho",
    "rho_tilde",
    "eta_tilde",
    "S",
    "V",
    "R",
    "energy",
    "closure_residual",
)
INDICATOR_COLUMNS = ("tau", "V", "R", "PVI", "NVI", "PVI_stylized")
SUMMARY_COLUMNS = ("value", "damping", "omega", "drift", "regime", "status")

# Short sweep axis names -> dotted config keys.
AXES: Dict[str, str] = {
    "alpha1": "model.alpha1",
    "alpha2": "model.alpha2",
    "beta": "model.beta",
    "c0": "initial.c0",
}


def to_jsonable(value: Any) -> Any:
    """Convert reports to JSON-safe values; non-finite floats become ``None``."""
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (Path, os.PathLike)):
        return os.fspath(value)
    if isinstance(value, BaseException):
        return f"{type(value).__name__}: {value}"
    if hasattr(value, "_asdict"):
        return {k: to_jsonable(v) for k, v in value._asdict().items()}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: to_jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
            if f.repr
        }
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


async def write_json(path: PathLike, payload: Any) -> None:
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    async with aiofiles.open(os.fspath(path), mode="w") as f:
        await f.write(text + "\n")


def trajectory_table(traj: Trajectory, dtau: float) -> Dict[str, np.ndarray]:
    """Sample ``traj`` every ``dtau`` into the trajectory CSV columns.

    Raises:
        InvariantViolation: If any row breaks the closure identity beyond its bound.
    """
    params, c0 = traj.params, traj.c0
    taus = sampling_grid(traj, dtau)
    states = traj.sample(taus)
    eta, upsilon, rho = states[:, 0], states[:, 1], states[:, 2]
    eta_prime, _, rho_prime = vector_field(params, c0, eta, upsilon, rho)
    residual, bound = closure_defect(params, c0, rho, eta_prime, rho_prime)
    bad = np.nonzero(residual > bound)[0]
    if bad.size:
        i = int(bad[0])
        raise InvariantViolation(
            f"closure identity broken at tau={taus[i]!r}: residual {residual[i]!r} > {bound[i]!r}"
        )
    return {
        "tau": taus,
        "eta": eta,
        "upsilon": upsilon,
        "rho": rho,
        "rho_tilde": rho - 0.5,
        "eta_tilde": upsilon + eta,
        "S": np.exp(eta / params.beta),
        "V": np.abs(rho_prime),
        "R": eta_prime / params.beta,
        "energy": energy_array(params, c0, eta, upsilon, rho),
        "closure_residual": residual,
    }


def indicator_table(series: IndicatorSeries) -> Dict[str, np.ndarray]:
    """Recursive and stylized indices of ``series`` as CSV columns."""
    if series.PVI is None or series.NVI is None:
        series = recursive_pvi_nvi(series)
    stylized = stylized_continuous_pvi(series)
    return {
        "tau": series.taus,
        "V": series.V,
        "R": series.R,
        "PVI": series.PVI,
        "NVI": series.NVI,
        "PVI_stylized": stylized.levels,
    }


@dataclass(frozen=True)
class ScenarioReport:
    """Outcome of :func:`run_scenario`."""

    output_dir: Path
    artifacts: Dict[str, Path]
    termination: Termination
    classification: Classification
    prediction: Optional[LinearPrediction]
    fit: Optional[EnvelopeFit]
    fit_error: Optional[str]
    energy_drift: float
    closure_max: float
    divergence: Optional[DivergenceReport]
    preset: Optional[str]
    overrides: Dict[str, Any] = field(default_factory=dict)
    config: Optional[ScenarioConfig] = field(default=None, repr=False)

    @property
    def status(self) -> str:
        if not self.termination.completed:
            return self.termination.kind.value
        return "ok" if self.fit is not None else "fit-failed"

    def to_dict(self) -> Dict[str, Any]:
        data = to_jsonable(self)
        data["status"] = self.status
        if self.config is not None:
            data["settings"] = to_jsonable(self.config.settings)
        return data


async def _save_partial(err: StepFailure, out: Path, dtau: float) -> None:
    if err.partial is None:
        return
    path = out / "trajectory.partial.csv"
    try:
        await write_columns(path, trajectory_table(err.partial, dtau))
    except MoneyFlowError as inner:
        logger.warning("could not save partial trajectory: %s", inner)
        return
    logger.info("saved partial trajectory to %s", path)


async def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    """Integrate, analyse and write all artifacts of one scenario.

    A trajectory that reaches the rho boundary is still written and reported,
    with a ``boundary-reached`` termination.

    Raises:
        StepFailure: After saving ``trajectory.partial.csv``.
        InvariantViolation: If a sampled row breaks the closure identity.
    """
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    dtau = cfg.sampling.dtau
    logger.info("scenario %s -> %s", cfg.preset or "custom", out)

    try:
        traj = await asyncio.to_thread(integrate, cfg.params, cfg.initial, cfg.integrator)
    except StepFailure as err:
        await _save_partial(err, out, dtau)
        raise

    artifacts: Dict[str, Path] = {}
    table = trajectory_table(traj, dtau)
    artifacts["trajectory_csv"] = out / "trajectory.csv"
    await write_columns(artifacts["trajectory_csv"], table)

    divergence: Optional[DivergenceReport] = None
    indicators: Optional[Dict[str, np.ndarray]] = None
    try:
        series = recursive_pvi_nvi(sample_indicators(traj, dtau_s=dtau, base=cfg.sampling.base))
    except SamplingError as err:
        logger.warning("indicators skipped: %s", err)
    else:
        indicators = indicator_table(series)
        divergence = compare_indicators(series.pvi_trace(), stylized_continuous_pvi(series))
        artifacts["indicators_csv"] = out / "indicators.csv"
        await write_columns(artifacts["indicators_csv"], indicators)

    try:
        prediction: Optional[LinearPrediction] = linearize(cfg.params, cfg.initial)
    except DegenerateError as err:
        logger.warning("no linear prediction: %s", err)
        prediction = None

    fit: Optional[EnvelopeFit] = None
    fit_error: Optional[str] = None
    try:
        fit = envelope_fit(traj)
    except FitError as err:
        fit_error = str(err)
        logger.warning("envelope fit failed: %s", err)

    energies = energy_array(cfg.params, traj.c0, traj.eta, traj.upsilon, traj.rho)
    report = ScenarioReport(
        output_dir=out,
        artifacts=artifacts,
        termination=traj.termination,
        classification=classify(cfg.params, traj.c0),
        prediction=prediction,
        fit=fit,
        fit_error=fit_error,
        energy_drift=float(np.max(np.abs(energies - energies[0]))),
        closure_max=float(np.max(table["closure_residual"])) if len(table["tau"]) else 0.0,
        divergence=divergence,
        preset=cfg.preset,
        overrides=dict(cfg.overrides),
        config=cfg,
    )

    if cfg.output.svg:
        title = cfg.preset or "scenario"
        artifacts["trajectory_svg"] = out / "trajectory.svg"
        await trajectory_plot(table, title).save(artifacts["trajectory_svg"])
        artifacts["indicators_svg"] = out / "indicators.svg"
        await indicator_plot(table, title).save(artifacts["indicators_svg"])
        if indicators is not None:
            artifacts["indices_svg"] = out / "indices.svg"
            await index_plot(indicators, title).save(artifacts["indices_svg"])

    artifacts["report_json"] = out / "report.json"
    await write_json(artifacts["report_json"], report.to_dict())
    logger.info("scenario %s finished: %s", cfg.preset or "custom", report.status)
    return report


async def render_plots(directory: PathLike, title: str = "scenario") -> Dict[str, Path]:
    """Regenerate the SVG plots of a scenario directory from its CSV files."""
    directory = Path(directory)
    table = await read_columns(directory / "trajectory.csv", required=TRAJECTORY_COLUMNS)
    paths = {
        "trajectory_svg": directory / "trajectory.svg",
        "indicators_svg": directory / "indicators.svg",
    }
    await trajectory_plot(table, title).save(paths["trajectory_svg"])
    await indicator_plot(table, title).save(paths["indicators_svg"])
    if (directory / "indicators.csv").exists():
        indices = await read_columns(directory / "indicators.csv", required=INDICATOR_COLUMNS)
        paths["indices_svg"] = directory / "indices.svg"
        await index_plot(indices, title).save(paths["indices_svg"])
    return paths


def resolve_axis(axis: str) -> str:
    """Map a sweep axis (short name or dotted key) to a numeric config key."""
    key = AXES.get(axis, axis)
    if not numeric_key(key):
        raise ConfigError(f"sweep axis {axis!r} is not numeric", field=key)
    return key


@dataclass(frozen=True)
class SweepResult:
    """Per-value outcomes of :func:`sweep`, in the order of ``values``."""

    axis: str
    key: str
    values: List[float]
    outcomes: List[Union[ScenarioReport, BaseException]]
    summary_path: Path

    @property
    def failures(self) -> List[BaseException]:
        return [o for o in self.outcomes if isinstance(o, BaseException)]


def _summary_row(value: float, outcome: Union[ScenarioReport, BaseException]) -> List[str]:
    number = repr(float(value))
    if isinstance(outcome, BaseException):
        nan = repr(math.nan)
        return [number, nan, nan, nan, "", f"error: {type(outcome).__name__}"]
    fit = outcome.fit
    cells = [fit.damping, fit.omega, fit.drift] if fit else [math.nan] * 3
    regime = outcome.classification.regime.value
    return [number, *(repr(float(c)) for c in cells), regime, outcome.status]


def item_dir_name(index: int, axis: str, value: float) -> str:
    """Directory name of sweep item ``index``; the value keeps its full repr."""
    return f"{index:03d}-{axis}={float(value)!r}"


async def sweep(
    base: ScenarioConfig,
    axis: str,
    values: Sequence[float],
    out_dir: Optional[PathLike] = None,
) -> SweepResult:
    """Run one scenario per value of ``axis`` concurrently.

    Item ``i`` writes into ``<out_dir>/<iii>-<axis>=<value>`` (see
    :func:`item_dir_name`), so repeated or nearly equal values never share a
    directory. Failed items are kept in :attr:`SweepResult.outcomes` as
    exceptions and flagged in ``summary.csv``; the others complete normally.
    """
    key = resolve_axis(axis)
    root = Path(out_dir if out_dir is not None else base.output.dir)
    root.mkdir(parents=True, exist_ok=True)
    values = [float(v) for v in values]

    async def run_one(index: int, value: float) -> ScenarioReport:
        item_dir = root / item_dir_name(index, axis, value)
        cfg = base.with_setting(key, value).with_output_dir(item_dir)
        return await run_scenario(cfg)

    outcomes = list(
        await asyncio.gather(
            *(run_one(i, v) for i, v in enumerate(values)), return_exceptions=True
        )
    )
    for value, outcome in zip(values, outcomes):
        if isinstance(outcome, BaseException):
            logger.warning("sweep item %s=%g failed: %s", axis, value, outcome)

    summary_path = root / "summary.csv"
    await write_table(
        summary_path,
        SUMMARY_COLUMNS,
        [_summary_row(v, o) for v, o in zip(values, outcomes)],
    )
    failed = sum(isinstance(o, BaseException) for o in outcomes)
    logger.info("sweep over %s: %d items, %d failed", axis, len(values), failed)
    return SweepResult(axis, key, values, outcomes, summary_path)


async def recompute_indicators(
    csv_path: PathLike,
    out_dir: PathLike,
    dtau: Optional[float] = None,
    base: float = 1000.0,
    svg: bool = True,
) -> DivergenceReport:
    """Recompute PVI/NVI from an emitted ``trajectory.csv``.

    With ``dtau`` the rows are thinned to that spacing, which must be a whole
    multiple of the file's own.

    Raises:
        ConfigError: If the file lacks tau, V, R or S.
        SamplingError: If ``dtau`` is not a multiple of the stored spacing or
            fewer than two rows remain.
    """
    table = await read_columns(csv_path, required=("tau", "V", "R", "S"))
    taus = table["tau"]
    if taus.size < 2:
        raise SamplingError(f"{os.fspath(csv_path)} holds fewer than two rows")
    stride = 1
    if dtau is not None:
        spacing = float(taus[1] - taus[0])
        ratio = dtau / spacing
        stride = int(round(ratio))
        if stride < 1 or abs(ratio - stride) > 1e-6 * max(ratio, 1.0):
            raise SamplingError(
                f"dtau {dtau!r} is not a multiple of the stored spacing {spacing!r}"
            )
    picked = slice(None, None, stride)
    series = IndicatorSeries(
        taus=taus[picked],
        V=table["V"][picked],
        R=table["R"][picked],
        S=table["S"][picked],
        base=base,
    )
    if len(series) < 2:
        raise SamplingError(f"dtau {dtau!r} leaves fewer than two samples")
    series = recursive_pvi_nvi(series)
    columns = indicator_table(series)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    await write_columns(out / "indicators.csv", columns)
    divergence = compare_indicators(series.pvi_trace(), stylized_continuous_pvi(series))
    await write_json(
        out / "indicators.json",
        {"source": os.fspath(csv_path), "stride": stride, "divergence": divergence},
    )
    if svg:
        await index_plot(columns, "indicators").save(out / "indices.svg")
    return divergence


def lattice_report(
    rates: Sequence[float], beta: float = 1.0, dt: float = 1.0, sigma2: float = 1.0
) -> Dict[str, Any]:
    """Plaquette returns, action and single-step matrices for a rate sequence."""
    seq = lattice.RateSequence(np.asarray(rates, dtype=float), dt=dt, beta=beta, sigma2=sigma2)
    report: Dict[str, Any] = {
        "rates": seq.rates,
        "dt": seq.dt,
        "beta": seq.beta,
        "sigma2": seq.sigma2,
        "plaquette_returns": lattice.plaquette_returns(seq),
        "loop_returns": [lattice.loop_returns(a, b) for a, b in zip(seq.rates[:-1], seq.rates[1:])],
        "discrete_action": lattice.discrete_action(seq) if len(seq) > 1 else None,
        "matrices": [],
    }
    for s in seq.rates:
        m = lattice.transition_matrix(s, seq.beta)
        h = lattice.hamiltonian_matrix(s, seq.beta, seq.dt)
        report["matrices"].append(
            {
                "S": s,
                "transition": m.entries,
                "determinant": m.determinant,
                "entries_determinant": m.entries_determinant,
                "column_sums": m.column_sums(),
                "hamiltonian": h,
                "hamiltonian_times_dt": h * seq.dt,
            }
        )
    return report
