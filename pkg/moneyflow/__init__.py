"""Fast money flow: a two-currency exchange-rate model and its checks.

moneyflow integrates the first-order equations of motion of the fast money flow
model, predicts and measures their linear behaviour, evaluates the
discrete-time lattice formulation, and derives volume indicators from the
resulting exchange-rate paths.

Features
--------
- Correct and erratum forms of the equations of motion, selectable per run
- Adaptive integration with dense output and a rho-boundary guard
- Linear predictions (frequency, damping, drift, regime) and envelope fits
- Lattice plaquettes, discrete action, path weights and transition matrices
- Positive/negative volume indices, recursive and stylized
- Preset scenarios, YAML configuration, CSV/SVG/JSON artifacts and a CLI

Example
-------
.. code-block:: python

    from moneyflow import InitialSpec, ModelParams, State, envelope_fit, integrate

    params = ModelParams(alpha1=1.5, alpha2=10.0, variant="ilinski-erratum")
    spec = InitialSpec(State(eta=0.2, upsilon=0.0, rho=0.5), c0=0.0)
    traj = integrate(params, spec)
    print(envelope_fit(traj).damping)  # ~0.25
"""

from ._errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    FitError,
    GridMismatch,
    InvariantViolation,
    MoneyFlowError,
    NonFiniteError,
    SamplingError,
    StepFailure,
)
from .config import PRESETS, ScenarioConfig, load_config
from .dynamics import (
    Derivatives,
    InitialSpec,
    ModelParams,
    Observables,
    RawParams,
    State,
    Variant,
    closure_defect,
    energy,
    gauge_shift,
    lagrangian,
    linearized_rhs,
    observables,
    resolve_closure,
    rhs,
    swap_currencies,
)
from .indicators import (
    DivergenceReport,
    IndexTrace,
    IndicatorSeries,
    compare_indicators,
    recursive_pvi_nvi,
    sample_indicators,
    stylized_continuous_pvi,
    volume_indices,
)
from .integrator import (
    IntegratorConfig,
    Termination,
    TerminationKind,
    Trajectory,
    closure_residual,
    integrate,
    propagate,
)
from .lattice import (
    LatticePath,
    RateSequence,
    TransitionMatrix,
    apply,
    discrete_action,
    hamiltonian_matrix,
    path_weight,
    plaquette_return,
    transition_matrix,
)
from .linear import (
    Classification,
    EnvelopeFit,
    LinearPrediction,
    Regime,
    classify,
    envelope_fit,
    linear_trajectory,
    linearize,
    time_scale,
)
from .scenario import ScenarioReport, SweepResult, run_scenario, sweep

__version__: str = "0.1.0"

__all__ = [
    # Model
    "ModelParams",
    "RawParams",
    "State",
    "Derivatives",
    "InitialSpec",
    "Observables",
    "Variant",
    "rhs",
    "linearized_rhs",
    "resolve_closure",
    "closure_defect",
    "lagrangian",
    "energy",
    "observables",
    "gauge_shift",
    "swap_currencies",
    # Integration
    "IntegratorConfig",
    "Termination",
    "TerminationKind",
    "Trajectory",
    "integrate",
    "propagate",
    "closure_residual",
    # Linear analysis
    "Regime",
    "Classification",
    "LinearPrediction",
    "EnvelopeFit",
    "linearize",
    "linear_trajectory",
    "classify",
    "time_scale",
    "envelope_fit",
    # Lattice
    "RateSequence",
    "LatticePath",
    "TransitionMatrix",
    "plaquette_return",
    "discrete_action",
    "path_weight",
    "transition_matrix",
    "apply",
    "hamiltonian_matrix",
    # Indicators
    "IndicatorSeries",
    "IndexTrace",
    "DivergenceReport",
    "sample_indicators",
    "volume_indices",
    "recursive_pvi_nvi",
    "stylized_continuous_pvi",
    "compare_indicators",
    # Scenarios
    "PRESETS",
    "ScenarioConfig",
    "ScenarioReport",
    "SweepResult",
    "load_config",
    "run_scenario",
    "sweep",
    # Exceptions
    "MoneyFlowError",
    "DomainError",
    "NonFiniteError",
    "StepFailure",
    "DegenerateError",
    "FitError",
    "SamplingError",
    "GridMismatch",
    "ConfigError",
    "InvariantViolation",
    "__version__",
]
