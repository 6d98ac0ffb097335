"""Scenario configuration: presets, YAML files and ``key=value`` overrides.

Settings are resolved in layers, each overriding the one before:

1. a named preset (or the built-in defaults),
2. a YAML file,
3. ``--set section.key=value`` assignments (values parsed as YAML scalars),
4. dedicated command-line flags.

Every resolved value that differs from the preset is recorded in
:attr:`ScenarioConfig.overrides`. Unknown sections or keys are rejected with a
:class:`ConfigError` naming the dotted path.

Example
-------
.. code-block:: yaml

    preset: fig-correct
    model:
      alpha1: 0.5
    initial:
      c0: 0.1
    integrator:
      t_end: 80
    output:
      dir: runs/c0-positive
      svg: false
"""

import copy
import logging
import math
import os
from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import yaml

from ._errors import ConfigError, MoneyFlowError
from .dynamics import InitialSpec, ModelParams, RawParams, State, Variant
from .integrator import METHODS, IntegratorConfig

logger = logging.getLogger(__name__)

Settings = Dict[str, Dict[str, Any]]


def _as_float(value: Any) -> float:
    if isinstance(value, bool):
        raise TypeError("expected a number, got a boolean")
    return float(value)


def _as_int(value: Any) -> int:
    number = _as_float(value)
    if not number.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(number)


def _as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "yes", "on", "1"):
        return True
    if text in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _as_method(value: Any) -> str:
    text = str(value).upper()
    if text not in METHODS:
        raise ValueError(f"expected one of {METHODS}, got {value!r}")
    return text


def _as_variant(value: Any) -> str:
    return Variant.parse(value).value


SCHEMA: Dict[str, Dict[str, Callable[[Any], Any]]] = {
    "model": {"alpha1": _as_float, "alpha2": _as_float, "beta": _as_float, "variant": _as_variant},
    "raw": {
        "sigma2": _as_float,
        "h": _as_float,
        "M": _as_int,
        "f": _as_float,
        "beta": _as_float,
        "T": _as_float,
    },
    "initial": {
        "eta": _as_float,
        "upsilon": _as_float,
        "rho": _as_float,
        "c0": _as_float,
        "eta_prime0": _as_float,
    },
    "integrator": {
        "t_end": _as_float,
        "rel_tol": _as_float,
        "abs_tol": _as_float,
        "max_step": _as_float,
        "rho_epsilon": _as_float,
        "method": _as_method,
    },
    "sampling": {"dtau": _as_float, "base": _as_float},
    "output": {"dir": str, "svg": _as_bool},
}

DEFAULTS: Settings = {
    "model": {"alpha1": 1.5, "alpha2": 10.0, "beta": 1.0, "variant": Variant.CORRECT.value},
    "raw": {},
    "initial": {"eta": 0.2, "upsilon": 0.0, "rho": 0.5, "c0": 0.0, "eta_prime0": None},
    "integrator": {
        "t_end": 50.0,
        "rel_tol": 1e-10,
        "abs_tol": 1e-12,
        "max_step": 0.1,
        "rho_epsilon": 1e-12,
        "method": "DOP853",
    },
    "sampling": {"dtau": 0.05, "base": 1000.0},
    "output": {"dir": "out", "svg": True},
}

# Preset name -> dotted settings applied on top of DEFAULTS.
PRESETS: Dict[str, Dict[str, Any]] = {
    "fig-erratum": {"model.variant": Variant.ILINSKI_ERRATUM.value},
    "fig-correct": {},
    "fig-alpha1-zero": {"model.alpha1": 0.0},
    "fig-c0-positive": {"initial.c0": 0.1},
    "fig-c0-negative": {"initial.c0": -0.1},
    "fig-indicators": {},
}


@dataclass(frozen=True)
class SamplingConfig:
    """Output grid spacing ``dtau`` and the PVI/NVI base level."""

    dtau: float = 0.05
    base: float = 1000.0

    def __post_init__(self) -> None:
        for name in ("dtau", "base"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigError(
                    f"must be a positive finite number, got {value!r}", field=f"sampling.{name}"
                )


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    svg: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario.

    ``settings`` holds the fully resolved nested values the typed fields were
    built from; :meth:`with_setting` rebuilds from it.
    """

    params: ModelParams
    initial: InitialSpec
    integrator: IntegratorConfig
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    raw: Optional[RawParams] = None
    preset: Optional[str] = None
    overrides: Dict[str, Any] = field(default_factory=dict)
    settings: Settings = field(default_factory=lambda: copy.deepcopy(DEFAULTS), repr=False)
    explicit: FrozenSet[str] = field(default_factory=frozenset, repr=False)

    def with_setting(self, key: str, value: Any) -> "ScenarioConfig":
        """A copy with one dotted setting replaced, validated like any override."""
        settings = copy.deepcopy(self.settings)
        explicit = set(self.explicit)
        set_value(settings, key, value)
        explicit.add(key)
        return build_config(settings, self.preset, explicit)

    def with_output_dir(self, path: Union[str, "os.PathLike[str]"]) -> "ScenarioConfig":
        return self.with_setting("output.dir", os.fspath(path))


def _split(key: str) -> Tuple[str, str]:
    section, dot, name = key.partition(".")
    if not dot or not name:
        raise ConfigError(f"expected 'section.key', got {key!r}", field=key)
    if section not in SCHEMA:
        raise ConfigError(f"unknown section; expected one of {sorted(SCHEMA)}", field=section)
    if name not in SCHEMA[section]:
        raise ConfigError(f"unknown key; expected one of {sorted(SCHEMA[section])}", field=key)
    return section, name


def set_value(settings: Settings, key: str, value: Any) -> None:
    """Assign a dotted setting after type conversion.

    Giving ``initial.c0`` clears ``initial.eta_prime0`` and vice versa, so the
    pair stays mutually exclusive across layers.
    """
    section, name = _split(key)
    if value is None:
        converted = None
    else:
        try:
            converted = SCHEMA[section][name](value)
        except (TypeError, ValueError, MoneyFlowError) as err:
            raise ConfigError(str(err), field=key) from err
    settings[section][name] = converted
    if section == "initial" and converted is not None:
        if name == "c0":
            settings["initial"]["eta_prime0"] = None
        elif name == "eta_prime0":
            settings["initial"]["c0"] = None


def preset_settings(name: Optional[str]) -> Settings:
    """Nested settings of a preset; ``None`` gives the defaults."""
    settings = copy.deepcopy(DEFAULTS)
    if name is None:
        return settings
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; expected one of {sorted(PRESETS)}", field="preset"
        )
    for key, value in PRESETS[name].items():
        set_value(settings, key, value)
    return settings


def parse_assignment(text: str) -> Tuple[str, Any]:
    """Split ``section.key=value``; the value is parsed as a YAML scalar."""
    key, eq, raw_value = text.partition("=")
    key = key.strip()
    if not eq:
        raise ConfigError(f"expected key=value, got {text!r}", field=key or None)
    try:
        value = yaml.safe_load(raw_value) if raw_value.strip() else None
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse value {raw_value!r}: {err}", field=key) from err
    _split(key)
    return key, value


def _flatten(data: Mapping[str, Any], where: str) -> Iterable[Tuple[str, Any]]:
    for section, body in data.items():
        if section == "preset":
            continue
        if section not in SCHEMA:
            raise ConfigError(
                f"unknown section; expected one of {sorted(SCHEMA)}", field=str(section)
            )
        if body is None:
            continue
        if not isinstance(body, Mapping):
            raise ConfigError(f"{where}: section must be a mapping", field=str(section))
        both = body.get("c0") is not None and body.get("eta_prime0") is not None
        if section == "initial" and both:
            raise ConfigError("give either c0 or eta_prime0, not both", field="initial")
        for name, value in body.items():
            yield f"{section}.{name}", value


def read_config_file(path: Union[str, "os.PathLike[str]"]) -> Dict[str, Any]:
    """Parse a YAML config file into a mapping (empty file -> ``{}``)."""
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as err:
        raise ConfigError(f"cannot read config file {os.fspath(path)!r}: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"invalid YAML in {os.fspath(path)!r}: {err}") from err
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{os.fspath(path)!r}: top level must be a mapping")
    preset = data.get("preset")
    if preset is not None and not isinstance(preset, str):
        raise ConfigError("must be a preset name", field="preset")
    return dict(data)


def load_config(
    path: Optional[Union[str, "os.PathLike[str]"]] = None,
    preset: Optional[str] = None,
    assignments: Sequence[str] = (),
    flags: Sequence[Tuple[str, Any]] = (),
) -> ScenarioConfig:
    """Resolve preset, file, ``--set`` assignments and flags into a config.

    An explicit ``preset`` argument wins over the file's ``preset`` key.
    """
    data = read_config_file(path) if path is not None else {}
    preset = preset or data.get("preset")
    settings = preset_settings(preset)
    explicit: Set[str] = set()

    layers = [
        list(_flatten(data, os.fspath(path) if path is not None else "config")),
        [parse_assignment(a) for a in assignments],
        list(flags),
    ]
    for layer in layers:
        for key, value in layer:
            set_value(settings, key, value)
            explicit.add(key)
    return build_config(settings, preset, explicit)


def _section(settings: Settings, name: str) -> Dict[str, Any]:
    return {k: v for k, v in settings[name].items() if v is not None}


def build_config(
    settings: Settings, preset: Optional[str] = None, explicit: Iterable[str] = ()
) -> ScenarioConfig:
    """Turn resolved nested settings into typed objects.

    Model errors are reported as :class:`ConfigError` on the offending section.
    """
    explicit = set(explicit)
    settings = copy.deepcopy(settings)
    raw: Optional[RawParams] = None
    integrator = settings["integrator"]
    try:
        raw_values = _section(settings, "raw")
        if raw_values:
            missing = [k for k in ("sigma2", "h", "M", "f") if k not in raw_values]
            if missing:
                raise ConfigError(f"missing {missing}", field="raw")
            raw = RawParams(**raw_values)
            params = raw.derive(settings["model"]["variant"])
            # Derived values replace the model section and the default span.
            settings["model"].update(alpha1=params.alpha1, alpha2=params.alpha2, beta=params.beta)
            if "integrator.t_end" not in explicit:
                integrator["t_end"] = raw.horizon_tau
        else:
            params = ModelParams(**_section(settings, "model"))
    except ConfigError:
        raise
    except MoneyFlowError as err:
        raise ConfigError(str(err), field="raw" if raw_values else "model") from err

    initial_values = _section(settings, "initial")
    try:
        state0 = State(initial_values["eta"], initial_values["upsilon"], initial_values["rho"])
        spec = InitialSpec(state0, initial_values.get("c0"), initial_values.get("eta_prime0"))
    except KeyError as err:
        raise ConfigError(f"missing {err.args[0]!r}", field="initial") from err
    except MoneyFlowError as err:
        raise ConfigError(str(err), field="initial") from err

    try:
        integrator_cfg = IntegratorConfig(**integrator)
    except MoneyFlowError as err:
        raise ConfigError(str(err), field="integrator") from err

    sampling = SamplingConfig(**settings["sampling"])
    output = OutputConfig(**settings["output"])

    baseline = preset_settings(preset)
    overrides = {
        f"{section}.{name}": value
        for section, body in settings.items()
        for name, value in body.items()
        if baseline[section].get(name) != value
    }
    if overrides:
        logger.info("config overrides on %s: %s", preset or "defaults", overrides)
    return ScenarioConfig(
        params=params,
        initial=spec,
        integrator=integrator_cfg,
        sampling=sampling,
        output=output,
        raw=raw,
        preset=preset,
        overrides=overrides,
        settings=settings,
        explicit=frozenset(explicit),
    )


def numeric_key(key: str) -> bool:
    """Whether a dotted key holds a number (and so can be swept)."""
    section, name = _split(key)
    return SCHEMA[section][name] in (_as_float, _as_int)
