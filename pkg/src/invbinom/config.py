"""
Experiment configuration files.

A config is a TOML document with an `[experiment]` table and optional
`[grid]`, `[[estimators]]`, `[optimizer]`, `[calibration]`, `[curves]` and
`[gain]` tables. Parsing never raises on bad input: every function here
returns `Result[..., ConfigError]`.

Named presets ship with the package, see `list_presets()`.

@date: 18.10.2026
"""

from __future__ import annotations

import hashlib
import json
import tomllib
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Literal, TypeVar

import numpy as np
import numpy.typing as npt

from ._checks import ConfigError
from ._engine import Estimator, ExactEstimator, FixedEstimator, IbsEstimator
from ._optimizer import OptimizerConfig
from ._results import Err, Ok, Result
from .models import ModelEntry, ParameterSpace, get_entry, theta_grid

_SCALARS: dict[str, tuple[type, ...]] = {"int": (int,), "float": (int, float), "str": (str,), "bool": (bool,)}

S = TypeVar("S")


@dataclass(frozen=True)
class GridAxis:
    """
    `increments` values of parameter `name` from `low` to `high`, the other
    parameters at `at` (the experiment's theta_true when omitted).
    """

    name: str
    low: float
    high: float
    at: tuple[float, ...] | None = None


@dataclass(frozen=True)
class GridSpec:
    """
    Generation grid. Without explicit axes, every parameter (or those listed
    in `parameters`) is varied over its plausible range around theta_true.
    """

    increments: int = 40
    parameters: tuple[str, ...] | None = None
    axes: tuple[GridAxis, ...] = ()

    def thetas(self, space: ParameterSpace, baseline: npt.ArrayLike) -> npt.NDArray[np.float64]:
        baseline = np.asarray(baseline, dtype=np.float64)
        if not self.axes:
            grid = theta_grid(space, baseline, self.increments)
            if self.parameters is None:
                return grid
            keep = np.repeat([name in self.parameters for name in space.names], self.increments)
            return grid[keep]
        rows = []
        for axis in self.axes:
            j = space.index(axis.name)
            for value in np.linspace(axis.low, axis.high, self.increments):
                theta = np.array(axis.at if axis.at is not None else baseline, dtype=np.float64)
                theta[j] = value
                rows.append(theta)
        return np.array(rows)


@dataclass(frozen=True)
class EstimatorSpec:
    """
    One log-likelihood estimator.

    Attributes
    ----------
    kind: str
        'ibs', 'fixed' or 'exact'.
    repeats: int
        IBS repeats.
    early_stop: str | float | None
        IBS early-stopping threshold: 'chance' for the model's chance
        log-likelihood, a number of nats, or None.
    sample_cap: int | None
        IBS draws per (trial, repeat) before giving up.
    samples, variant, m_min:
        Fixed-sampling settings.
    """

    kind: Literal["ibs", "fixed", "exact"] = "ibs"
    repeats: int = 1
    early_stop: str | float | None = "chance"
    sample_cap: int | None = None
    samples: int = 10
    variant: Literal["standard", "naive", "bounded"] = "standard"
    m_min: float = 0.5

    def validate(self) -> Result[EstimatorSpec, ConfigError]:
        if self.kind not in ("ibs", "fixed", "exact"):
            return Err(ConfigError("estimators.kind", f"unknown estimator {self.kind!r}"))
        if self.repeats < 1 or self.samples < 1:
            return Err(ConfigError("estimators", "repeats and samples must be >= 1"))
        if self.variant not in ("standard", "naive", "bounded"):
            return Err(ConfigError("estimators.variant", f"unknown variant {self.variant!r}"))
        if isinstance(self.early_stop, str) and self.early_stop != "chance":
            return Err(ConfigError("estimators.early_stop", "expected 'chance', a number or false"))
        return Ok(self)

    def build(self, entry: ModelEntry, n_trials: int, workers: int = 1) -> Estimator:
        match self.kind:
            case "fixed":
                return FixedEstimator(self.samples, self.variant, self.m_min)
            case "exact":
                return ExactEstimator()
        threshold = entry.threshold(n_trials) if self.early_stop == "chance" else self.early_stop
        return IbsEstimator(self.repeats, threshold, self.sample_cap, workers)


@dataclass(frozen=True)
class OptimizerSpec:
    max_evaluations: int | None = None
    starts: tuple[tuple[float, ...], ...] | None = None
    incumbent_reestimates: int = 1
    final_precision_multiplier: int = 10
    initial_mesh: float = 0.25
    min_mesh: float = 1e-4
    noisy_min_mesh: float = 1e-2
    quadratic_refinement: bool = True

    def validate(self) -> Result[OptimizerSpec, ConfigError]:
        if self.final_precision_multiplier < 1 or self.incumbent_reestimates < 0:
            return Err(ConfigError("optimizer", "multiplier must be >= 1 and re-estimates >= 0"))
        if not 0 < self.min_mesh <= self.noisy_min_mesh <= self.initial_mesh:
            return Err(ConfigError("optimizer", "expected 0 < min_mesh <= noisy_min_mesh <= initial_mesh"))
        return Ok(self)

    def build(self, seed: int, workers: int = 1) -> OptimizerConfig:
        return OptimizerConfig(
            self.max_evaluations,
            self.starts,
            self.incumbent_reestimates,
            self.final_precision_multiplier,
            seed,
            self.initial_mesh,
            self.min_mesh,
            self.noisy_min_mesh,
            self.quadratic_refinement,
            workers,
        )


@dataclass(frozen=True)
class CalibrationSpec:
    n_datasets: int = 1000
    repeats: int = 1


@dataclass(frozen=True)
class CurvesSpec:
    p_min: float = 0.01
    points: int = 50
    fixed_samples: tuple[int, ...] = (10, 100)
    repeats: tuple[int, ...] = (1, 10)
    lambda_min: float = 0.1
    lambda_max: float = 10.0
    monte_carlo_runs: int = 10_000


@dataclass(frozen=True)
class GainSpec:
    n_trials: int = 500
    draws: int = 1000
    budget_factor: float = 10.0


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A resolved experiment: model, data-generating parameters, estimators
    and the settings of every analysis.

    Attributes
    ----------
    theta_true: tuple[float, ...]
        Generating parameters; the model's baseline when not given.
    grid: GridSpec | None
        Generation grid for recovery sweeps; None means theta_true only.
    threads: int
        Worker threads; never changes results.
    """

    model: str
    n_trials: int
    n_datasets: int
    seed: int
    output: str
    theta_true: tuple[float, ...]
    estimators: tuple[EstimatorSpec, ...]
    grid: GridSpec | None = None
    optimizer: OptimizerSpec = OptimizerSpec()
    calibration: CalibrationSpec = CalibrationSpec()
    curves: CurvesSpec = CurvesSpec()
    gain: GainSpec = GainSpec()
    threads: int = 1

    @property
    def entry(self) -> ModelEntry:
        return get_entry(self.model).unwrap()

    def thetas(self) -> npt.NDArray[np.float64]:
        space = self.entry.factory().parameter_space()
        if self.grid is None:
            return np.array([self.theta_true])
        return self.grid.thetas(space, self.theta_true)

    def build_estimators(self) -> list[Estimator]:
        return [spec.build(self.entry, self.n_trials, self.threads) for spec in self.estimators]

    def with_overrides(
        self, seed: int | None = None, output: str | None = None, threads: int | None = None
    ) -> ExperimentConfig:
        return replace(
            self,
            seed=self.seed if seed is None else seed,
            output=self.output if output is None else output,
            threads=self.threads if threads is None else threads,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def hash(self) -> str:
        """
        SHA-256 of the canonical JSON dump of the config. The thread count
        is left out: it never changes results.
        """
        canonical = {k: v for k, v in self.to_dict().items() if k != "threads"}
        text = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- parsing --- #


def _tuples(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tuples(v) for v in value)
    return value


def _build(cls: type[S], table: Any, key: str) -> Result[S, ConfigError]:
    if not isinstance(table, dict):
        return Err(ConfigError(key, "expected a table"))
    known = {f.name for f in fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(table) - known)
    if unknown:
        return Err(ConfigError(key, f"unknown keys {unknown}"))
    for f in fields(cls):  # type: ignore[arg-type]
        expected = _SCALARS.get(str(f.type))
        if expected is None or f.name not in table:
            continue
        value = table[f.name]
        if not isinstance(value, expected) or (isinstance(value, bool) and bool not in expected):
            return Err(ConfigError(f"{key}.{f.name}", f"expected {f.type}, got {value!r}"))
    try:
        return Ok(cls(**{k: _tuples(v) for k, v in table.items()}))
    except (TypeError, ValueError) as exc:
        return Err(ConfigError(key, str(exc)))


def _estimators(raw: Any) -> Result[tuple[EstimatorSpec, ...], ConfigError]:
    """
    `repeats` and `samples` may be lists, expanding into one estimator per
    value.
    """
    if not isinstance(raw, list) or not raw:
        return Err(ConfigError("estimators", "expected at least one [[estimators]] table"))
    specs: list[EstimatorSpec] = []
    for table in raw:
        if not isinstance(table, dict):
            return Err(ConfigError("estimators", "expected a table"))
        table = dict(table)
        if table.get("early_stop") is False:
            table["early_stop"] = None
        sweep = "repeats" if table.get("kind", "ibs") == "ibs" else "samples"
        values = table.pop(sweep, None)
        values = values if isinstance(values, list) else [values]
        for value in values:
            entry = table if value is None else {**table, sweep: value}
            match _build(EstimatorSpec, entry, "estimators"):
                case Err(error):
                    return Err(error)
                case Ok(spec):
                    pass
            match spec.validate():
                case Err(error):
                    return Err(error)
            specs.append(spec)
    return Ok(tuple(specs))


def _grid(raw: Any) -> Result[GridSpec | None, ConfigError]:
    if raw is None:
        return Ok(None)
    if not isinstance(raw, dict):
        return Err(ConfigError("grid", "expected a table"))
    axes = []
    for table in raw.get("axes", []):
        match _build(GridAxis, table, "grid.axes"):
            case Err(error):
                return Err(error)
            case Ok(axis):
                axes.append(axis)
    match _build(GridSpec, {**raw, "axes": ()}, "grid"):
        case Err(error):
            return Err(error)
        case Ok(grid):
            if grid.increments < 1:
                return Err(ConfigError("grid.increments", "must be >= 1"))
            return Ok(replace(grid, axes=tuple(axes)))
    raise AssertionError("unreachable")


def validate_config(config: ExperimentConfig) -> Result[ExperimentConfig, ConfigError]:
    """
    Checks a config against the parameter space of its model.
    """
    match get_entry(config.model):
        case Err(error):
            return Err(error)
        case Ok(entry):
            model = entry.factory()
    space = model.parameter_space()
    if config.n_trials < 1 or config.n_datasets < 1:
        return Err(ConfigError("experiment", "n_trials and n_datasets must be >= 1"))
    if config.threads < 1:
        return Err(ConfigError("threads", "must be >= 1"))
    match space.validate(config.theta_true):
        case Err(error):
            return Err(error)
    if any(spec.kind == "exact" for spec in config.estimators) and not model.has_exact_likelihood:
        return Err(ConfigError("estimators", f"model {config.model} has no exact likelihood"))
    if config.grid is not None:
        for axis in config.grid.axes:
            if axis.name not in space.names:
                return Err(ConfigError("grid.axes", f"unknown parameter {axis.name!r}"))
            bounds = space.parameters[space.index(axis.name)]
            if not bounds.lb <= axis.low <= axis.high <= bounds.ub:
                return Err(ConfigError(axis.name, f"[{axis.low}, {axis.high}] outside the bounds"))
            if axis.at is not None:
                match space.validate(axis.at):
                    case Err(error):
                        return Err(error)
        unknown = set(config.grid.parameters or ()) - set(space.names)
        if unknown:
            return Err(ConfigError("grid.parameters", f"unknown parameters {sorted(unknown)}"))
    return Ok(config)


def parse_config(raw: dict[str, Any]) -> Result[ExperimentConfig, ConfigError]:
    """
    Builds and validates a config from the parsed TOML document.
    """
    unknown = sorted(set(raw) - {"experiment", "grid", "estimators", "optimizer", "calibration", "curves", "gain"})
    if unknown:
        return Err(ConfigError("config", f"unknown tables {unknown}"))
    experiment = raw.get("experiment")
    if not isinstance(experiment, dict) or "model" not in experiment:
        return Err(ConfigError("experiment", "an [experiment] table with a model is required"))
    match get_entry(str(experiment["model"])):
        case Err(error):
            return Err(error)
        case Ok(entry):
            pass
    experiment = {
        "n_trials": entry.n_trials,
        "n_datasets": 20,
        "seed": 0,
        "output": "results",
        "theta_true": tuple(float(t) for t in entry.baseline),
        **experiment,
    }
    sections: dict[str, Any] = {}
    for key, cls in (
        ("optimizer", OptimizerSpec),
        ("calibration", CalibrationSpec),
        ("curves", CurvesSpec),
        ("gain", GainSpec),
    ):
        match _build(cls, raw.get(key, {}), key):
            case Err(error):
                return Err(error)
            case Ok(section):
                sections[key] = section
    match sections["optimizer"].validate():
        case Err(error):
            return Err(error)
    match _estimators(raw.get("estimators", [{"kind": "ibs"}])):
        case Err(error):
            return Err(error)
        case Ok(estimators):
            pass
    match _grid(raw.get("grid")):
        case Err(error):
            return Err(error)
        case Ok(grid):
            pass
    match _build(ExperimentConfig, {**experiment, "estimators": (), "grid": None}, "experiment"):
        case Err(error):
            return Err(error)
        case Ok(config):
            pass
    config = replace(
        config,
        theta_true=tuple(float(t) for t in config.theta_true),
        estimators=estimators,
        grid=grid,
        **sections,
    )
    return validate_config(config)


def load_config(path: str | Path) -> Result[ExperimentConfig, ConfigError]:
    try:
        with open(path, "rb") as stream:
            raw = tomllib.load(stream)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        return Err(ConfigError(str(path), str(exc)))
    return parse_config(raw)


def list_presets() -> list[str]:
    """
    Names of the presets shipped with the package.
    """
    root = resources.files("invbinom.presets")
    return sorted(item.name[: -len(".toml")] for item in root.iterdir() if item.name.endswith(".toml"))


def load_preset(name: str) -> Result[ExperimentConfig, ConfigError]:
    resource = resources.files("invbinom.presets") / f"{name}.toml"
    if not resource.is_file():
        return Err(ConfigError("preset", f"unknown preset {name!r}, expected one of {list_presets()}"))
    try:
        raw = tomllib.loads(resource.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        return Err(ConfigError(name, str(exc)))
    return parse_config(raw)

