"""
Command-line interface.

    invbinom --preset orientation-desk recover --out results/
    invbinom --config my.toml fit --data results/datasets/orientation-t000-d000.jsonl
    invbinom entropy --p 0.5 0.25 0.25

Exit codes: 0 on success, 2 for config errors, 3 for data errors and 4 for
estimation errors.

@date: 18.10.2026
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Final, Sequence

import numpy as np

from ._checks import BudgetInfeasible, ConfigError, DataError, NoExactLikelihood, SampleCapReached
from ._engine import EngineConfig, derive_seed, estimate_fixed, estimate_parallel
from ._errors import Error
from ._optimizer import fit_mle
from ._results import Err, Ok, Result
from .analysis import (
    CurveTable,
    allocation_gain_study,
    bias_variance_curves,
    calibration_experiment,
    default_p_grid,
    estimator_rmse_study,
    fixed_curves_monte_carlo,
    info_bound_table,
    kl_and_cross_entropy,
    master_curve_table,
    psychometric_trial_probabilities,
    recover_parameters,
    summarize_recovery,
)
from .config import ExperimentConfig, list_presets, load_config, load_preset, parse_config
from .dataset import Dataset, read_dataset, write_dataset
from .models import CategoricalModel, SimulatorModel, get_model

logger = logging.getLogger(__name__)

LOG_FORMAT: Final[str] = "%(asctime)s [%(name)s] [%(levelname)s] %(message)s"

EXIT_OK: Final[int] = 0
EXIT_CONFIG: Final[int] = 2
EXIT_DATA: Final[int] = 3
EXIT_RUNTIME: Final[int] = 4

_EXIT_CODES: Final[dict[type[Error], int]] = {
    ConfigError: EXIT_CONFIG,
    DataError: EXIT_DATA,
    SampleCapReached: EXIT_RUNTIME,
    NoExactLikelihood: EXIT_RUNTIME,
    BudgetInfeasible: EXIT_RUNTIME,
}

Outcome = Result[list[Path], Error]


def exit_code(error: Error) -> int:
    return _EXIT_CODES.get(type(error), EXIT_RUNTIME)


def _output_dir(config: ExperimentConfig) -> Path:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stamp(config: ExperimentConfig) -> dict[str, Any]:
    return {"config_hash": config.hash(), "seed": config.seed, "model": config.model}


def _write_json(path: Path, payload: dict[str, Any], config: ExperimentConfig) -> Path:
    path.write_text(json.dumps({**_stamp(config), **payload}, indent=2, sort_keys=True) + "\n")
    logger.info("Wrote %s", path)
    return path


def _dataset_path(out: Path, config: ExperimentConfig, t: int, d: int) -> Path:
    return out / "datasets" / f"{config.model}-t{t:03d}-d{d:03d}.jsonl"


def _read(path: str, config: ExperimentConfig) -> Result[tuple[SimulatorModel, Dataset], DataError]:
    match read_dataset(path, get_model):
        case Err(error):
            return Err(error)
        case Ok(data):
            pass
    if data.model != config.model:
        return Err(DataError(path, f"dataset of model {data.model!r}, config is for {config.model!r}"))
    return Ok((get_model(config.model).unwrap(), data))


def _theta(args: argparse.Namespace, config: ExperimentConfig, model: SimulatorModel) -> Result[Any, ConfigError]:
    theta = config.theta_true if args.theta is None else args.theta
    return model.parameter_space().validate(theta)


# --- commands --- #


def cmd_generate(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    """
    Writes `n_datasets` datasets for every generating parameter vector,
    seeded as `recover` seeds them.
    """
    model = get_model(config.model).unwrap()
    out = _output_dir(config)
    (out / "datasets").mkdir(exist_ok=True)
    written = []
    for t, theta in enumerate(config.thetas()):
        for d in range(config.n_datasets):
            data = model.generate(config.n_trials, theta, derive_seed(config.seed, t, d))
            data = replace(data, metadata=_stamp(config))
            path = _dataset_path(out, config, t, d)
            write_dataset(path, data, model)
            written.append(path)
    logger.info("Wrote %d datasets to %s", len(written), out / "datasets")
    return Ok(written)


def cmd_estimate(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    """
    Estimates the log-likelihood of a dataset file at one parameter vector
    with the selected estimator of the config.
    """
    match _read(args.data, config):
        case Err(error):
            return Err(error)
        case Ok((model, data)):
            pass
    match _theta(args, config, model):
        case Err(error):
            return Err(error)
        case Ok(theta):
            pass
    if not 0 <= args.estimator < len(config.estimators):
        return Err(ConfigError("--estimator", f"index {args.estimator} out of {len(config.estimators)}"))
    spec = config.estimators[args.estimator]
    out = _output_dir(config)
    payload: dict[str, Any] = {"dataset": args.data, "theta": [float(t) for t in theta], "estimator": spec.kind}
    match spec.kind:
        case "exact":
            match model.exact_loglik(data, theta):
                case Err(error):
                    return Err(error)
                case Ok(loglik):
                    payload |= {"loglik": loglik, "variance": 0.0, "std_error": 0.0}
        case "fixed":
            report = estimate_fixed(model, data, theta, spec.samples, spec.variant, config.seed, spec.m_min)
            payload |= {
                "loglik": report.loglik,
                "variance": None,
                "std_error": None,
                "samples": spec.samples,
                "total_samples": report.total_samples,
                "trial_logliks": report.trial_logliks().tolist(),
            }
        case _:
            threshold = config.entry.threshold(len(data)) if spec.early_stop == "chance" else spec.early_stop
            engine = EngineConfig(spec.repeats, threshold, spec.sample_cap, config.seed, config.threads)
            match estimate_parallel(model, data, theta, engine):
                case Err(error):
                    return Err(error)
                case Ok(report):
                    payload |= report.to_dict() | {"repeats": spec.repeats, "threshold": threshold}
    name = f"estimate-{Path(args.data).stem}-{args.estimator}.json"
    return Ok([_write_json(out / name, payload, config)])


def cmd_fit(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    """
    Fits a dataset file with every estimator of the config (or the one
    selected with --estimator). Budget exhaustion is reported in the output,
    not as a failure.
    """
    match _read(args.data, config):
        case Err(error):
            return Err(error)
        case Ok((model, data)):
            pass
    estimators = config.build_estimators()
    if args.estimator is not None:
        if not 0 <= args.estimator < len(estimators):
            return Err(ConfigError("--estimator", f"index {args.estimator} out of {len(estimators)}"))
        selected = [(args.estimator, estimators[args.estimator])]
    else:
        selected = list(enumerate(estimators))
    out = _output_dir(config)
    written = []
    for m, estimator in selected:
        optimizer = config.optimizer.build(derive_seed(config.seed, m), config.threads)
        match fit_mle(model, data, estimator, optimizer):
            case Err(error):
                return Err(error)
            case Ok(fit):
                pass
        if fit.budget_exhausted:
            logger.warning("Fit with %s exhausted its evaluation budget", estimator.label)
        payload = {"dataset": args.data, "names": list(model.parameter_space().names), **fit.to_dict()}
        written.append(_write_json(out / f"fit-{Path(args.data).stem}-{estimator.label}.json", payload, config))
    return Ok(written)


def cmd_recover(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    """
    Parameter recovery over the generation grid: one row per (parameter
    vector, estimator) in recovery.csv, one row per fit in recovery_fits.csv.
    """
    model = get_model(config.model).unwrap()
    # cells run in parallel, each fit on one thread
    estimators = [spec.build(config.entry, config.n_trials) for spec in config.estimators]
    records = recover_parameters(
        model,
        config.thetas(),
        estimators,
        config.n_datasets,
        config.n_trials,
        config.optimizer.build(config.seed),
        config.seed,
        config.threads,
    )
    out = _output_dir(config)
    names = model.parameter_space().names
    table = summarize_recovery(records, names, _stamp(config) | {"n_trials": config.n_trials})
    table.to_csv(out / "recovery.csv")
    fits: dict[str, list[Any]] = {
        "theta_index": [r.theta_index for r in records],
        "dataset": [r.dataset for r in records],
        "method": [r.method for r in records],
    }
    for j, name in enumerate(names):
        fits[f"{name}_true"] = [r.theta_true[j] for r in records]
        fits[f"{name}_hat"] = [np.nan if r.theta_hat is None else r.theta_hat[j] for r in records]
    fits["samples_per_trial"] = [r.samples_per_trial for r in records]
    fits["loglik_loss"] = [r.loglik_loss for r in records]
    fits["budget_exhausted"] = [r.budget_exhausted for r in records]
    fits["status"] = [r.status for r in records]
    CurveTable("recovery_fits", fits, _stamp(config)).to_csv(out / "recovery_fits.csv")
    failed = sum(r.theta_hat is None for r in records)
    if failed:
        logger.warning("%d of %d fits failed; see the status column", failed, len(records))
    return Ok([out / "recovery.csv", out / "recovery_fits.csv"])


def cmd_calibrate(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    model = get_model(config.model).unwrap()
    engine = EngineConfig(repeats=config.calibration.repeats, master_seed=config.seed)
    match calibration_experiment(
        model, config.theta_true, config.calibration.n_datasets, engine, config.n_trials, config.threads
    ):
        case Err(error):
            return Err(error)
        case Ok(report):
            pass
    out = _output_dir(config)
    table = report.to_table()
    table = replace(table, metadata=table.metadata | _stamp(config))
    table.to_csv(out / "calibration.csv")
    summary = _write_json(out / "calibration.json", report.to_dict(), config)
    return Ok([out / "calibration.csv", summary])


def cmd_curves(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    """
    Bias, variance, master-curve, information-bound and RMSE tables.
    """
    spec = config.curves
    out = _output_dir(config)
    stamp = _stamp(config)
    p_grid = default_p_grid(spec.points, spec.p_min)
    tables = [
        bias_variance_curves(p_grid, spec.fixed_samples, spec.repeats),
        master_curve_table(
            np.linspace(spec.lambda_min, spec.lambda_max, spec.points),
            [m for m in spec.fixed_samples if m >= spec.lambda_max],
        ),
        info_bound_table(np.linspace(0.001, 0.999, 1000)),
        fixed_curves_monte_carlo(p_grid, spec.fixed_samples, spec.monte_carlo_runs, config.seed),
        estimator_rmse_study(psychometric_trial_probabilities(seed=config.seed), seed=config.seed),
    ]
    written = []
    for table in tables:
        path = out / f"{table.name}.csv"
        replace(table, metadata=table.metadata | stamp).to_csv(path)
        written.append(path)
    return Ok(written)


def cmd_gain(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    spec = config.gain
    summary = allocation_gain_study(
        n_trials=spec.n_trials, n_draws=spec.draws, seed=config.seed, budget_factor=spec.budget_factor
    )
    out = _output_dir(config)
    table = CurveTable(
        "gain",
        {
            "draw": list(range(summary.gains.size)),
            "gain": summary.gains.tolist(),
            "rounded_gain": summary.rounded.tolist(),
            "replications": [1] * summary.gains.size,
        },
        _stamp(config) | {"monte_carlo": True},
    )
    table.to_csv(out / "gain.csv")
    return Ok([out / "gain.csv", _write_json(out / "gain.json", summary.to_dict(), config)])


def cmd_entropy(config: ExperimentConfig, args: argparse.Namespace) -> Outcome:
    """
    Entropy of --p, and cross-entropy and KL divergence against --q, by
    sampling and IBS, next to the exact values.
    """
    try:
        source = CategoricalModel(args.p)
        target = CategoricalModel(args.q) if args.q is not None else source
    except ValueError as exc:
        return Err(ConfigError("--p/--q", str(exc)))
    engine = EngineConfig(master_seed=config.seed, workers=config.threads)
    match kl_and_cross_entropy(source, target, args.runs, engine):
        case Err(error):
            return Err(error)
        case Ok(estimate):
            pass
    payload: dict[str, Any] = {
        "p": list(args.p),
        "runs": args.runs,
        "entropy": {"estimate": estimate.entropy.value, "std_error": estimate.entropy.std_error,
                    "exact": source.entropy()},
    }
    if args.q is not None:
        exact_cross = source.cross_entropy(target)
        payload |= {
            "q": list(args.q),
            "cross_entropy": {"estimate": estimate.cross_entropy.value,
                              "std_error": estimate.cross_entropy.std_error, "exact": exact_cross},
            "kl": {"estimate": estimate.kl.value, "std_error": estimate.kl.std_error,
                   "exact": exact_cross - source.entropy()},
        }
    print(json.dumps(payload, indent=2))
    return Ok([_write_json(_output_dir(config) / "entropy.json", payload, config)])


Command = Callable[[ExperimentConfig, argparse.Namespace], Outcome]

COMMANDS: Final[dict[str, Command]] = {
    "generate": cmd_generate,
    "estimate": cmd_estimate,
    "fit": cmd_fit,
    "recover": cmd_recover,
    "calibrate": cmd_calibrate,
    "curves": cmd_curves,
    "gain": cmd_gain,
    "entropy": cmd_entropy,
}

# commands that run without an experiment config
_CONFIG_OPTIONAL: Final[frozenset[str]] = frozenset({"curves", "gain", "entropy"})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invbinom", description="Log-likelihood estimation for simulator models by inverse binomial sampling"
    )
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", help="experiment config (TOML)")
    source.add_argument("--preset", help="named preset, or 'list' to show them")
    parser.add_argument("--seed", type=int, help="master seed, overrides the config")
    parser.add_argument("--out", help="output directory, overrides the config")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command")

    commands.add_parser("generate", help="simulate datasets")
    estimate = commands.add_parser("estimate", help="estimate the log-likelihood of a dataset")
    estimate.add_argument("--data", required=True)
    estimate.add_argument("--theta", type=float, nargs="+")
    estimate.add_argument("--estimator", type=int, default=0, help="index in the config's estimators")
    fit = commands.add_parser("fit", help="maximum-likelihood fit of a dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument("--estimator", type=int, help="index in the config's estimators (default: all)")
    commands.add_parser("recover", help="parameter recovery over the generation grid")
    commands.add_parser("calibrate", help="calibration of the variance estimate")
    commands.add_parser("curves", help="bias, variance and RMSE tables")
    commands.add_parser("gain", help="precision gain of repeat allocation")
    entropy = commands.add_parser("entropy", help="entropy and KL divergence of categorical distributions")
    entropy.add_argument("--p", type=float, nargs="+", required=True)
    entropy.add_argument("--q", type=float, nargs="+")
    entropy.add_argument("--runs", type=int, default=100_000)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _load(args: argparse.Namespace) -> Result[ExperimentConfig, ConfigError]:
    if args.preset is not None:
        loaded = load_preset(args.preset)
    elif args.config is not None:
        loaded = load_config(args.config)
    elif args.command in _CONFIG_OPTIONAL:
        loaded = parse_config({"experiment": {"model": "orientation", "output": "."}})
    else:
        return Err(ConfigError("config", f"'{args.command}' needs --config or --preset"))
    return loaded.map(lambda config: config.with_overrides(args.seed, args.out, args.threads))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    if args.preset == "list":
        print("\n".join(list_presets()))
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    if args.threads < 1:
        logger.error("--threads must be >= 1")
        return EXIT_CONFIG
    match _load(args):
        case Err(error):
            logger.error("%s", error)
            return EXIT_CONFIG
        case Ok(config):
            pass
    logger.info("Running %s on %s (config %s)", args.command, config.model, config.hash()[:12])
    match COMMANDS[args.command](config, args):
        case Err(error):
            logger.error("%s", error)
            return exit_code(error)
        case Ok(paths):
            for path in paths:
                logger.info("Output: %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
