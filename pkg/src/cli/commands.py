"""Command implementations behind the markov-pql CLI.

Commands return plain rows or flat documents; writing and printing is left
to the caller so the same numbers reach every output format.
"""
import logging
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from ..asymptotics import AvarResult, avar, mc_study
from ..asymptotics.montecarlo import MAX_FAILURE_RATE
from ..chain import ChainPath, SimulationInit, TupleCounts, simulate
from ..estimate import fit
from ..likelihood import MethodKind, MethodSpec, Objective
from ..misspec import DEFAULT_BASE, eps_sweep
from ..models import Family, ModelSpec, ParametricModel, make_model
from ..utils.errors import InvalidSpec, MarkovInferenceError
from .fixtures import FIXTURES
from .io import Alphabet, format_sequence, write_atomic, write_csv, write_json
from .run_config import RunConfig

logger = logging.getLogger(__name__)

Row = dict[str, Any]

REPRODUCIBLE = ("5.0", "5.1", "5.2", "5.4", "6.1", "7.sweep")
TABLE_6_1_THETA = (0.027, 0.041, 0.123, 0.128)
TABLE_6_1_N = 500
TOLERANCES = {"5.0": 0.0, "5.1": 5e-3, "5.2": 5e-3, "5.4": 5e-3, "6.1": 2e-3, "7.sweep": 1e-6}


def method_column(method: MethodSpec) -> str:
    """'ml', 'ql', 'pl' for the default orders, otherwise the full label."""
    if method.kind == MethodKind.QL and method.order == 2:
        return "ql"
    return method.label


def alphabet_for(model: ParametricModel) -> Alphabet:
    return Alphabet.DNA if model.states.labels == ("A", "G", "C", "T") else Alphabet.INTEGERS


# -- simulate -----------------------------------------------------------------------


def cmd_simulate(config: RunConfig, output: Optional[str | Path] = None) -> ChainPath:
    """Simulate a path and write it with a '#' metadata header."""
    model = make_model(config.model)
    theta = model.check(config.require_theta())
    if config.n is None:
        raise InvalidSpec("simulate needs n (number of transitions) in the run configuration")
    init = SimulationInit.stationary()
    if config.init_state is not None:
        init = SimulationInit.fixed(model.states.index(config.init_state))
    chain = simulate(model.transition(theta), config.n, init, config.seed)
    header = {
        "model": config.model.family.value,
        "theta": ",".join(repr(float(t)) for t in theta),
        "seed": config.seed,
        "n": config.n,
        "alphabet": alphabet_for(model).value,
    }
    target = output or config.output
    if target is not None:
        write_atomic(target, format_sequence(chain, header))
        logger.info(f"Wrote {chain.n} transitions to {target}")
    return chain


# -- fit ----------------------------------------------------------------------------


def cmd_fit(counts: TupleCounts, config: RunConfig) -> Row:
    """Fit one method and report estimates, asymptotic sds and the equilibrium."""
    model = make_model(config.model)
    method = config.method_spec
    result = fit(Objective.from_counts(model, method, counts), config.fit)
    doc: Row = result.as_dict()
    doc["n_effective"] = counts.n_effective
    doc["model"] = config.model.family.value

    try:
        limit = avar(model, result.theta_hat, method)
        for name, se in zip(model.theta_names, limit.standard_errors(counts.n_effective)):
            doc[f"sd.{name}"] = float(se)
    except MarkovInferenceError as e:
        logger.warning(f"No asymptotic sd for {method}: {e}")
        doc["sd_error"] = str(e)

    labels = counts.states.labels if counts.states is not None else model.states.labels
    pi = model.stationary(result.theta_hat)
    for label, value in zip(labels, pi):
        doc[f"equilibrium.{label}"] = float(value)
    logger.info(f"{method} fit of {model.name}: {np.round(result.theta_hat, 6).tolist()}")
    return doc


# -- avar ---------------------------------------------------------------------------


def _avar_all(
    model: ParametricModel, theta: Sequence[float], methods: Sequence[MethodSpec]
) -> tuple[dict[str, AvarResult], dict[str, str]]:
    results: dict[str, AvarResult] = {}
    errors: dict[str, str] = {}
    for method in methods:
        column = method_column(method)
        try:
            results[column] = avar(model, theta, method)
        except MarkovInferenceError as e:
            logger.warning(f"{method} limit variance unavailable: {e}")
            errors[column] = str(e)
    return results, errors


def sd_rows(
    model: ParametricModel, theta: Sequence[float], methods: Sequence[MethodSpec]
) -> list[Row]:
    """One row per parameter: <method>_sd and are_<method> = var_ml / var_method."""
    results, errors = _avar_all(model, theta, methods)
    columns = [method_column(m) for m in methods]
    rows: list[Row] = []
    for j, name in enumerate(model.theta_names):
        row: Row = {"parameter": name}
        for column in columns:
            row[f"{column}_sd"] = float(results[column].sds[j]) if column in results else np.nan
        if "ml" in results:
            var_ml = results["ml"].sigma[j, j]
            for column in columns:
                if column != "ml":
                    row[f"are_{column}"] = (
                        float(var_ml / results[column].sigma[j, j]) if column in results else np.nan
                    )
        row["error"] = "; ".join(f"{c}: {msg}" for c, msg in errors.items())
        rows.append(row)
    return rows


def cmd_avar(config: RunConfig) -> list[Row]:
    model = make_model(config.model)
    theta = model.check(config.require_theta())
    return sd_rows(model, theta, config.method_specs)


# -- sweep --------------------------------------------------------------------------


def _theta_columns(model: ParametricModel, theta: Sequence[float]) -> Row:
    return {f"theta.{name}": float(value) for name, value in zip(model.theta_names, theta)}


def _are_grid(model: ParametricModel, config: RunConfig) -> list[Row]:
    rows = []
    for point in config.grid or []:
        row = _theta_columns(model, point)
        try:
            theta = model.check(point)
            results, errors = _avar_all(model, theta, config.method_specs)
            ml = results.get("ml")
            for column, result in results.items():
                for j, name in enumerate(model.theta_names):
                    row[f"{column}_sd.{name}"] = float(result.sds[j])
                    if ml is not None and column != "ml":
                        row[f"are_{column}.{name}"] = float(ml.sigma[j, j] / result.sigma[j, j])
            row["error"] = "; ".join(f"{c}: {msg}" for c, msg in errors.items())
        except MarkovInferenceError as e:
            row["error"] = str(e)
        rows.append(row)
    return rows


def _ql_order(model: ParametricModel, config: RunConfig) -> list[Row]:
    rows = []
    for point in config.grid or []:
        for k in config.orders:
            row = _theta_columns(model, point)
            row["k"] = k
            try:
                theta = model.check(point)
                ml = avar(model, theta, MethodSpec.ml())
                ql = avar(model, theta, MethodSpec.ql(k))
                for j, name in enumerate(model.theta_names):
                    row[f"are.{name}"] = float(ml.sigma[j, j] / ql.sigma[j, j])
                row["error"] = ""
            except MarkovInferenceError as e:
                row["error"] = str(e)
            rows.append(row)
    return rows


def _least_false(model: ParametricModel, config: RunConfig) -> list[Row]:
    if len(config.base) != len(DEFAULT_BASE):
        raise InvalidSpec(f"base needs four values (alpha, beta, gamma, delta), got {config.base}")
    sweep = eps_sweep(model, config.eps, config.method_specs, config.base, config.fit)
    return [row.as_dict(model.theta_names) for row in sweep]


SWEEPS: dict[str, Callable[[ParametricModel, RunConfig], list[Row]]] = {
    "are-grid": _are_grid,
    "ql-order": _ql_order,
    "least-false": _least_false,
}


def cmd_sweep(kind: str, config: RunConfig) -> list[Row]:
    """One row per grid point; failures land in the error column."""
    if kind not in SWEEPS:
        raise InvalidSpec(f"Unknown sweep {kind!r}; choose from {sorted(SWEEPS)}")
    if kind != "least-false" and not config.grid:
        raise InvalidSpec(f"Sweep {kind} needs a grid of parameter points")
    model = make_model(config.model)
    rows = SWEEPS[kind](model, config)
    logger.info(f"Sweep {kind}: {len(rows)} rows")
    return rows


# -- reproduce ----------------------------------------------------------------------

STANDARD_METHODS = (MethodSpec.ml(), MethodSpec.ql(2), MethodSpec.pl(1))


def table_5_0() -> list[Row]:
    rows = []
    for fixture in FIXTURES.values():
        for label, counts in zip(("V", "C"), fixture.counts):
            rows.append({"text": fixture.name, "from": label, "V": counts[0], "C": counts[1]})
    return rows


def table_5_1() -> list[Row]:
    model = make_model(ModelSpec(family=Family.EQUICORRELATION, n_states=3))
    return sd_rows(model, [0.5, 0.3, 0.6], STANDARD_METHODS)


def table_5_2() -> list[Row]:
    model = make_model(ModelSpec(family=Family.ISING))
    rows = []
    for beta in (0.0, 0.5, 1.0, 1.5, 3.0):
        row = sd_rows(model, [beta], (MethodSpec.ml(), MethodSpec.pl(1)))[0]
        rows.append({"beta": beta, "ml_sd": row["ml_sd"], "pl_sd": row["pl_sd"]})
    return rows


def table_5_4() -> list[Row]:
    model = make_model(ModelSpec(family=Family.THREE_STATE))
    return sd_rows(model, [0.21, 0.55], STANDARD_METHODS)


def table_6_1_theory() -> list[Row]:
    model = make_model(ModelSpec(family=Family.KIMURA4))
    rows = sd_rows(model, TABLE_6_1_THETA, STANDARD_METHODS)
    for row, true in zip(rows, TABLE_6_1_THETA):
        row["true"] = true
    return rows


def table_6_1_monte_carlo(
    reps: int, seed: int, workers: int = 1, max_failure_rate: float = MAX_FAILURE_RATE
) -> list[Row]:
    model = make_model(ModelSpec(family=Family.KIMURA4))
    rows: list[Row] = [
        {"parameter": name, "true": t} for name, t in zip(model.theta_names, TABLE_6_1_THETA)
    ]
    for method in STANDARD_METHODS:
        column = method_column(method)
        summary = mc_study(
            model,
            TABLE_6_1_THETA,
            method,
            TABLE_6_1_N,
            reps,
            seed,
            workers=workers,
            max_failure_rate=max_failure_rate,
        )
        for j, row in enumerate(rows):
            row[f"{column}_mean"] = float(summary.mean[j])
            row[f"{column}_sd_mc"] = float(summary.sd_scaled[j])
            row[f"{column}_failed"] = summary.n_failed
    return rows


def cmd_reproduce(
    table: str,
    outdir: str | Path,
    reps: int = 1000,
    seed: int = 20050429,
    workers: int = 1,
    monte_carlo: bool = True,
    max_failure_rate: float = MAX_FAILURE_RATE,
) -> list[Path]:
    """Regenerate one table into `outdir` together with a manifest."""
    if table not in REPRODUCIBLE:
        raise InvalidSpec(f"Unknown table {table!r}; choose from {list(REPRODUCIBLE)}")
    out = Path(outdir)
    stem = "table_" + table.replace(".", "_")
    written: list[Path] = []
    inputs: dict[str, Any] = {}

    if table == "5.0":
        written.append(write_csv(out / f"{stem}.csv", table_5_0()))
        inputs = {"fixtures": sorted(FIXTURES)}
    elif table == "5.1":
        written.append(write_csv(out / f"{stem}.csv", table_5_1()))
        inputs = {"model": "equicorrelation", "theta": [0.5, 0.3, 0.6]}
    elif table == "5.2":
        written.append(write_csv(out / f"{stem}.csv", table_5_2()))
        inputs = {"model": "ising", "beta": [0.0, 0.5, 1.0, 1.5, 3.0]}
    elif table == "5.4":
        written.append(write_csv(out / f"{stem}.csv", table_5_4()))
        inputs = {"model": "three_state", "theta": [0.21, 0.55]}
    elif table == "6.1":
        written.append(write_csv(out / f"{stem}_theory.csv", table_6_1_theory()))
        inputs = {"model": "kimura4", "theta": list(TABLE_6_1_THETA), "n": TABLE_6_1_N}
        if monte_carlo:
            rows = table_6_1_monte_carlo(reps, seed, workers, max_failure_rate)
            written.append(write_csv(out / f"{stem}_monte_carlo.csv", rows))
            inputs.update({"reps": reps, "seed": seed})
    else:
        model = make_model(ModelSpec(family=Family.KIMURA4))
        sweep = eps_sweep(model)
        rows = [r.as_dict(model.theta_names) for r in sweep]
        written.append(write_csv(out / f"{stem}.csv", rows))
        inputs = {"truth": "kimura6", "model": "kimura4", "base": list(DEFAULT_BASE)}

    manifest = {
        "table": table,
        "inputs": inputs,
        "tolerance": TOLERANCES[table],
        "files": [p.name for p in written],
    }
    written.append(write_json(out / f"{stem}_manifest.json", manifest))
    logger.info(f"Reproduced table {table} into {out}")
    return written

