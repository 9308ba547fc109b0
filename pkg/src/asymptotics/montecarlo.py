"""Seeded Monte Carlo studies of estimator sampling distributions."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..chain import SimulationInit, count_tuples, simulate
from ..estimate import FitOptions, fit
from ..likelihood import MethodSpec, Objective
from ..models import ParametricModel
from ..utils.errors import InvalidSpec, MarkovInferenceError, TooManyFailures
from .delta import FocusParameter

logger = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.05


@dataclass
class Replication:
    index: int
    theta_hat: Optional[np.ndarray]
    focus_values: Optional[np.ndarray] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.theta_hat is not None


@dataclass
class MCSummary:
    """Empirical mean and sqrt(n)-scaled standard deviation over the kept replications."""

    method: MethodSpec
    theta_true: np.ndarray
    n: int
    reps: int
    seed: int
    mean: np.ndarray
    sd_scaled: np.ndarray
    n_failed: int
    estimates: np.ndarray
    theta_names: tuple[str, ...] = ()
    focus_names: tuple[str, ...] = ()
    focus_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    focus_sd_scaled: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def rows(self) -> list[dict[str, object]]:
        out: list[dict[str, object]] = []
        for j, name in enumerate(self.theta_names):
            out.append(
                {
                    "method": self.method.label,
                    "parameter": name,
                    "true": float(self.theta_true[j]),
                    "mean": float(self.mean[j]),
                    "sd_scaled": float(self.sd_scaled[j]),
                }
            )
        return out


def replication_seeds(seed: int, reps: int) -> list[int]:
    """One 64-bit seed per replication from SeedSequence(seed).spawn(reps)."""
    children = np.random.SeedSequence(seed).spawn(reps)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _replicate(
    model: ParametricModel,
    theta_true: np.ndarray,
    method: MethodSpec,
    n: int,
    index: int,
    seed: int,
    options: FitOptions,
    focus: Sequence[FocusParameter],
) -> Replication:
    try:
        path = simulate(model.transition(theta_true), n, SimulationInit.stationary(), seed)
        counts = count_tuples(path, method.required_order)
        result = fit(Objective.from_counts(model, method, counts), options)
    except MarkovInferenceError as e:
        return Replication(index, None, error=str(e))
    if not result.converged:
        reason = f"not converged (gradient {result.gradient_norm:.3g})"
        return Replication(index, None, error=reason)
    values = None
    if focus:
        try:
            values = np.array([f.value(result.theta_hat) for f in focus])
        except MarkovInferenceError as e:
            return Replication(index, None, error=str(e))
    return Replication(index, result.theta_hat, values)


def mc_study(
    model: ParametricModel,
    theta_true: Sequence[float] | np.ndarray,
    method: MethodSpec,
    n: int,
    reps: int,
    seed: int,
    options: Optional[FitOptions] = None,
    workers: int = 1,
    max_failure_rate: float = MAX_FAILURE_RATE,
    focus: Sequence[FocusParameter] = (),
) -> MCSummary:
    """Simulate `reps` stationary chains of n transitions and fit each one.

    Every fit starts from theta_true. Failed or non-converged replications
    are excluded and counted; more than `max_failure_rate` of them raises
    TooManyFailures.
    """
    if reps < 2:
        raise InvalidSpec(f"A Monte Carlo study needs reps >= 2, got {reps}")
    theta_true = model.check(theta_true)
    base = options or FitOptions()
    options = base.model_copy(update={"start_points": [theta_true.tolist()]})
    seeds = replication_seeds(seed, reps)
    logger.info(f"Monte Carlo {method} on {model.name}: n={n}, reps={reps}, seed={seed}")

    def run(index: int) -> Replication:
        return _replicate(model, theta_true, method, n, index, seeds[index], options, focus)

    step = max(1, reps // 10)
    results: list[Replication] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for done, replication in enumerate(pool.map(run, range(reps)), start=1):
                results.append(replication)
                if done % step == 0:
                    logger.info(f"Monte Carlo progress: {done}/{reps}")
    else:
        for index in range(reps):
            results.append(run(index))
            if (index + 1) % step == 0:
                logger.info(f"Monte Carlo progress: {index + 1}/{reps}")

    results.sort(key=lambda r: r.index)
    failed = [r for r in results if not r.ok]
    for r in failed:
        logger.warning(f"Replication {r.index} excluded: {r.error}")
    if len(failed) > max_failure_rate * reps:
        raise TooManyFailures(
            f"{len(failed)} of {reps} replications failed (limit {max_failure_rate:.0%})"
        )

    kept = [r for r in results if r.ok]
    estimates = np.array([r.theta_hat for r in kept])
    scale = np.sqrt(n)
    summary = MCSummary(
        method=method,
        theta_true=theta_true,
        n=n,
        reps=reps,
        seed=seed,
        mean=estimates.mean(axis=0),
        sd_scaled=scale * estimates.std(axis=0, ddof=1),
        n_failed=len(failed),
        estimates=estimates,
        theta_names=model.theta_names,
    )
    if focus:
        values = np.array([r.focus_values for r in kept])
        summary.focus_names = tuple(f.name for f in focus)
        summary.focus_mean = values.mean(axis=0)
        summary.focus_sd_scaled = scale * values.std(axis=0, ddof=1)
    logger.info(f"Monte Carlo {method} finished: {len(kept)} kept, {len(failed)} excluded")
    return summary
