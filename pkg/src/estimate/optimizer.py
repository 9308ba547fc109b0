"""Multistart maximisation of ML/PL/QL objectives over reparameterised domains."""
import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import scipy.linalg
from pydantic import BaseModel, Field
from scipy.optimize import minimize
from scipy.stats import qmc

from ..likelihood import MethodSpec, Objective
from ..utils import numdiff
from ..utils.errors import DataDegenerate, MarkovInferenceError, NoConvergence

logger = logging.getLogger(__name__)

# |z| beyond this means the transform has pushed theta onto the domain boundary.
BOUNDARY_Z = 18.0
FLAT_TOL = 1e-9
SHIFT_RADIUS = 2.0
PENALTY = 1e100
MAX_NEWTON_STEPS = 25
MAX_HALVINGS = 30


class FitOptions(BaseModel):
    """Optimiser settings."""

    n_starts: int = Field(default=5, ge=1)
    grad_tol: float = Field(default=1e-8, gt=0.0)
    step_tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    start_points: Optional[list[list[float]]] = None


@dataclass
class FitResult:
    theta_hat: np.ndarray
    method: MethodSpec
    loglik_at_max: float
    gradient_norm: float
    converged: bool
    n_starts_used: int
    best_start_index: int
    theta_names: tuple[str, ...] = ()
    n_effective: float = 0.0
    step_norm: float = 0.0
    start_values: list[float] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "method": self.method.label,
            "loglik": self.loglik_at_max,
            "gradient_norm": self.gradient_norm,
            "converged": self.converged,
            "n_starts_used": self.n_starts_used,
            "best_start_index": self.best_start_index,
        }
        for name, value in zip(self.theta_names, self.theta_hat):
            out[f"theta.{name}"] = float(value)
        return out


@dataclass
class _StartOutcome:
    index: int
    theta: np.ndarray
    z: np.ndarray
    value: float
    start_value: float
    gradient_norm: float
    step_norm: float
    interior: bool
    hessian: Optional[np.ndarray]


def _start_points(objective: Objective, options: FitOptions) -> list[np.ndarray]:
    model = objective.model
    if options.start_points:
        return [model.check(point) for point in options.start_points]
    base = model.transform.inverse(model.start_point())
    starts = [model.start_point()]
    if options.n_starts > 1:
        halton = qmc.Halton(d=model.dim, scramble=False)
        # The first Halton point is the origin; skip it.
        shifts = halton.random(options.n_starts)[1:]
        for shift in shifts:
            starts.append(model.transform.forward(base + SHIFT_RADIUS * (2.0 * shift - 1.0)))
    return starts


def _newton_polish(
    objective: Objective, theta: np.ndarray, options: FitOptions
) -> tuple[np.ndarray, float, float, Optional[np.ndarray]]:
    """Newton iterations on the scaled objective in theta.

    Returns (theta, grad_norm, step_norm, hessian).
    """
    model = objective.model
    value = objective.scaled_value(theta)
    step_norm = np.inf
    hessian = None
    for _ in range(MAX_NEWTON_STEPS):
        grad = objective.scaled_gradient(theta)
        hessian = numdiff.jacobian(objective.scaled_gradient, theta)
        hessian = 0.5 * (hessian + hessian.T)
        try:
            step = scipy.linalg.solve(hessian, -grad, assume_a="sym")
        except (scipy.linalg.LinAlgError, ValueError):
            break
        if not np.all(np.isfinite(step)):
            break
        accepted = False
        for _ in range(MAX_HALVINGS):
            candidate = theta + step
            if not model.domain_violations(candidate):
                cand_value = objective.scaled_value(candidate)
                if np.isfinite(cand_value) and cand_value >= value - 1e-14 * max(1.0, abs(value)):
                    accepted = True
                    break
            step = 0.5 * step
        if not accepted:
            break
        theta, value = candidate, cand_value
        step_norm = float(np.abs(step).max())
        if step_norm <= options.step_tol:
            break
    grad_norm = float(np.abs(objective.scaled_gradient(theta)).max())
    return theta, grad_norm, step_norm, hessian


def _run_start(
    objective: Objective, index: int, theta0: np.ndarray, options: FitOptions
) -> Optional[_StartOutcome]:
    model = objective.model
    transform = model.transform
    try:
        start_value = objective.scaled_value(theta0)
        z0 = transform.inverse(theta0)
    except MarkovInferenceError as e:
        logger.warning(f"Start {index} rejected: {e}")
        return None
    if not np.isfinite(start_value):
        logger.warning(f"Start {index} has a non-finite objective")
        return None

    def negative(z: np.ndarray) -> tuple[float, np.ndarray]:
        try:
            theta = transform.forward(z)
            value = objective.scaled_value(theta)
            if not np.isfinite(value):
                return PENALTY, np.zeros_like(z)
            grad = transform.jacobian(z).T @ objective.scaled_gradient(theta)
        except MarkovInferenceError:
            return PENALTY, np.zeros_like(z)
        return -value, -grad

    result = minimize(
        negative,
        z0,
        jac=True,
        method="BFGS",
        options={"gtol": options.grad_tol * 1e-2, "maxiter": options.max_iter},
    )
    z = np.asarray(result.x)
    theta = transform.forward(z)
    interior = bool(np.abs(z).max() < BOUNDARY_Z) and not model.domain_violations(theta)
    if not interior:
        value = objective.scaled_value(theta) if not model.domain_violations(theta) else -np.inf
        return _StartOutcome(index, theta, z, value, start_value, np.inf, np.inf, False, None)
    try:
        theta, grad_norm, step_norm, hessian = _newton_polish(objective, theta, options)
    except MarkovInferenceError as e:
        logger.warning(f"Start {index}: Newton refinement failed: {e}")
        grad_norm, step_norm, hessian = float(np.abs(-result.jac).max()), np.inf, None
    value = objective.scaled_value(theta)
    return _StartOutcome(
        index, theta, z, value, start_value, grad_norm, step_norm, True, hessian
    )


def fit(objective: Objective, options: Optional[FitOptions] = None) -> FitResult:
    """Maximise `objective` from several deterministic starts; the best local maximum wins."""
    options = options or FitOptions()
    starts = _start_points(objective, options)
    outcomes = [
        outcome
        for index, theta0 in enumerate(starts)
        if (outcome := _run_start(objective, index, theta0, options)) is not None
    ]
    if not outcomes:
        raise NoConvergence(f"All {len(starts)} starts failed for {objective.method}")

    best = max(outcomes, key=lambda o: (o.value, -o.index))
    if not best.interior:
        raise DataDegenerate(
            f"{objective.method} maximum lies on the domain boundary for {objective.model.name}"
        )
    if not np.isfinite(best.value):
        raise NoConvergence(f"No start reached a finite {objective.method} objective")
    if best.hessian is not None and np.linalg.eigvalsh(best.hessian).max() >= -FLAT_TOL:
        raise DataDegenerate(f"{objective.method} objective is flat at the optimum")

    converged = best.gradient_norm <= options.grad_tol and best.step_norm <= options.step_tol
    if not converged:
        logger.warning(
            f"{objective.method} fit not converged: gradient {best.gradient_norm:.3g}, "
            f"step {best.step_norm:.3g}"
        )
    logger.debug(f"{objective.method} fit: theta={best.theta}, best start {best.index}")
    return FitResult(
        theta_hat=best.theta,
        method=objective.method,
        loglik_at_max=best.value * objective.total,
        gradient_norm=best.gradient_norm,
        converged=converged,
        n_starts_used=len(starts),
        best_start_index=best.index,
        theta_names=objective.model.theta_names,
        n_effective=objective.total,
        step_norm=best.step_norm,
        start_values=[o.start_value * objective.total for o in outcomes],
    )
