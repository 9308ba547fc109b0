"""Explicit estimators for the families that have them."""
import logging
from typing import Callable

import numpy as np

from ..chain import TupleCounts
from ..likelihood import MethodKind, MethodSpec, Objective
from ..models import Family, ModelSpec, make_model
from ..utils.errors import DataDegenerate, MarkovInferenceError, NoClosedForm, OrderMismatch
from .optimizer import FitResult

logger = logging.getLogger(__name__)


def _ratio(numerator: float, denominator: float, what: str) -> float:
    if denominator <= 0.0:
        raise DataDegenerate(f"No observations for {what}")
    return numerator / denominator


def _symmetric_ml(counts: TupleCounts) -> np.ndarray:
    N = counts.pairs()
    return np.array([_ratio(N[0, 1] + N[1, 0], N.sum(), "any transition")])


def _symmetric_pl(counts: TupleCounts) -> np.ndarray:
    N = counts.leading(3)
    rho = _ratio(N[0, 1, 0] + N[1, 0, 1], N[0, :, 0].sum() + N[1, :, 1].sum(), "returns a.b.a")
    root, other = np.sqrt(rho), np.sqrt(1.0 - rho)
    return np.array([root / (root + other)])


def _general_ml(counts: TupleCounts) -> np.ndarray:
    N = counts.pairs()
    return np.array(
        [
            _ratio(N[0, 1], N[0].sum(), "transitions from the first state"),
            _ratio(N[1, 0], N[1].sum(), "transitions from the second state"),
        ]
    )


def _ising_ml(counts: TupleCounts) -> np.ndarray:
    N = counts.pairs()
    same, switch = N[0, 0] + N[1, 1], N[0, 1] + N[1, 0]
    if same <= 0.0 or switch <= 0.0:
        raise DataDegenerate("Ising estimate needs both repeats and switches")
    return np.array([np.log(same / switch)])


def _ising_pl(counts: TupleCounts) -> np.ndarray:
    N = counts.leading(3)
    same, switch = N[0, 0, 0] + N[1, 1, 1], N[0, 1, 0] + N[1, 0, 1]
    if same <= 0.0 or switch <= 0.0:
        raise DataDegenerate("Ising PL estimate needs a.a.a and a.b.a triples")
    return np.array([0.5 * np.log(same / switch)])


def _reflecting_ml(counts: TupleCounts) -> np.ndarray:
    N = counts.pairs()
    k = N.shape[0]
    up = sum(N[i, i + 1] for i in range(1, k - 1))
    down = sum(N[i, i - 1] for i in range(1, k - 1))
    return np.array([_ratio(up, up + down, "interior states")])


def _saturated_ml(counts: TupleCounts) -> np.ndarray:
    N = counts.pairs()
    rows = N.sum(axis=1, keepdims=True)
    if np.any(rows <= 0.0):
        raise DataDegenerate("Saturated estimate needs every state to be left at least once")
    return (N / rows)[:, :-1].reshape(-1)


Estimator = Callable[[TupleCounts], np.ndarray]

# QL coincides with ML whenever the equilibrium does not depend on theta.
CLOSED_FORMS: dict[tuple[Family, MethodKind], Estimator] = {
    (Family.SYMMETRIC_TWO_STATE, MethodKind.ML): _symmetric_ml,
    (Family.SYMMETRIC_TWO_STATE, MethodKind.QL): _symmetric_ml,
    (Family.SYMMETRIC_TWO_STATE, MethodKind.PL): _symmetric_pl,
    (Family.GENERAL_TWO_STATE, MethodKind.ML): _general_ml,
    (Family.ISING, MethodKind.ML): _ising_ml,
    (Family.ISING, MethodKind.QL): _ising_ml,
    (Family.ISING, MethodKind.PL): _ising_pl,
    (Family.REFLECTING_WALK, MethodKind.ML): _reflecting_ml,
    (Family.SATURATED, MethodKind.ML): _saturated_ml,
}


def has_closed_form(spec: ModelSpec, method: MethodSpec) -> bool:
    if method.kind == MethodKind.PL and method.order != 1:
        return False
    return (spec.family, method.kind) in CLOSED_FORMS


def closed_form_fit(spec: ModelSpec, method: MethodSpec, counts: TupleCounts) -> FitResult:
    """Explicit closed-form estimator, used as an oracle against `fit`."""
    if not has_closed_form(spec, method):
        raise NoClosedForm(f"No closed form for {spec.family.value} with {method}")
    if counts.order < method.required_order:
        raise OrderMismatch(f"{method} needs counts of order {method.required_order}")
    model = make_model(spec)
    theta = CLOSED_FORMS[(spec.family, method.kind)](counts)

    objective = Objective.from_counts(model, method, counts)
    try:
        value = objective.value(theta)
        grad_norm = float(np.abs(objective.scaled_gradient(theta)).max())
    except MarkovInferenceError as e:
        logger.warning(f"Closed-form estimate outside the open domain: {e}")
        value, grad_norm = float("nan"), float("nan")
    return FitResult(
        theta_hat=theta,
        method=method,
        loglik_at_max=value,
        gradient_norm=grad_norm,
        converged=True,
        n_starts_used=0,
        best_start_index=-1,
        theta_names=model.theta_names,
        n_effective=float(counts.n_effective),
        step_norm=0.0,
    )
