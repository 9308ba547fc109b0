"""Limit covariance of sqrt(n)(theta_hat - theta_0) for each estimation method."""
import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from ..likelihood import MethodKind, MethodSpec
from ..models import ParametricModel
from ..utils.errors import NoClosedForm, SingularInformation
from .ingredients import (
    MLIngredients,
    PLIngredients,
    QLIngredients,
    info_J,
    pl_ingredients,
    ql_ingredients,
)

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12

Ingredients = Union[MLIngredients, QLIngredients, PLIngredients]


@dataclass(frozen=True)
class AvarResult:
    method: MethodSpec
    sigma: np.ndarray
    sds: np.ndarray
    ingredients: Ingredients
    theta_names: tuple[str, ...] = ()

    def standard_errors(self, n: float) -> np.ndarray:
        """sqrt(Sigma_jj / n)."""
        return self.sds / np.sqrt(n)


def _inverse(matrix: np.ndarray, what: str) -> np.ndarray:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularInformation(
            f"{what} has condition number {cond:.3g}; parameter not identified"
        )
    p = matrix.shape[0]
    return scipy.linalg.solve(matrix, np.eye(p), assume_a="sym")


def sandwich(bread: np.ndarray, meat: np.ndarray, what: str = "J") -> np.ndarray:
    """bread^-1 meat bread^-1, symmetrised."""
    inv = _inverse(bread, what)
    sigma = inv @ meat @ inv
    return 0.5 * (sigma + sigma.T)


def avar(
    model: ParametricModel, theta: Sequence[float] | np.ndarray, method: MethodSpec
) -> AvarResult:
    ingredients: Ingredients
    if method.kind == MethodKind.ML:
        ingredients = info_J(model, theta)
        sigma = _inverse(ingredients.J, "J")
        sigma = 0.5 * (sigma + sigma.T)
    elif method.kind == MethodKind.QL:
        ingredients = ql_ingredients(model, theta, method.order)
        sigma = sandwich(ingredients.J_k, ingredients.K_k, f"J_{method.order}")
    else:
        if method.order != 1:
            raise NoClosedForm(
                f"No limit-variance formula for PL of order {method.order}; use a Monte Carlo study"
            )
        ingredients = pl_ingredients(model, theta)
        sigma = sandwich(ingredients.J_0, ingredients.K_0, "J_0")

    diagonal = np.diag(sigma)
    if np.any(diagonal < -1e-12 * max(1.0, float(np.abs(diagonal).max()))):
        logger.warning(f"{method} limit variance has a negative diagonal entry: {diagonal}")
    sds = np.sqrt(np.clip(diagonal, 0.0, None))
    return AvarResult(method, sigma, sds, ingredients, model.theta_names)


def are(avar_ml: AvarResult, avar_other: AvarResult) -> np.ndarray:
    """Per-parameter efficiency var_ML / var_method."""
    return np.diag(avar_ml.sigma) / np.diag(avar_other.sigma)
