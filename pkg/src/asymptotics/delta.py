"""Delta-method inference for smooth functions psi(theta) of the model parameters."""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import norm

from ..chain import TupleCounts
from ..likelihood import MethodSpec
from ..models import Family, ParametricModel, Saturated
from ..utils import numdiff
from ..utils.errors import DataDegenerate, InvalidSpec, OutOfDomain, SingularP
from .variance import AvarResult, avar

logger = logging.getLogger(__name__)

ScalarFn = Callable[[np.ndarray], float]
GradientFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FocusParameter:
    """A scalar estimand psi(theta) with an optional analytic gradient."""

    name: str
    psi_fn: ScalarFn
    gradient_fn: Optional[GradientFn] = None

    def value(self, theta: Sequence[float] | np.ndarray) -> float:
        return float(self.psi_fn(np.asarray(theta, dtype=float)))

    def gradient(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.gradient_fn is not None:
            return np.asarray(self.gradient_fn(theta), dtype=float)
        return numdiff.gradient(self.psi_fn, theta)

    def numerical_gradient(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        return numdiff.gradient(self.psi_fn, np.asarray(theta, dtype=float))


def delta_method(
    avar: AvarResult, focus: FocusParameter, theta: Sequence[float] | np.ndarray
) -> float:
    """tau^2 = grad(psi)^T Sigma grad(psi)."""
    grad = focus.gradient(theta)
    if grad.shape != (avar.sigma.shape[0],):
        raise InvalidSpec(
            f"{focus.name} gradient has {grad.size} entries for {avar.sigma.shape[0]} parameters"
        )
    if not np.all(np.isfinite(grad)):
        raise OutOfDomain(f"{focus.name} gradient is not finite at theta={np.asarray(theta)}")
    return float(grad @ avar.sigma @ grad)


def confidence_interval(
    psi_hat: float, tau2: float, n: float, level: float = 0.95
) -> tuple[float, float]:
    """psi_hat -/+ z * tau / sqrt(n)."""
    if not 0.0 < level < 1.0:
        raise InvalidSpec(f"Confidence level must lie in (0, 1), got {level}")
    half = norm.ppf(0.5 + 0.5 * level) * np.sqrt(tau2 / n)
    return psi_hat - half, psi_hat + half


# -- generic focus parameters ----------------------------------------------------


def coordinate(model: ParametricModel, j: int | str) -> FocusParameter:
    if isinstance(j, str) and j not in model.theta_names:
        raise InvalidSpec(f"{model.name} has no parameter {j!r}")
    index = model.theta_names.index(j) if isinstance(j, str) else j
    if not 0 <= index < model.dim:
        raise InvalidSpec(f"{model.name} has no parameter {j!r}")
    unit = np.eye(model.dim)[index]
    return FocusParameter(model.theta_names[index], lambda t: float(t[index]), lambda t: unit)


def stationary_probability(model: ParametricModel, state: int | str) -> FocusParameter:
    """p_a(theta), with gradient p_a v_a."""
    a = model.states.index(state) if isinstance(state, str) else state

    def gradient(theta: np.ndarray) -> np.ndarray:
        return model.stationary(theta)[a] * model.stationary_scores(theta).v[a]

    return FocusParameter(
        f"equilibrium.{model.states.labels[a]}",
        lambda t: float(model.stationary(t)[a]),
        gradient,
    )


def _log_determinant(P: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(P)
    if sign <= 0.0:
        raise SingularP(f"Transition matrix determinant is not positive (sign {sign:+.0f})")
    return float(logdet)


def asynchronous_distance(model: ParametricModel) -> FocusParameter:
    """Delta = -log|P(theta)| / 4 with gradient -Tr(P^-1 dP_j) / 4."""

    def psi(theta: np.ndarray) -> float:
        return -0.25 * _log_determinant(model.transition(theta).p)

    def gradient(theta: np.ndarray) -> np.ndarray:
        P = model.transition(theta).p
        _log_determinant(P)
        inverse = np.linalg.inv(P)
        return -0.25 * np.einsum("ji,ijk->k", inverse, model.transition_jacobian(theta))

    return FocusParameter("asynchronous_distance", psi, gradient)


# -- Kimura4 focus parameters ----------------------------------------------------


def _require_kimura4(model: ParametricModel) -> None:
    if model.name != Family.KIMURA4.value:
        raise InvalidSpec(f"Focus parameter needs the kimura4 model, got {model.name}")


def kimura_distance_coefficients(P: np.ndarray) -> np.ndarray:
    """c_1..c_4 with d log|P| = sum_j c_j d theta_j for the four-parameter Kimura matrix."""
    _log_determinant(P)
    inv = np.linalg.inv(P)

    def e(r: int, s: int) -> float:
        return float(inv[r - 1, s - 1])

    c1 = -2 * e(1, 1) + e(3, 1) + e(4, 1) - 2 * e(2, 2) + e(3, 2) + e(4, 2)
    c2 = e(1, 3) + e(2, 3) - 2 * e(3, 3) + e(1, 4) + e(2, 4) - 2 * e(4, 4)
    c3 = e(2, 1) - e(1, 1) - e(3, 3) + e(4, 3)
    c4 = e(1, 2) - e(2, 2) + e(3, 4) - e(4, 4)
    return np.array([c1, c2, c3, c4])


def kimura_distance(model: ParametricModel) -> FocusParameter:
    """Asynchronous distance with the gradient assembled from the c coefficients."""
    _require_kimura4(model)
    generic = asynchronous_distance(model)
    return FocusParameter(
        "asynchronous_distance",
        generic.psi_fn,
        lambda t: -0.25 * kimura_distance_coefficients(model.transition(t).p),
    )


def kimura_focus(model: ParametricModel, name: str) -> FocusParameter:
    """Type-level summaries of the Kimura4 chain (type 1 = A, G; type 2 = C, T)."""
    _require_kimura4(model)

    def p_stay_1(t: np.ndarray) -> float:
        a, b = t[0], t[1]
        return b * (1 - 2 * a) / (a + b)

    def p_stay_2(t: np.ndarray) -> float:
        a, b = t[0], t[1]
        return a * (1 - 2 * b) / (a + b)

    def p_switch(t: np.ndarray) -> float:
        a, b = t[0], t[1]
        return 2 * a * b / (a + b)

    def psi_12(t: np.ndarray) -> float:
        a, b = t[0], t[1]
        return 2 * b * (a + b) / (a * (1 + 2 * b) ** 2)

    def psi_21(t: np.ndarray) -> float:
        a, b = t[0], t[1]
        return 2 * a * (a + b) / (b * (1 + 2 * a) ** 2)

    def grad_stay_1(t: np.ndarray) -> np.ndarray:
        a, b = t[0], t[1]
        s2 = (a + b) ** 2
        return np.array([-b * (1 + 2 * b) / s2, a * (1 - 2 * a) / s2, 0.0, 0.0])

    def grad_stay_2(t: np.ndarray) -> np.ndarray:
        a, b = t[0], t[1]
        s2 = (a + b) ** 2
        return np.array([b * (1 - 2 * b) / s2, -a * (1 + 2 * a) / s2, 0.0, 0.0])

    def grad_switch(t: np.ndarray) -> np.ndarray:
        a, b = t[0], t[1]
        s2 = (a + b) ** 2
        return np.array([2 * b**2 / s2, 2 * a**2 / s2, 0.0, 0.0])

    table: dict[str, tuple[ScalarFn, Optional[GradientFn]]] = {
        "p1": (p_stay_1, grad_stay_1),
        "p2": (p_stay_2, grad_stay_2),
        "p12": (p_switch, grad_switch),
        "p21": (p_switch, grad_switch),
        "gamma_over_delta": (
            lambda t: t[2] / t[3],
            lambda t: np.array([0.0, 0.0, 1 / t[3], -t[2] / t[3] ** 2]),
        ),
        "psi12": (psi_12, None),
        "psi21": (psi_21, None),
    }
    if name not in table:
        raise InvalidSpec(f"Unknown Kimura focus parameter {name!r}; choose from {sorted(table)}")
    psi, grad = table[name]
    return FocusParameter(name, psi, grad)


KIMURA_FOCUS_NAMES = ("p1", "p2", "p12", "p21", "gamma_over_delta", "psi12", "psi21")


def focus_by_name(model: ParametricModel, name: str) -> FocusParameter:
    """Resolve 'distance', 'equilibrium.<label>', a parameter name or a Kimura summary."""
    if name == "distance":
        if model.name == Family.KIMURA4.value:
            return kimura_distance(model)
        return asynchronous_distance(model)
    if name.startswith("equilibrium."):
        return stationary_probability(model, name.split(".", 1)[1])
    if name in model.theta_names:
        return coordinate(model, name)
    return kimura_focus(model, name)


# -- model-free distance ---------------------------------------------------------


@dataclass(frozen=True)
class DistanceEstimate:
    distance: float
    tau2: float
    n_effective: float

    @property
    def standard_error(self) -> float:
        return float(np.sqrt(self.tau2 / self.n_effective))


def nonparametric_distance(counts: TupleCounts) -> DistanceEstimate:
    """Asynchronous distance from row-normalised pair counts with its ML variance."""

    N = counts.pairs()
    rows = N.sum(axis=1, keepdims=True)
    if np.any(rows <= 0.0):
        raise DataDegenerate("Every state must be left at least once to estimate the distance")
    model = Saturated(counts.states)
    theta = model.theta_from_matrix(N / rows)
    focus = asynchronous_distance(model)
    value = focus.value(theta)
    tau2 = delta_method(avar(model, theta, MethodSpec.ml()), focus, theta)
    logger.info(f"Nonparametric asynchronous distance {value:.4f} (tau^2={tau2:.4g})")
    return DistanceEstimate(value, tau2, float(counts.n_effective))
