"""Least-false parameters when the fitted model is not the true mechanism.

Each method's estimator converges to the maximiser of its limit functional,
the expected log-objective per transition under the true chain. The limit
functionals are ordinary Objectives evaluated on population weights, so the
same optimiser serves estimation and least-false search.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import rel_entr

from ..chain import StateSpace, TransitionMatrix, stationary_distribution
from ..estimate import FitOptions, fit
from ..likelihood import MethodKind, MethodSpec, Objective
from ..models import Kimura6, ParametricModel, kimura_matrix
from ..utils.errors import InvalidSpec, MarkovInferenceError, NoClosedForm

logger = logging.getLogger(__name__)

DEFAULT_BASE = (0.03, 0.04, 0.13, 0.14)
LOW_GAMMA_BASE = (0.03, 0.04, 0.12, 0.14)
EPS_LIMIT = 0.10
EPS_STEP = 0.005


@dataclass(frozen=True)
class TrueMechanism:
    P_true: TransitionMatrix
    pi_true: np.ndarray
    P2_true: np.ndarray

    @classmethod
    def from_matrix(
        cls, P: TransitionMatrix | np.ndarray, states: Optional[StateSpace] = None
    ) -> "TrueMechanism":
        if not isinstance(P, TransitionMatrix):
            P = TransitionMatrix.from_array(P, states)
        pi = stationary_distribution(P).pi
        return cls(P, pi, P.p @ P.p)

    @property
    def size(self) -> int:
        return self.P_true.size

    def pair_weights(self) -> np.ndarray:
        """pi_a pi_{a,b}."""
        return self.pi_true[:, None] * self.P_true.p

    def triple_weights(self) -> np.ndarray:
        """pi_a pi_{a,b} pi_{b,c}."""
        p = self.P_true.p
        return np.einsum("a,ab,bc->abc", self.pi_true, p, p)


def _check_sizes(model: ParametricModel, truth: TrueMechanism) -> None:
    if model.states.size != truth.size:
        raise InvalidSpec(
            f"{truth.size}-state truth cannot be fitted by {model.states.size}-state {model.name}"
        )


def population_objective(
    method: MethodSpec, model: ParametricModel, truth: TrueMechanism
) -> Objective:
    """The limit functional as an Objective with unit total."""
    _check_sizes(model, truth)
    if method.kind == MethodKind.PL:
        if method.order != 1:
            raise NoClosedForm(
                f"Limit functional only implemented for PL of order 1, got {method.order}"
            )
        weights = truth.triple_weights()
    else:
        weights = truth.pair_weights()
    return Objective(model, method, weights, total=1.0, strict=False)


def limit_functional(
    method: MethodSpec,
    model: ParametricModel,
    truth: TrueMechanism,
    theta: Sequence[float] | np.ndarray,
) -> float:
    """H_method(theta); -inf where the truth visits a cell the model forbids."""
    return population_objective(method, model, truth).value(theta)


def _log_or_minus_inf(weights: np.ndarray, probs: np.ndarray) -> Optional[np.ndarray]:
    if np.any((weights > 0.0) & (probs <= 0.0)):
        return None
    with np.errstate(divide="ignore"):
        return np.where(weights > 0.0, np.log(np.where(probs > 0.0, probs, 1.0)), 0.0)


def pl_triple_sum_form(
    model: ParametricModel, truth: TrueMechanism, theta: Sequence[float] | np.ndarray
) -> float:
    """sum pi_a pi_ab pi_bc log(p_ab p_bc / p2_ac)."""
    P = model.transition(theta).p
    conditional = np.einsum("ab,bc->abc", P, P) / np.where(P @ P > 0.0, P @ P, 1.0)[:, None, :]
    weights = truth.triple_weights()
    logs = _log_or_minus_inf(weights, conditional)
    return -np.inf if logs is None else float(np.sum(weights * logs))


def pl_two_step_form(
    model: ParametricModel, truth: TrueMechanism, theta: Sequence[float] | np.ndarray
) -> float:
    """2 H_ML - sum pi_a pi2_ac log p2_ac."""
    P = model.transition(theta).p
    pairs = truth.pair_weights()
    ends = truth.pi_true[:, None] * truth.P2_true
    log_p = _log_or_minus_inf(pairs, P)
    log_p2 = _log_or_minus_inf(ends, P @ P)
    if log_p is None or log_p2 is None:
        return -np.inf
    return float(2.0 * np.sum(pairs * log_p) - np.sum(ends * log_p2))


def _row_kl(truth_rows: np.ndarray, model_rows: np.ndarray) -> np.ndarray:
    return rel_entr(truth_rows, model_rows).sum(axis=-1)


def kl_distance(
    method: MethodSpec,
    model: ParametricModel,
    truth: TrueMechanism,
    theta: Sequence[float] | np.ndarray,
) -> float:
    """Weighted Kullback-Leibler distance whose minimiser is the least-false value."""
    _check_sizes(model, truth)
    P = model.transition(theta).p
    pi_t, P_t = truth.pi_true, truth.P_true.p
    d_ml = float(pi_t @ _row_kl(P_t, P))
    if method.kind == MethodKind.ML:
        return d_ml
    if method.kind == MethodKind.QL:
        d_marginal = float(rel_entr(pi_t, model.stationary(theta)).sum())
        return d_marginal + (method.order - 1) * d_ml
    if method.order != 1:
        raise NoClosedForm(f"PL distance only implemented for order 1, got {method.order}")
    # Distance between the laws of the middle symbol given both neighbours.
    P2_t, P2 = truth.P2_true, P @ P
    truth_mid = np.einsum("ab,bc->acb", P_t, P_t) / np.where(P2_t > 0.0, P2_t, 1.0)[..., None]
    model_mid = np.einsum("ab,bc->acb", P, P) / np.where(P2 > 0.0, P2, 1.0)[..., None]
    weights = pi_t[:, None] * P2_t
    return float(np.sum(weights * _row_kl(truth_mid, model_mid)))


@dataclass(frozen=True)
class LeastFalseResult:
    method: MethodSpec
    theta_0: np.ndarray
    H_at_max: float
    kl_at_min: float
    gradient_norm: float = 0.0
    converged: bool = True
    theta_names: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "method": self.method.label,
            "H": self.H_at_max,
            "kl": self.kl_at_min,
            "converged": self.converged,
        }
        for name, value in zip(self.theta_names, self.theta_0):
            out[f"theta.{name}"] = float(value)
        return out


def least_false(
    method: MethodSpec,
    model: ParametricModel,
    truth: TrueMechanism,
    options: Optional[FitOptions] = None,
) -> LeastFalseResult:
    """Maximise the limit functional with the estimation optimiser."""
    objective = population_objective(method, model, truth)
    result = fit(objective, options)
    kl = kl_distance(method, model, truth, result.theta_hat)
    logger.debug(f"Least-false {method} for {model.name}: {result.theta_hat} (kl={kl:.3g})")
    return LeastFalseResult(
        method=method,
        theta_0=result.theta_hat,
        H_at_max=result.loglik_at_max,
        kl_at_min=kl,
        gradient_norm=result.gradient_norm,
        converged=result.converged,
        theta_names=model.theta_names,
    )


# -- perturbed Kimura experiment ---------------------------------------------------


def default_eps_grid() -> list[float]:
    count = int(round(2 * EPS_LIMIT / EPS_STEP)) + 1
    return [round(float(e), 10) for e in np.linspace(-EPS_LIMIT, EPS_LIMIT, count)]


def kimura6_truth(eps: float, base: Sequence[float] = DEFAULT_BASE) -> TrueMechanism:
    """Kimura6 chain with gamma_1, delta_1 raised and gamma_2, delta_2 lowered by eps."""
    alpha, beta, gamma, delta = base
    theta = np.array([alpha, beta, gamma + eps, delta + eps, gamma - eps, delta - eps])
    Kimura6().check(theta)
    return TrueMechanism.from_matrix(kimura_matrix(*theta), StateSpace.dna())


@dataclass(frozen=True)
class SweepRow:
    eps: float
    method: str
    theta: tuple[float, ...]
    H: float
    kl: float
    converged: bool
    error: str = ""

    def as_dict(self, names: Sequence[str]) -> dict[str, object]:
        out: dict[str, object] = {"eps": self.eps, "method": self.method}
        out.update({name: value for name, value in zip(names, self.theta)})
        out.update({"H": self.H, "kl": self.kl, "converged": self.converged})
        out["error"] = self.error
        return out


def eps_sweep(
    model: ParametricModel,
    eps_grid: Optional[Sequence[float]] = None,
    methods: Sequence[MethodSpec] = (MethodSpec.ml(), MethodSpec.ql(2), MethodSpec.pl(1)),
    base: Sequence[float] = DEFAULT_BASE,
    options: Optional[FitOptions] = None,
) -> list[SweepRow]:
    """Least-false values of `model` under the perturbed six-parameter truth, per method and eps.

    Rows are ordered by eps, then by method. Each fit starts from its
    neighbour's solution and from the unperturbed base values. A failed fit
    is recorded in the row's error field and the sweep continues.
    """
    grid = sorted(default_eps_grid() if eps_grid is None else [float(e) for e in eps_grid])
    if any(abs(e) > EPS_LIMIT + 1e-12 for e in grid):
        raise InvalidSpec(f"eps values must lie in [-{EPS_LIMIT}, {EPS_LIMIT}]")
    options = options or FitOptions()
    previous: dict[str, np.ndarray] = {}
    rows: list[SweepRow] = []
    for eps in grid:
        truth = kimura6_truth(eps, base)
        for method in methods:
            starts = [list(base)] if model.dim == len(base) else [model.start_point().tolist()]
            if method.label in previous:
                starts.insert(0, previous[method.label].tolist())
            try:
                result = least_false(
                    method, model, truth, options.model_copy(update={"start_points": starts})
                )
            except MarkovInferenceError as e:
                logger.warning(f"Least-false {method} failed at eps={eps}: {e}")
                missing = tuple([float("nan")] * model.dim)
                rows.append(
                    SweepRow(eps, method.label, missing, np.nan, np.nan, False, error=str(e))
                )
                continue
            previous[method.label] = result.theta_0
            rows.append(
                SweepRow(
                    eps,
                    method.label,
                    tuple(float(t) for t in result.theta_0),
                    result.H_at_max,
                    result.kl_at_min,
                    result.converged,
                )
            )
        logger.info(f"eps={eps:+.3f} done")
    return rows
