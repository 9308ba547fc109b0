"""Log-likelihood (ML), log-pseudo-likelihood (PL) and log-quasi-likelihood (QL) objectives.

All three are linear in a weight array over tuples: observed counts for
estimation, population tuple probabilities for least-false analysis.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..chain import TupleCounts
from ..models import ParametricModel
from ..utils.errors import InvalidSpec, OrderMismatch, ZeroProbabilityWithPositiveCount

logger = logging.getLogger(__name__)

METHOD_PATTERN = re.compile(r"^(ml|pl|ql)(\d*)$")


class MethodKind(str, Enum):
    ML = "ml"
    PL = "pl"
    QL = "ql"


@dataclass(frozen=True)
class MethodSpec:
    """Estimation strategy plus its order (PL order m >= 1, QL order k >= 2)."""

    kind: MethodKind
    order: int = 0

    def __post_init__(self) -> None:
        if self.kind == MethodKind.PL and self.order < 1:
            raise InvalidSpec(f"PL order must be >= 1, got {self.order}")
        if self.kind == MethodKind.QL and self.order < 2:
            raise InvalidSpec(f"QL order must be >= 2, got {self.order}")

    @classmethod
    def ml(cls) -> "MethodSpec":
        return cls(MethodKind.ML)

    @classmethod
    def pl(cls, m: int = 1) -> "MethodSpec":
        return cls(MethodKind.PL, m)

    @classmethod
    def ql(cls, k: int = 2) -> "MethodSpec":
        return cls(MethodKind.QL, k)

    @classmethod
    def parse(cls, text: str) -> "MethodSpec":
        """'ml', 'pl', 'pl2', 'ql', 'ql3', ..."""
        match = METHOD_PATTERN.match(text.strip().lower())
        if not match:
            raise InvalidSpec(f"Unknown method: {text!r}")
        kind = MethodKind(match.group(1))
        digits = match.group(2)
        if kind == MethodKind.ML:
            if digits:
                raise InvalidSpec(f"ML takes no order: {text!r}")
            return cls.ml()
        default = 1 if kind == MethodKind.PL else 2
        return cls(kind, int(digits) if digits else default)

    @property
    def required_order(self) -> int:
        """Tuple order the objective is built from."""
        return self.order + 2 if self.kind == MethodKind.PL else 2

    @property
    def label(self) -> str:
        if self.kind == MethodKind.ML:
            return "ml"
        if self.kind == MethodKind.PL and self.order == 1:
            return "pl"
        return f"{self.kind.value}{self.order}"

    def __str__(self) -> str:
        return self.label


def _pair_marginal(W: np.ndarray, i: int, j: int) -> np.ndarray:
    axes = tuple(ax for ax in range(W.ndim) if ax not in (i, j))
    return W.sum(axis=axes) if axes else W


def _log_terms(
    W: np.ndarray, P: np.ndarray, strict: bool, what: str = "p"
) -> Optional[np.ndarray]:
    """log P where W > 0 (zero elsewhere); None signals a zero-probability hit in relaxed mode."""
    bad = (W > 0.0) & (P <= 0.0)
    if np.any(bad):
        cell = tuple(int(c) for c in np.argwhere(bad)[0])
        if strict:
            raise ZeroProbabilityWithPositiveCount(
                f"Positive weight {W[cell]} in cell {cell} where {what}=0"
            )
        return None
    with np.errstate(divide="ignore"):
        return np.where(W > 0.0, np.log(np.where(P > 0.0, P, 1.0)), 0.0)


def _matrix_power_derivative(P: np.ndarray, dP: np.ndarray, k: int) -> np.ndarray:
    """d(P^k)/dtheta = sum_i P^i dP P^(k-1-i); dP has shape (S, S, p)."""
    S = P.shape[0]
    powers = [np.eye(S)]
    for _ in range(k - 1):
        powers.append(powers[-1] @ P)
    out = np.zeros_like(dP)
    for i in range(k):
        out += np.einsum("ab,bcj,cd->adj", powers[i], dP, powers[k - 1 - i])
    return out


@dataclass
class Objective:
    """One estimation criterion over a fixed weight array.

    `weights` has rank `method.required_order`; `total` normalises values for
    optimisation and is the number of windows for observed counts.
    """

    model: ParametricModel
    method: MethodSpec
    weights: np.ndarray
    total: float
    strict: bool = True
    _pairs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        need = self.method.required_order
        S = self.model.states.size
        if self.weights.shape != (S,) * need:
            raise OrderMismatch(
                f"{self.method} needs weights of shape {(S,) * need}, got {self.weights.shape}"
            )
        self._pairs = _pair_marginal(self.weights, 0, 1)

    @classmethod
    def from_counts(
        cls,
        model: ParametricModel,
        method: MethodSpec,
        counts: TupleCounts,
        strict: bool = True,
    ) -> "Objective":
        need = method.required_order
        if counts.order < need:
            raise OrderMismatch(f"{method} needs counts of order {need}, got {counts.order}")
        if counts.size != model.states.size:
            raise OrderMismatch(
                f"Counts over {counts.size} states do not match {model.states.size}-state model"
            )
        return cls(model, method, counts.leading(need), float(counts.n_effective), strict)

    @property
    def pairs(self) -> np.ndarray:
        return self._pairs

    # -- values -----------------------------------------------------------------

    def _ml(self, P: np.ndarray, W: np.ndarray) -> float:
        logs = _log_terms(W, P, self.strict)
        return -np.inf if logs is None else float(np.sum(W * logs))

    def value(self, theta: Sequence[float] | np.ndarray) -> float:
        theta = self.model.check(theta)
        P = self.model.transition(theta).p
        kind = self.method.kind
        if kind == MethodKind.ML:
            return self._ml(P, self._pairs)
        if kind == MethodKind.QL:
            return self.marginal_term(theta) + (self.method.order - 1) * self._ml(P, self._pairs)
        m = self.method.order
        total = sum(self._ml(P, _pair_marginal(self.weights, j, j + 1)) for j in range(m + 1))
        # p^(m+1) is positive wherever a chain of positive one-step cells reaches it
        if total == -np.inf:
            return -np.inf
        return total - self.end_term(theta)

    def marginal_term(self, theta: Sequence[float] | np.ndarray) -> float:
        """sum_a N_a log p_a(theta) with N_a the pair row-marginal."""
        pi = self.model.stationary(theta)
        logs = _log_terms(self._pairs.sum(axis=1), pi, self.strict, "p_a")
        return -np.inf if logs is None else float(np.sum(self._pairs.sum(axis=1) * logs))

    def end_term(self, theta: Sequence[float] | np.ndarray) -> float:
        """sum N_{a..c} log p^{(m+1)}_{a,c} over first and last tuple symbols."""
        theta = self.model.check(theta)
        m = self.method.order if self.method.kind == MethodKind.PL else 1
        P = self.model.transition(theta).p
        ends = _pair_marginal(self.weights, 0, self.weights.ndim - 1)
        Pk = np.linalg.matrix_power(P, m + 1)
        logs = _log_terms(ends, Pk, self.strict, f"p^({m + 1})")
        return -np.inf if logs is None else float(np.sum(ends * logs))

    # -- gradients --------------------------------------------------------------

    def gradient(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        theta = self.model.check(theta)
        cells = self.model.log_derivatives(theta)
        u = cells.u
        kind = self.method.kind
        if kind == MethodKind.ML:
            return np.einsum("ab,abj->j", self._pairs, u)
        if kind == MethodKind.QL:
            v = self.model.stationary_scores(theta).v
            return self._pairs.sum(axis=1) @ v + (self.method.order - 1) * np.einsum(
                "ab,abj->j", self._pairs, u
            )
        m = self.method.order
        grad = sum(
            np.einsum("ab,abj->j", _pair_marginal(self.weights, j, j + 1), u) for j in range(m + 1)
        )
        P = cells.P.p
        dP = self.model.transition_jacobian(theta)
        Pk = np.linalg.matrix_power(P, m + 1)
        dPk = _matrix_power_derivative(P, dP, m + 1)
        ends = _pair_marginal(self.weights, 0, self.weights.ndim - 1)
        safe = np.where(Pk > 0.0, Pk, 1.0)
        return np.asarray(grad - np.einsum("ac,acj->j", ends / safe, dPk))

    def scaled_value(self, theta: Sequence[float] | np.ndarray) -> float:
        return self.value(theta) / self.total

    def scaled_gradient(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        return self.gradient(theta) / self.total


def loglik_ml(
    model: ParametricModel,
    theta: Sequence[float] | np.ndarray,
    counts: TupleCounts,
    strict: bool = True,
) -> float:
    return Objective.from_counts(model, MethodSpec.ml(), counts, strict).value(theta)


def loglik_pl(
    model: ParametricModel,
    theta: Sequence[float] | np.ndarray,
    counts: TupleCounts,
    m: int = 1,
    strict: bool = True,
) -> float:
    return Objective.from_counts(model, MethodSpec.pl(m), counts, strict).value(theta)


def loglik_ql(
    model: ParametricModel,
    theta: Sequence[float] | np.ndarray,
    counts: TupleCounts,
    k: int = 2,
    strict: bool = True,
) -> float:
    return Objective.from_counts(model, MethodSpec.ql(k), counts, strict).value(theta)


def gradient(objective: Objective, theta: Sequence[float] | np.ndarray) -> np.ndarray:
    return objective.gradient(theta)


def ql_penalty(
    model: ParametricModel, theta: Sequence[float] | np.ndarray, counts: TupleCounts
) -> float:
    """The equilibrium term sum_a N_a log p_a(theta) that QL adds to (k-1) times log-ML."""
    return Objective.from_counts(model, MethodSpec.ql(2), counts).marginal_term(theta)


def pl_penalty(
    model: ParametricModel, theta: Sequence[float] | np.ndarray, counts: TupleCounts, m: int = 1
) -> float:
    """The end-point term sum N_{a..c} log p^{(m+1)}_{a,c} that PL subtracts."""
    return Objective.from_counts(model, MethodSpec.pl(m), counts).end_term(theta)
