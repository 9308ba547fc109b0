"""Parametric transition models theta -> P(theta) and their log-derivatives."""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..chain import StateSpace, TransitionMatrix, fundamental_matrix, stationary_distribution
from ..utils import numdiff
from ..utils.errors import OutOfDomain
from .transforms import Transform

logger = logging.getLogger(__name__)


class Family(str, Enum):
    SYMMETRIC_TWO_STATE = "symmetric_two_state"
    GENERAL_TWO_STATE = "general_two_state"
    EQUICORRELATION = "equicorrelation"
    THREE_STATE = "three_state"
    ISING = "ising"
    REFLECTING_WALK = "reflecting_walk"
    KIMURA4 = "kimura4"
    KIMURA6 = "kimura6"
    SATURATED = "saturated"


class ModelSpec(BaseModel):
    """Model family plus its fixed hyper-quantities."""

    family: Family
    p_known: Optional[list[float]] = Field(
        default=None,
        description="Equicorrelation: fixed equilibrium vector (rho is then the only parameter)",
    )
    n_states: Optional[int] = Field(
        default=None,
        ge=2,
        description="State count for saturated and unknown-p equicorrelation models",
    )
    k_states: Optional[int] = Field(default=None, ge=3, description="Reflecting walk state count")
    labels: Optional[list[str]] = None


@dataclass(frozen=True)
class Domain:
    """Open box lower < theta < upper, plus optional linear constraints A theta < b."""

    lower: np.ndarray
    upper: np.ndarray
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "Domain":
        return cls(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))

    def violations(self, theta: np.ndarray) -> list[str]:
        problems = []
        for j, (lo, t, hi) in enumerate(zip(self.lower, theta, self.upper)):
            if not lo < t < hi:
                problems.append(f"theta[{j}]={t} not in ({lo}, {hi})")
        if self.A is not None and self.b is not None:
            slack = self.b - self.A @ theta
            for r in np.flatnonzero(slack <= 0.0):
                problems.append(f"linear constraint {r} violated by {-slack[r]:.3g}")
        return problems


@dataclass(frozen=True)
class StationaryScores:
    """v_a = d log p_a / d theta, one row per state."""

    v: np.ndarray

    def check(self, pi: np.ndarray, tol: float = 1e-8) -> bool:
        return bool(np.abs(pi @ self.v).max() <= tol)


class CellScores(NamedTuple):
    """Transition matrix with per-cell log-derivatives u (S,S,p) and i (S,S,p,p)."""

    P: TransitionMatrix
    u: np.ndarray
    i: np.ndarray
    structural: np.ndarray


@dataclass
class ParametricModel(ABC):
    """Base class for theta -> P(theta) families.

    Subclasses implement `_transition`; analytic derivatives are optional and
    fall back to central differences of log p_{a,b}.
    """

    states: StateSpace
    theta_names: tuple[str, ...]
    domain: Domain
    transform: Transform
    periodic: bool = False
    name: str = "model"
    support: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.theta_names)

    @property
    def structural_zeros(self) -> np.ndarray:
        """Cells that are zero for every theta in the domain."""
        if self.support is None:
            return np.zeros((self.states.size, self.states.size), dtype=bool)
        return ~np.asarray(self.support, dtype=bool)

    # -- domain ---------------------------------------------------------------

    def domain_violations(self, theta: np.ndarray) -> list[str]:
        return self.domain.violations(theta)

    def check(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.dim:
            raise OutOfDomain(f"{self.name} expects {self.dim} parameters, got {theta.size}")
        problems = self.domain_violations(theta)
        if problems:
            raise OutOfDomain(f"{self.name}: " + "; ".join(problems))
        return theta

    def start_point(self) -> np.ndarray:
        return self.transform.forward(np.zeros(self.dim))

    # -- transition probabilities ---------------------------------------------

    @abstractmethod
    def _transition(self, theta: np.ndarray) -> np.ndarray:
        """Raw S x S matrix; no domain check."""

    def _transition_jacobian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        """dP/dtheta of shape (S, S, p), or None when not available analytically."""
        return None

    def _transition_hessian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        """d2P/dtheta2 of shape (S, S, p, p); None falls back to differences."""
        return None

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return None

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return None

    def transition(self, theta: Sequence[float] | np.ndarray) -> TransitionMatrix:
        theta = self.check(theta)
        return TransitionMatrix(self.states, self._transition(theta))

    def transition_jacobian(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        theta = self.check(theta)
        jac = self._transition_jacobian(theta)
        if jac is None:
            jac = numdiff.jacobian(self._transition, theta)
            jac[self.structural_zeros] = 0.0
        return jac

    def has_analytic_derivatives(self) -> bool:
        return self._transition_jacobian(self.start_point()) is not None

    def _log_transition(self, theta: np.ndarray) -> np.ndarray:
        P = self._transition(theta)
        with np.errstate(divide="ignore"):
            out = np.log(np.where(P > 0.0, P, 1.0))
        return out

    def log_derivatives(self, theta: Sequence[float] | np.ndarray) -> CellScores:
        """u = d log p / d theta and i = d2 log p / d theta2 per cell."""
        theta = self.check(theta)
        P = self._transition(theta)
        positive = P > 0.0
        jac = self._transition_jacobian(theta)
        if jac is not None:
            hess = self._transition_hessian(theta)
            if hess is None:
                hess = numdiff.jacobian(lambda t: self._transition_jacobian(t), theta)
            safe = np.where(positive, P, 1.0)
            u = jac / safe[..., None]
            i = hess / safe[..., None, None] - u[..., :, None] * u[..., None, :]
        else:
            u = numdiff.jacobian(self._log_transition, theta)
            i = numdiff.hessian(self._log_transition, theta)
        u[~positive] = 0.0
        i[~positive] = 0.0
        return CellScores(TransitionMatrix(self.states, P), u, i, self.structural_zeros)

    # -- equilibrium ----------------------------------------------------------

    def closed_form_stationary(
        self, theta: Sequence[float] | np.ndarray
    ) -> Optional[np.ndarray]:
        """Explicit equilibrium formula for the family, None when there is none."""
        pi = self._stationary_closed_form(self.check(theta))
        return None if pi is None else np.asarray(pi)

    def stationary(self, theta: Sequence[float] | np.ndarray) -> np.ndarray:
        theta = self.check(theta)
        pi = self._stationary_closed_form(theta)
        if pi is None:
            pi = stationary_distribution(TransitionMatrix(self.states, self._transition(theta))).pi
        return np.asarray(pi)

    def stationary_scores(self, theta: Sequence[float] | np.ndarray) -> StationaryScores:
        """v_a: closed form, else the perturbation identity d pi = pi dP Z, else differences."""
        theta = self.check(theta)
        v = self._stationary_scores_closed_form(theta)
        if v is not None:
            return StationaryScores(np.asarray(v))
        P = TransitionMatrix(self.states, self._transition(theta))
        pi = stationary_distribution(P).pi
        jac = self._transition_jacobian(theta)
        if jac is not None:
            Z = fundamental_matrix(P, pi)
            dpi = np.einsum("a,abj,bc->cj", pi, jac, Z)
        else:
            dpi = numdiff.jacobian(
                lambda t: stationary_distribution(
                    TransitionMatrix(self.states, self._transition(t))
                ).pi,
                theta,
            )
        return StationaryScores(dpi / pi[:, None])


def transition_and_scores(
    model: ParametricModel, theta: Sequence[float] | np.ndarray
) -> CellScores:
    return model.log_derivatives(theta)


def stationary_scores(
    model: ParametricModel, theta: Sequence[float] | np.ndarray
) -> StationaryScores:
    return model.stationary_scores(theta)
