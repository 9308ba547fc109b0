"""Concrete model families."""
import logging
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit

from ..chain import StateSpace
from .base import Domain, ParametricModel
from .transforms import (
    AdditiveLogistic,
    Blockwise,
    EquicorrelationTransform,
    Identity,
    KimuraSixTransform,
    KimuraTransform,
    Logit,
    Transform,
    equicorrelation_rho_min,
)

logger = logging.getLogger(__name__)

MatrixFn = Callable[[np.ndarray], np.ndarray]


def _affine_parts(fn: MatrixFn, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Offset and coefficient tensor (S, S, p) of a matrix that is affine in theta."""
    offset = np.asarray(fn(np.zeros(dim)), dtype=float)
    coefficients = np.stack(
        [np.asarray(fn(np.eye(dim)[j]), dtype=float) - offset for j in range(dim)], axis=-1
    )
    return offset, coefficients


class LinearModel(ParametricModel):
    """P(theta) = offset + sum_j theta_j C_j, so second derivatives vanish."""

    def __init__(
        self,
        fn: MatrixFn,
        states: StateSpace,
        theta_names: Sequence[str],
        domain: Domain,
        transform: Transform,
        periodic: bool = False,
        name: str = "linear",
    ):
        offset, coefficients = _affine_parts(fn, len(theta_names))
        support = (np.abs(offset) + np.abs(coefficients).sum(axis=-1)) > 0.0
        super().__init__(
            states=states,
            theta_names=tuple(theta_names),
            domain=domain,
            transform=transform,
            periodic=periodic,
            name=name,
            support=support,
        )
        self.offset = offset
        self.coefficients = coefficients

    def _transition(self, theta: np.ndarray) -> np.ndarray:
        return self.offset + self.coefficients @ theta

    def _transition_jacobian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return self.coefficients.copy()

    def _transition_hessian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        S, p = self.states.size, self.dim
        return np.zeros((S, S, p, p))


class SymmetricTwoState(LinearModel):
    def __init__(self, states: Optional[StateSpace] = None):
        super().__init__(
            lambda t: np.array([[1 - t[0], t[0]], [t[0], 1 - t[0]]]),
            states or StateSpace.integers(2),
            ("theta",),
            Domain.box([0.0], [1.0]),
            Logit([0.0], [1.0]),
            name="symmetric_two_state",
        )

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return np.array([0.5, 0.5])

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return np.zeros((2, 1))


class GeneralTwoState(LinearModel):
    def __init__(self, states: Optional[StateSpace] = None):
        super().__init__(
            lambda t: np.array([[1 - t[0], t[0]], [t[1], 1 - t[1]]]),
            states or StateSpace.integers(2),
            ("alpha", "beta"),
            Domain.box([0.0, 0.0], [1.0, 1.0]),
            Logit([0.0, 0.0], [1.0, 1.0]),
            name="general_two_state",
        )

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        alpha, beta = theta
        return np.array([beta, alpha]) / (alpha + beta)

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        alpha, beta = theta
        w = np.ones(2) / (alpha + beta)
        return np.array([[0.0, 1.0 / beta], [1.0 / alpha, 0.0]]) - w


class ThreeState(LinearModel):
    """Rows (1-a-b, a, b), (a, 1-a-b, b), (a, b, 1-a-b)."""

    def __init__(self, states: Optional[StateSpace] = None):
        def matrix(t: np.ndarray) -> np.ndarray:
            a, b = t
            d = 1 - a - b
            return np.array([[d, a, b], [a, d, b], [a, b, d]])

        super().__init__(
            matrix,
            states or StateSpace.integers(3),
            ("alpha", "beta"),
            Domain(np.zeros(2), np.ones(2), np.array([[1.0, 1.0]]), np.array([1.0])),
            AdditiveLogistic(2),
            name="three_state",
        )

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        a, b = theta
        return np.array(
            [
                a / (2 * a + b),
                (a * a + a * b + b * b) / ((a + 2 * b) * (2 * a + b)),
                b / (a + 2 * b),
            ]
        )

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        a, b = theta
        N = a * a + a * b + b * b
        D1, D2 = 2 * a + b, a + 2 * b
        return np.array(
            [
                [1 / a - 2 / D1, -1 / D1],
                [(2 * a + b) / N - 1 / D2 - 2 / D1, (a + 2 * b) / N - 2 / D2 - 1 / D1],
                [-1 / D2, 1 / b - 2 / D2],
            ]
        )


class Ising(ParametricModel):
    """P = (1/(1+e^beta)) [[e^beta, 1], [1, e^beta]], beta real."""

    def __init__(self, states: Optional[StateSpace] = None):
        super().__init__(
            states=states or StateSpace.integers(2),
            theta_names=("beta",),
            domain=Domain.box([-np.inf], [np.inf]),
            transform=Identity(1),
            name="ising",
        )

    def _transition(self, theta: np.ndarray) -> np.ndarray:
        s = float(expit(theta[0]))
        return np.array([[s, 1 - s], [1 - s, s]])

    def _transition_jacobian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        s = float(expit(theta[0]))
        d = s * (1 - s)
        return np.array([[d, -d], [-d, d]])[..., None]

    def _transition_hessian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        s = float(expit(theta[0]))
        d2 = s * (1 - s) * (1 - 2 * s)
        return np.array([[d2, -d2], [-d2, d2]])[..., None, None]

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return np.array([0.5, 0.5])

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return np.zeros((2, 1))


class ReflectingWalk(LinearModel):
    """Random walk on k states, up with p and down with q=1-p, reflecting at both ends.

    The chain has period 2; gamma quantities use the Cesaro value.
    """

    def __init__(self, k_states: int, states: Optional[StateSpace] = None):
        self.k = k_states

        def matrix(t: np.ndarray) -> np.ndarray:
            p = t[0]
            P = np.zeros((k_states, k_states))
            P[0, 1] = 1.0
            P[-1, -2] = 1.0
            for i in range(1, k_states - 1):
                P[i, i - 1] = 1 - p
                P[i, i + 1] = p
            return P

        super().__init__(
            matrix,
            states or StateSpace.integers(k_states),
            ("p",),
            Domain.box([0.0], [1.0]),
            Logit([0.0], [1.0]),
            periodic=True,
            name="reflecting_walk",
        )

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        p = theta[0]
        q = 1 - p
        k = self.k
        r = p / q
        partial = sum(r**i for i in range(1, k - 1))
        first = 1.0 / (1.0 + partial / p + r ** (k - 2))
        pi = np.empty(k)
        pi[0] = first
        for i in range(2, k):
            pi[i - 1] = first * p ** (i - 2) / q ** (i - 1)
        pi[-1] = first * r ** (k - 2)
        return pi

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        p = theta[0]
        q = 1 - p
        k = self.k
        offsets = np.empty(k)
        offsets[0] = 0.0
        for i in range(2, k):
            offsets[i - 1] = (i - 1) / (p * q) - 1 / p
        offsets[-1] = (k - 2) / (p * q)
        pi = self._stationary_closed_form(theta)
        assert pi is not None
        first = -float(pi @ offsets)
        return (first + offsets)[:, None]


def kimura_matrix(
    alpha: float, beta: float, gamma1: float, delta1: float, gamma2: float, delta2: float
) -> np.ndarray:
    """Rows and columns in the order A, G, C, T."""
    return np.array(
        [
            [1 - 2 * alpha - gamma1, gamma1, alpha, alpha],
            [delta1, 1 - 2 * alpha - delta1, alpha, alpha],
            [beta, beta, 1 - 2 * beta - gamma2, gamma2],
            [beta, beta, delta2, 1 - 2 * beta - delta2],
        ]
    )


def kimura_equilibrium(alpha: float, beta: float, gamma: float, delta: float) -> np.ndarray:
    purine, pyrimidine = beta / (alpha + beta), alpha / (alpha + beta)
    D1, D2 = 2 * alpha + gamma + delta, 2 * beta + gamma + delta
    return np.array(
        [
            purine * (alpha + delta) / D1,
            purine * (alpha + gamma) / D1,
            pyrimidine * (beta + delta) / D2,
            pyrimidine * (beta + gamma) / D2,
        ]
    )


class Kimura4(LinearModel):
    def __init__(self, states: Optional[StateSpace] = None):
        A = np.array(
            [[2.0, 0, 1, 0], [2.0, 0, 0, 1], [0, 2.0, 1, 0], [0, 2.0, 0, 1]]
        )
        super().__init__(
            lambda t: kimura_matrix(t[0], t[1], t[2], t[3], t[2], t[3]),
            states or StateSpace.dna(),
            ("alpha", "beta", "gamma", "delta"),
            Domain(np.zeros(4), np.array([0.5, 0.5, 1.0, 1.0]), A, np.ones(4)),
            KimuraTransform(),
            name="kimura4",
        )

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return kimura_equilibrium(*theta)

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        a, b, g, d = theta
        s = a + b
        D1, D2 = 2 * a + g + d, 2 * b + g + d
        return np.array(
            [
                [-1 / s + 1 / (a + d) - 2 / D1, 1 / b - 1 / s, -1 / D1, 1 / (a + d) - 1 / D1],
                [-1 / s + 1 / (a + g) - 2 / D1, 1 / b - 1 / s, 1 / (a + g) - 1 / D1, -1 / D1],
                [1 / a - 1 / s, -1 / s + 1 / (b + d) - 2 / D2, -1 / D2, 1 / (b + d) - 1 / D2],
                [1 / a - 1 / s, -1 / s + 1 / (b + g) - 2 / D2, 1 / (b + g) - 1 / D2, -1 / D2],
            ]
        )


class Kimura6(LinearModel):
    def __init__(self, states: Optional[StateSpace] = None):
        A = np.zeros((4, 6))
        A[0, [0, 2]] = (2.0, 1.0)
        A[1, [0, 3]] = (2.0, 1.0)
        A[2, [1, 4]] = (2.0, 1.0)
        A[3, [1, 5]] = (2.0, 1.0)
        super().__init__(
            lambda t: kimura_matrix(*t),
            states or StateSpace.dna(),
            ("alpha", "beta", "gamma1", "delta1", "gamma2", "delta2"),
            Domain(np.zeros(6), np.array([0.5, 0.5, 1, 1, 1, 1]), A, np.ones(4)),
            KimuraSixTransform(),
            name="kimura6",
        )


class Saturated(LinearModel):
    """Free p_{a,b} for b < S; the last column closes each row."""

    def __init__(self, states: StateSpace):
        S = states.size

        def matrix(t: np.ndarray) -> np.ndarray:
            free = t.reshape(S, S - 1)
            return np.hstack([free, 1 - free.sum(axis=1, keepdims=True)])

        names = [
            f"p_{states.labels[a]}_{states.labels[b]}" for a in range(S) for b in range(S - 1)
        ]
        A = np.kron(np.eye(S), np.ones((1, S - 1)))
        super().__init__(
            matrix,
            states,
            names,
            Domain(np.zeros(S * (S - 1)), np.ones(S * (S - 1)), A, np.ones(S)),
            Blockwise([AdditiveLogistic(S - 1) for _ in range(S)]),
            name="saturated",
        )

    def theta_from_matrix(self, P: np.ndarray) -> np.ndarray:
        return np.asarray(P)[:, :-1].reshape(-1).copy()


class EquicorrelationKnown(LinearModel):
    """p_{a,b} = (1-rho) p_b + rho delta_{a,b} with p fixed; rho is the only parameter."""

    def __init__(self, p: Sequence[float], states: Optional[StateSpace] = None):
        self.p = np.asarray(p, dtype=float)
        S = self.p.size
        lo = equicorrelation_rho_min(self.p)
        super().__init__(
            lambda t: (1 - t[0]) * np.outer(np.ones(S), self.p) + t[0] * np.eye(S),
            states or StateSpace.integers(S),
            ("rho",),
            Domain.box([lo], [1.0]),
            Logit([lo], [1.0]),
            name="equicorrelation",
        )

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return self.p.copy()

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return np.zeros((self.p.size, 1))


class Equicorrelation(ParametricModel):
    """theta = (rho, p_1..p_{S-1}); p_S closes the equilibrium vector."""

    def __init__(self, n_states: int, states: Optional[StateSpace] = None):
        S = n_states
        A = np.zeros((1, S))
        A[0, 1:] = 1.0
        super().__init__(
            states=states or StateSpace.integers(S),
            theta_names=("rho",) + tuple(f"p_{j}" for j in range(1, S)),
            domain=Domain(
                np.concatenate([[-1.0], np.zeros(S - 1)]), np.ones(S), A, np.ones(1)
            ),
            transform=EquicorrelationTransform(S),
            name="equicorrelation",
        )

    def _p(self, theta: np.ndarray) -> np.ndarray:
        return np.append(theta[1:], 1.0 - theta[1:].sum())

    def domain_violations(self, theta: np.ndarray) -> list[str]:
        problems = super().domain_violations(theta)
        if not problems:
            lo = equicorrelation_rho_min(self._p(theta))
            if theta[0] <= lo:
                problems.append(f"rho={theta[0]} not above {lo:.6g}")
        return problems

    def start_point(self) -> np.ndarray:
        S = self.states.size
        return np.concatenate([[0.5], np.full(S - 1, 1.0 / S)])

    def _transition(self, theta: np.ndarray) -> np.ndarray:
        rho, p = theta[0], self._p(theta)
        S = p.size
        return (1 - rho) * np.outer(np.ones(S), p) + rho * np.eye(S)

    def _transition_jacobian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        rho, p = theta[0], self._p(theta)
        S = p.size
        jac = np.zeros((S, S, S))
        jac[..., 0] = np.eye(S) - np.outer(np.ones(S), p)
        for j in range(1, S):
            jac[:, j - 1, j] += 1 - rho
            jac[:, S - 1, j] -= 1 - rho
        return jac

    def _transition_hessian(self, theta: np.ndarray) -> Optional[np.ndarray]:
        S = self.states.size
        hess = np.zeros((S, S, S, S))
        for j in range(1, S):
            hess[:, j - 1, 0, j] -= 1.0
            hess[:, S - 1, 0, j] += 1.0
            hess[:, j - 1, j, 0] -= 1.0
            hess[:, S - 1, j, 0] += 1.0
        return hess

    def _stationary_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        return self._p(theta)

    def _stationary_scores_closed_form(self, theta: np.ndarray) -> Optional[np.ndarray]:
        p = self._p(theta)
        S = p.size
        v = np.zeros((S, S))
        for j in range(1, S):
            v[j - 1, j] = 1.0 / p[j - 1]
            v[S - 1, j] = -1.0 / p[S - 1]
        return v


class CallableModel(ParametricModel):
    """Arbitrary theta -> P(theta); every derivative comes from central differences."""

    def __init__(
        self,
        fn: MatrixFn,
        states: StateSpace,
        theta_names: Sequence[str],
        domain: Domain,
        transform: Transform,
        periodic: bool = False,
        support: Optional[np.ndarray] = None,
    ):
        super().__init__(
            states=states,
            theta_names=tuple(theta_names),
            domain=domain,
            transform=transform,
            periodic=periodic,
            name="callable",
            support=support,
        )
        self.fn = fn

    def _transition(self, theta: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(theta), dtype=float)
