"""Smooth maps from R^p onto open parameter domains.

Every transform exposes ``forward(z) -> theta``, ``inverse(theta) -> z`` and
``jacobian(z)`` (d theta / d z, shape (p, p)); the optimiser works in z.
"""
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.special import expit, logit

from ..utils.errors import OutOfDomain


def _dexpit(s: np.ndarray) -> np.ndarray:
    return s * (1.0 - s)


def _safe_logit(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise OutOfDomain(f"Value outside the open unit interval: {x}")
    return np.asarray(logit(x))


class Transform(ABC):
    dim: int

    @abstractmethod
    def forward(self, z: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def inverse(self, theta: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def jacobian(self, z: np.ndarray) -> np.ndarray: ...


class Identity(Transform):
    def __init__(self, dim: int):
        self.dim = dim

    def forward(self, z: np.ndarray) -> np.ndarray:
        return np.array(z, dtype=float)

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        return np.array(theta, dtype=float)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        return np.eye(self.dim)


class Logit(Transform):
    """Open box (lower, upper) per coordinate."""

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.dim = self.lower.size

    def forward(self, z: np.ndarray) -> np.ndarray:
        return self.lower + (self.upper - self.lower) * expit(np.asarray(z, dtype=float))

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        return _safe_logit((np.asarray(theta) - self.lower) / (self.upper - self.lower))

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        return np.diag((self.upper - self.lower) * _dexpit(expit(np.asarray(z, dtype=float))))


class AdditiveLogistic(Transform):
    """Open simplex {theta_i > 0, sum(theta) < 1}."""

    def __init__(self, dim: int):
        self.dim = dim

    def forward(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        shift = max(0.0, float(z.max()))
        e = np.exp(z - shift)
        return e / (np.exp(-shift) + e.sum())

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        rest = 1.0 - theta.sum()
        if np.any(theta <= 0.0) or rest <= 0.0:
            raise OutOfDomain(f"Not inside the open simplex: {theta}")
        return np.log(theta) - np.log(rest)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        theta = self.forward(z)
        return np.diag(theta) - np.outer(theta, theta)


class Blockwise(Transform):
    """Independent transforms on consecutive coordinate blocks."""

    def __init__(self, blocks: Sequence[Transform]):
        self.blocks = list(blocks)
        self.bounds = np.cumsum([0] + [b.dim for b in self.blocks])
        self.dim = int(self.bounds[-1])

    def _split(self, x: np.ndarray) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)
        return [x[self.bounds[i] : self.bounds[i + 1]] for i in range(len(self.blocks))]

    def forward(self, z: np.ndarray) -> np.ndarray:
        return np.concatenate([b.forward(part) for b, part in zip(self.blocks, self._split(z))])

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        return np.concatenate([b.inverse(part) for b, part in zip(self.blocks, self._split(theta))])

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        return scipy.linalg.block_diag(
            *[b.jacobian(part) for b, part in zip(self.blocks, self._split(z))]
        )


class KimuraTransform(Transform):
    """(alpha, beta, gamma, delta) with all four diagonal entries positive.

    alpha, beta in (0, 1/2); gamma, delta in (0, 1 - 2 max(alpha, beta)).
    The map has a kink along alpha == beta.
    """

    dim = 4

    def forward(self, z: np.ndarray) -> np.ndarray:
        s = expit(np.asarray(z, dtype=float))
        alpha, beta = 0.5 * s[0], 0.5 * s[1]
        c = 1.0 - 2.0 * max(alpha, beta)
        return np.array([alpha, beta, c * s[2], c * s[3]])

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        alpha, beta, gamma, delta = np.asarray(theta, dtype=float)
        c = 1.0 - 2.0 * max(alpha, beta)
        return _safe_logit(np.array([2.0 * alpha, 2.0 * beta, gamma / c, delta / c]))

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        s = expit(np.asarray(z, dtype=float))
        ds = _dexpit(s)
        c = 1.0 - max(s[0], s[1])
        dc = np.zeros(4)
        if s[0] >= s[1]:
            dc[0] = -ds[0]
        else:
            dc[1] = -ds[1]
        J = np.zeros((4, 4))
        J[0, 0] = 0.5 * ds[0]
        J[1, 1] = 0.5 * ds[1]
        J[2] = s[2] * dc
        J[2, 2] += c * ds[2]
        J[3] = s[3] * dc
        J[3, 3] += c * ds[3]
        return J


class KimuraSixTransform(Transform):
    """(alpha, beta, gamma1, delta1, gamma2, delta2).

    Purine rows are bounded by 1-2alpha, pyrimidine rows by 1-2beta.
    """

    dim = 6

    def forward(self, z: np.ndarray) -> np.ndarray:
        s = expit(np.asarray(z, dtype=float))
        alpha, beta = 0.5 * s[0], 0.5 * s[1]
        c1, c2 = 1.0 - 2.0 * alpha, 1.0 - 2.0 * beta
        return np.array([alpha, beta, c1 * s[2], c1 * s[3], c2 * s[4], c2 * s[5]])

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        alpha, beta, g1, d1, g2, d2 = np.asarray(theta, dtype=float)
        c1, c2 = 1.0 - 2.0 * alpha, 1.0 - 2.0 * beta
        return _safe_logit(np.array([2 * alpha, 2 * beta, g1 / c1, d1 / c1, g2 / c2, d2 / c2]))

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        s = expit(np.asarray(z, dtype=float))
        ds = _dexpit(s)
        c1, c2 = 1.0 - s[0], 1.0 - s[1]
        J = np.zeros((6, 6))
        J[0, 0] = 0.5 * ds[0]
        J[1, 1] = 0.5 * ds[1]
        for row, c, parent in ((2, c1, 0), (3, c1, 0), (4, c2, 1), (5, c2, 1)):
            J[row, parent] = -ds[parent] * s[row]
            J[row, row] = c * ds[row]
        return J


def equicorrelation_rho_min(p: np.ndarray) -> float:
    """Smallest rho keeping every diagonal entry of (1-rho) 1 p^T + rho I non-negative."""
    p = np.asarray(p, dtype=float)
    return float(np.max(-p / (1.0 - p)))


class EquicorrelationTransform(Transform):
    """(rho, p_1..p_{S-1}): p on the open simplex, rho in (rho_min(p), 1)."""

    def __init__(self, n_states: int):
        self.n_states = n_states
        self.simplex = AdditiveLogistic(n_states - 1)
        self.dim = n_states

    def _full(self, free: np.ndarray) -> np.ndarray:
        return np.append(free, 1.0 - free.sum())

    def forward(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        free = self.simplex.forward(z[1:])
        lo = equicorrelation_rho_min(self._full(free))
        rho = lo + (1.0 - lo) * expit(z[0])
        return np.concatenate([[rho], free])

    def inverse(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        free = theta[1:]
        z_free = self.simplex.inverse(free)
        lo = equicorrelation_rho_min(self._full(free))
        z0 = _safe_logit(np.array([(theta[0] - lo) / (1.0 - lo)]))
        return np.concatenate([z0, z_free])

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        s0 = float(expit(z[0]))
        free = self.simplex.forward(z[1:])
        full = self._full(free)
        lo = equicorrelation_rho_min(full)
        dfree = self.simplex.jacobian(z[1:])
        dfull = np.vstack([dfree, -dfree.sum(axis=0)])
        b = int(np.argmin(full))
        dlo = -dfull[b] / (1.0 - full[b]) ** 2
        J = np.zeros((self.dim, self.dim))
        J[0, 0] = (1.0 - lo) * _dexpit(np.array(s0))
        J[0, 1:] = (1.0 - s0) * dlo
        J[1:, 1:] = dfree
        return J
