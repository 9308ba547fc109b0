"""Central finite differences used as derivative fallbacks and test oracles."""
from typing import Callable

import numpy as np

EPS = np.finfo(float).eps
FIRST_ORDER_STEP = EPS ** (1.0 / 3.0)
SECOND_ORDER_STEP = EPS ** (1.0 / 4.0)


def step_sizes(theta: np.ndarray, base: float = FIRST_ORDER_STEP) -> np.ndarray:
    """Per-coordinate steps h_j = base * max(1, |theta_j|)."""
    return base * np.maximum(1.0, np.abs(theta))


def jacobian(fn: Callable[[np.ndarray], np.ndarray], theta: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian; derivative axis is appended last."""
    theta = np.asarray(theta, dtype=float)
    h = step_sizes(theta)
    columns = []
    for j in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[j] += h[j]
        down[j] -= h[j]
        columns.append((np.asarray(fn(up)) - np.asarray(fn(down))) / (2.0 * h[j]))
    return np.stack(columns, axis=-1)


def hessian(fn: Callable[[np.ndarray], np.ndarray], theta: np.ndarray) -> np.ndarray:
    """Central second differences; the two derivative axes are appended last."""
    theta = np.asarray(theta, dtype=float)
    h = step_sizes(theta, SECOND_ORDER_STEP)
    p = theta.size
    f0 = np.asarray(fn(theta))
    out = np.zeros(f0.shape + (p, p))
    for i in range(p):
        for j in range(i, p):
            def shifted(si: float, sj: float) -> np.ndarray:
                t = theta.copy()
                t[i] += si * h[i]
                t[j] += sj * h[j]
                return np.asarray(fn(t))

            if i == j:
                value = (shifted(1.0, 1.0) - 2.0 * f0 + shifted(-1.0, -1.0)) / (4.0 * h[i] ** 2)
            else:
                plus = shifted(1.0, 1.0) + shifted(-1.0, -1.0)
                minus = shifted(1.0, -1.0) + shifted(-1.0, 1.0)
                value = (plus - minus) / (4.0 * h[i] * h[j])
            out[..., i, j] = value
            out[..., j, i] = value
    return out


def gradient(fn: Callable[[np.ndarray], float], theta: np.ndarray) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    return jacobian(lambda t: np.array(fn(t)), theta)
