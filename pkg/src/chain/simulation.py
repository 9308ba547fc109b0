"""Seeded chain simulation and sliding-window tuple counting.

The seed-to-path map is fixed: with ``rng = numpy.random.default_rng(seed)``
the initial state (when drawn from equilibrium) uses ``rng.random()`` first,
then ``u = rng.random(n)`` drives the transitions. Each draw picks the first
state b with ``u < sum(p[a, :b+1])``.
"""
import bisect
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..utils.errors import InvalidSpec, PathTooShort
from .core import stationary_distribution
from .types import MAX_STATES_DENSE, ChainPath, TransitionMatrix, TupleCounts

logger = logging.getLogger(__name__)

MAX_DENSE_CELLS = MAX_STATES_DENSE**4


@dataclass(frozen=True)
class SimulationInit:
    """Initial-state rule: equilibrium draw (state is None) or a fixed state."""

    state: Optional[int] = None

    @classmethod
    def stationary(cls) -> "SimulationInit":
        return cls()

    @classmethod
    def fixed(cls, state: int) -> "SimulationInit":
        return cls(state)

    @property
    def is_stationary(self) -> bool:
        return self.state is None


def _cumulative(p: np.ndarray) -> np.ndarray:
    cum = np.cumsum(p, axis=-1)
    # Rounding can leave the last cumulative entry just below 1.
    cum[..., -1] = np.inf
    return cum


def _last_positive(p: np.ndarray) -> np.ndarray:
    S = p.shape[-1]
    return S - 1 - np.argmax(p[..., ::-1] > 0.0, axis=-1)


def _initial_distribution(P: TransitionMatrix, init: SimulationInit) -> np.ndarray:
    if init.is_stationary:
        return stationary_distribution(P).pi
    assert init.state is not None
    if not 0 <= init.state < P.size:
        raise InvalidSpec(f"Initial state {init.state} outside 0..{P.size - 1}")
    start = np.zeros(P.size)
    start[init.state] = 1.0
    return start


def simulate(
    P: TransitionMatrix,
    n: int,
    init: SimulationInit = SimulationInit(),
    seed: int = 0,
) -> ChainPath:
    """Simulate x_0..x_n."""
    if n < 1:
        raise InvalidSpec(f"Number of transitions must be >= 1, got {n}")
    start = _initial_distribution(P, init)
    rng = np.random.default_rng(seed)

    cap = _last_positive(P.p).tolist()
    rows = [row.tolist() for row in _cumulative(P.p)]

    x = np.empty(n + 1, dtype=np.intp)
    if init.is_stationary:
        x[0] = min(bisect.bisect_right(_cumulative(start).tolist(), rng.random()), P.size - 1)
    else:
        x[0] = init.state
    draws = rng.random(n).tolist()

    current = int(x[0])
    for i, u in enumerate(draws, start=1):
        current = min(bisect.bisect_right(rows[current], u), cap[current])
        x[i] = current
    return ChainPath(P.states, x, seed=seed)


def simulate_many(
    P: TransitionMatrix,
    n: int,
    reps: int,
    init: SimulationInit = SimulationInit(),
    seed: int = 0,
) -> np.ndarray:
    """Simulate `reps` independent paths at once; returns an integer array (reps, n+1)."""
    if n < 1 or reps < 1:
        raise InvalidSpec(f"Need n >= 1 and reps >= 1, got n={n}, reps={reps}")
    start = _initial_distribution(P, init)
    rng = np.random.default_rng(seed)
    cum = _cumulative(P.p)
    cap = _last_positive(P.p)

    paths = np.empty((reps, n + 1), dtype=np.intp)
    first = (rng.random(reps)[:, None] >= _cumulative(start)[None, :]).sum(axis=1)
    paths[:, 0] = np.minimum(first, _last_positive(start))
    for i in range(1, n + 1):
        prev = paths[:, i - 1]
        step = (rng.random(reps)[:, None] >= cum[prev]).sum(axis=1)
        paths[:, i] = np.minimum(step, cap[prev])
    return paths


def count_array(x: np.ndarray, size: int, m: int) -> np.ndarray:
    """Dense counts of length-m windows of an integer sequence."""
    if size**m > MAX_DENSE_CELLS or (m <= 4 and size > MAX_STATES_DENSE):
        raise InvalidSpec(f"{size} states with windows of length {m} exceed dense count limits")
    windows = sliding_window_view(np.asarray(x, dtype=np.intp), m)
    flat = np.ravel_multi_index(tuple(windows.T), (size,) * m)
    return np.bincount(flat, minlength=size**m).reshape((size,) * m).astype(float)


def count_tuples(path: ChainPath, m: int) -> TupleCounts:
    """Sliding-window m-tuple counts; n_effective = n - m + 2."""
    if m < 1:
        raise InvalidSpec(f"Tuple order must be >= 1, got {m}")
    if path.x.size < m:
        raise PathTooShort(f"Path of {path.x.size} states is shorter than window length {m}")
    counts = count_array(path.x, path.states.size, m)
    return TupleCounts(m, counts, path.x.size - m + 1, path.states)
