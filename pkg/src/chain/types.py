"""Value types for finite-state Markov chains."""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..utils.errors import InvalidSpec
from ..utils.validation import validate_labels, validate_probability_vector, validate_stochastic

APERIODICITY_TOL = 1e-12
MAX_STATES_DENSE = 26


def _frozen(array: np.ndarray, dtype: type = float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateSpace:
    """State count and display labels; states are indexed 0..S-1 internally."""

    size: int
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.size < 2:
            raise InvalidSpec(f"State space needs at least 2 states, got {self.size}")
        object.__setattr__(self, "labels", tuple(self.labels))
        validate_labels(self.labels, self.size)

    @classmethod
    def integers(cls, size: int, start: int = 1) -> "StateSpace":
        return cls(size, tuple(str(start + i) for i in range(size)))

    @classmethod
    def dna(cls) -> "StateSpace":
        # Row order of the Kimura/Blaisdell transition matrix: purines first.
        return cls(4, ("A", "G", "C", "T"))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidSpec(f"Unknown state label: {label!r}") from None


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic S x S matrix over a state space."""

    states: StateSpace
    p: np.ndarray

    def __post_init__(self) -> None:
        p = _frozen(self.p)
        validate_stochastic(p)
        if p.shape[0] != self.states.size:
            raise InvalidSpec(
                f"Matrix of size {p.shape[0]} does not match {self.states.size} states"
            )
        object.__setattr__(self, "p", p)

    @classmethod
    def from_array(
        cls, p: np.ndarray | Sequence[Sequence[float]], states: Optional[StateSpace] = None
    ) -> "TransitionMatrix":
        arr = np.asarray(p, dtype=float)
        return cls(states or StateSpace.integers(arr.shape[0]), arr)

    @property
    def size(self) -> int:
        return self.states.size

    @property
    def is_irreducible(self) -> bool:
        n_components, _ = connected_components(self.p > 0.0, directed=True, connection="strong")
        return bool(n_components == 1)

    @property
    def second_eigenvalue_modulus(self) -> float:
        moduli = np.sort(np.abs(np.linalg.eigvals(self.p)))[::-1]
        return float(moduli[1])

    @property
    def is_aperiodic(self) -> bool:
        return self.second_eigenvalue_modulus < 1.0 - APERIODICITY_TOL


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray

    def __post_init__(self) -> None:
        pi = _frozen(self.pi)
        validate_probability_vector(pi)
        object.__setattr__(self, "pi", pi)


@dataclass(frozen=True)
class GammaMatrices:
    """Accumulated deviations of P^k from equilibrium.

    gamma sums from k=0 and gamma_bar from k=1.
    """

    gamma: np.ndarray
    gamma_bar: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", _frozen(self.gamma))
        object.__setattr__(self, "gamma_bar", _frozen(self.gamma_bar))


@dataclass(frozen=True)
class ChainPath:
    states: StateSpace
    x: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        x = _frozen(self.x, dtype=np.intp)
        if x.ndim != 1 or x.size < 2:
            raise InvalidSpec(f"Chain path needs at least 2 states, got {x.size}")
        if x.min() < 0 or x.max() >= self.states.size:
            raise InvalidSpec(f"Path entries must lie in 0..{self.states.size - 1}")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        """Number of transitions."""
        return int(self.x.size - 1)

    def labels(self) -> list[str]:
        return [self.states.labels[i] for i in self.x]


@dataclass(frozen=True)
class TupleCounts:
    """Dense counts of m-tuples (sliding windows of length m)."""

    order: int
    counts: np.ndarray
    n_effective: int
    states: Optional[StateSpace] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        counts = _frozen(self.counts)
        if self.order < 1 or counts.ndim != self.order:
            raise InvalidSpec(
                f"Counts array of rank {counts.ndim} does not match order {self.order}"
            )
        if len(set(counts.shape)) != 1:
            raise InvalidSpec(f"Counts must be cubic over states, got shape {counts.shape}")
        if counts.min() < 0:
            raise InvalidSpec("Counts must be non-negative")
        if abs(counts.sum() - self.n_effective) > 1e-9 * max(1.0, self.n_effective):
            raise InvalidSpec(
                f"Counts total {counts.sum()} differs from n_effective {self.n_effective}"
            )
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_array(
        cls, counts: np.ndarray | Sequence, states: Optional[StateSpace] = None
    ) -> "TupleCounts":
        arr = np.asarray(counts, dtype=float)
        return cls(arr.ndim, arr, int(round(arr.sum())), states)

    @property
    def size(self) -> int:
        return int(self.counts.shape[0])

    def leading(self, order: int) -> np.ndarray:
        """Counts of the first `order` symbols of each window (trailing axes summed)."""
        if order > self.order:
            raise InvalidSpec(f"Cannot derive order-{order} counts from order {self.order}")
        axes = tuple(range(order, self.order))
        return self.counts.sum(axis=axes) if axes else np.asarray(self.counts)

    def pairs(self) -> np.ndarray:
        return self.leading(2)
