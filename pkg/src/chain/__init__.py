"""Finite-state Markov chain fundamentals."""
from .core import (
    fundamental_matrix,
    gamma_matrices,
    gamma_series,
    k_step,
    stationary_distribution,
)
from .simulation import SimulationInit, count_array, count_tuples, simulate, simulate_many
from .types import (
    ChainPath,
    GammaMatrices,
    StateSpace,
    StationaryDistribution,
    TransitionMatrix,
    TupleCounts,
)

__all__ = [
    "ChainPath",
    "GammaMatrices",
    "SimulationInit",
    "StateSpace",
    "StationaryDistribution",
    "TransitionMatrix",
    "TupleCounts",
    "count_array",
    "count_tuples",
    "fundamental_matrix",
    "gamma_matrices",
    "gamma_series",
    "k_step",
    "simulate",
    "simulate_many",
    "stationary_distribution",
]
