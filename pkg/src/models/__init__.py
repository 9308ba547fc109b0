"""Parametric transition-probability models."""
from .base import (
    CellScores,
    Domain,
    Family,
    ModelSpec,
    ParametricModel,
    StationaryScores,
    stationary_scores,
    transition_and_scores,
)
from .factory import make_model, state_count
from .families import (
    CallableModel,
    Equicorrelation,
    EquicorrelationKnown,
    GeneralTwoState,
    Ising,
    Kimura4,
    Kimura6,
    LinearModel,
    ReflectingWalk,
    Saturated,
    SymmetricTwoState,
    ThreeState,
    kimura_equilibrium,
    kimura_matrix,
)

__all__ = [
    "CallableModel",
    "CellScores",
    "Domain",
    "Equicorrelation",
    "EquicorrelationKnown",
    "Family",
    "GeneralTwoState",
    "Ising",
    "Kimura4",
    "Kimura6",
    "LinearModel",
    "ModelSpec",
    "ParametricModel",
    "ReflectingWalk",
    "Saturated",
    "StationaryScores",
    "SymmetricTwoState",
    "ThreeState",
    "kimura_equilibrium",
    "kimura_matrix",
    "make_model",
    "state_count",
    "stationary_scores",
    "transition_and_scores",
]
