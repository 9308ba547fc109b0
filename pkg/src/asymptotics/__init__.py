"""Limit distributions of the ML, QL and PL estimators."""
from .covariances import marginal_triplet_cov, pair_cov, triplet_cov
from .delta import (
    KIMURA_FOCUS_NAMES,
    DistanceEstimate,
    FocusParameter,
    asynchronous_distance,
    confidence_interval,
    coordinate,
    delta_method,
    focus_by_name,
    kimura_distance,
    kimura_distance_coefficients,
    kimura_focus,
    nonparametric_distance,
    stationary_probability,
)
from .ingredients import (
    MLIngredients,
    PLIngredients,
    QLIngredients,
    info_J,
    pl_ingredients,
    pl_quadruple_literal,
    ql_ingredients,
    two_step_scores,
)
from .montecarlo import MCSummary, mc_study, replication_seeds
from .variance import AvarResult, are, avar, sandwich

__all__ = [
    "KIMURA_FOCUS_NAMES",
    "AvarResult",
    "DistanceEstimate",
    "FocusParameter",
    "MCSummary",
    "MLIngredients",
    "PLIngredients",
    "QLIngredients",
    "are",
    "asynchronous_distance",
    "avar",
    "confidence_interval",
    "coordinate",
    "delta_method",
    "focus_by_name",
    "info_J",
    "kimura_distance",
    "kimura_distance_coefficients",
    "kimura_focus",
    "marginal_triplet_cov",
    "mc_study",
    "nonparametric_distance",
    "pair_cov",
    "pl_ingredients",
    "pl_quadruple_literal",
    "ql_ingredients",
    "replication_seeds",
    "sandwich",
    "stationary_probability",
    "triplet_cov",
    "two_step_scores",
]
