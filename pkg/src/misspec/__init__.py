"""Least-false parameters under model misspecification."""
from .least_false import (
    DEFAULT_BASE,
    LOW_GAMMA_BASE,
    LeastFalseResult,
    SweepRow,
    TrueMechanism,
    default_eps_grid,
    eps_sweep,
    kimura6_truth,
    kl_distance,
    least_false,
    limit_functional,
    pl_triple_sum_form,
    pl_two_step_form,
    population_objective,
)

__all__ = [
    "DEFAULT_BASE",
    "LOW_GAMMA_BASE",
    "LeastFalseResult",
    "SweepRow",
    "TrueMechanism",
    "default_eps_grid",
    "eps_sweep",
    "kimura6_truth",
    "kl_distance",
    "least_false",
    "limit_functional",
    "pl_triple_sum_form",
    "pl_two_step_form",
    "population_objective",
]
