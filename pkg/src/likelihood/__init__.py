"""ML, PL and QL objective functions."""
from .objectives import (
    MethodKind,
    MethodSpec,
    Objective,
    gradient,
    loglik_ml,
    loglik_pl,
    loglik_ql,
    pl_penalty,
    ql_penalty,
)

__all__ = [
    "MethodKind",
    "MethodSpec",
    "Objective",
    "gradient",
    "loglik_ml",
    "loglik_pl",
    "loglik_ql",
    "pl_penalty",
    "ql_penalty",
]
