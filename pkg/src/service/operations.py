"""Async inference operations exposed as service tools."""
import logging
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from ..chain import (
    ChainPath,
    StateSpace,
    TransitionMatrix,
    TupleCounts,
    count_tuples,
    stationary_distribution,
)
from ..cli.commands import cmd_fit, cmd_simulate, sd_rows
from ..cli.run_config import RunConfig
from ..estimate import FitOptions
from ..likelihood import MethodSpec
from ..misspec import DEFAULT_BASE, eps_sweep
from ..models import Family, ModelSpec, make_model
from ..utils.errors import DataError, InvalidSpec

logger = logging.getLogger(__name__)

DEFAULT_METHODS = ["ml", "ql2", "pl"]


def _run_config(model: Dict[str, Any], **fields: Any) -> RunConfig:
    try:
        return RunConfig.model_validate({"model": model, **fields})
    except ValidationError as e:
        raise InvalidSpec(f"Invalid request: {e}") from e


def _counts_from_sequence(sequence: List[str], states: StateSpace, order: int) -> TupleCounts:
    lookup = {label: i for i, label in enumerate(states.labels)}
    unknown = sorted({str(s) for s in sequence if str(s) not in lookup})
    if unknown:
        raise DataError(f"Unknown states in sequence: {unknown}")
    if len(sequence) < order:
        raise DataError(f"Sequence of length {len(sequence)} is shorter than order {order}")
    path = ChainPath(states, np.array([lookup[str(s)] for s in sequence], dtype=np.intp))
    return count_tuples(path, order)


class InferenceOperations:
    """Handlers behind the service tools; each returns a JSON-ready value."""

    def __init__(self, fit_options: Optional[FitOptions] = None):
        self.fit_options = fit_options or FitOptions()

    async def stationary_distribution(self, matrix: List[List[float]]) -> Dict[str, Any]:
        """Equilibrium of a transition matrix, with its mixing diagnostics."""
        P = TransitionMatrix.from_array(matrix)
        pi = stationary_distribution(P).pi
        return {
            "pi": pi.tolist(),
            "second_eigenvalue_modulus": P.second_eigenvalue_modulus,
            "aperiodic": P.is_aperiodic,
        }

    async def simulate_chain(
        self, model: Dict[str, Any], theta: List[float], n: int, seed: int = 0
    ) -> Dict[str, Any]:
        config = _run_config(model, theta=theta, n=n, seed=seed)
        chain = cmd_simulate(config)
        return {"states": chain.labels(), "n": chain.n, "seed": seed}

    async def fit_counts(
        self,
        model: Dict[str, Any],
        method: str = "ml",
        counts: Optional[List[Any]] = None,
        sequence: Optional[List[str]] = None,
    ) -> Dict[str, Any]:
        """Fit from a tuple-count array or from a list of state labels."""
        config = _run_config(model, method=method, fit=self.fit_options.model_dump())
        if (counts is None) == (sequence is None):
            raise InvalidSpec("Give exactly one of counts or sequence")
        if counts is not None:
            tuples = TupleCounts.from_array(counts)
        else:
            states = make_model(config.model).states
            order = config.method_spec.required_order
            tuples = _counts_from_sequence(sequence or [], states, order)
        return cmd_fit(tuples, config)

    async def asymptotic_variance(
        self, model: Dict[str, Any], theta: List[float], methods: Optional[List[str]] = None
    ) -> List[Dict[str, Any]]:
        config = _run_config(model, theta=theta, methods=methods or DEFAULT_METHODS)
        spec = make_model(config.model)
        return sd_rows(spec, spec.check(config.require_theta()), config.method_specs)

    async def least_false_values(
        self,
        eps: List[float],
        methods: Optional[List[str]] = None,
        base: Optional[List[float]] = None,
    ) -> List[Dict[str, Any]]:
        """Kimura4 least-false parameters under the perturbed six-parameter truth."""
        model = make_model(ModelSpec(family=Family.KIMURA4))
        specs = [MethodSpec.parse(m) for m in methods or DEFAULT_METHODS]
        rows = eps_sweep(
            model, eps, specs, tuple(base) if base else DEFAULT_BASE, self.fit_options
        )
        return [row.as_dict(model.theta_names) for row in rows]
