"""Build models from a ModelSpec."""
import logging

import numpy as np

from ..chain import StateSpace
from ..utils.errors import InvalidSpec
from ..utils.validation import validate_probability_vector
from .base import Family, ModelSpec, ParametricModel
from .families import (
    Equicorrelation,
    EquicorrelationKnown,
    GeneralTwoState,
    Ising,
    Kimura4,
    Kimura6,
    ReflectingWalk,
    Saturated,
    SymmetricTwoState,
    ThreeState,
)

logger = logging.getLogger(__name__)

FIXED_SIZES = {
    Family.SYMMETRIC_TWO_STATE: 2,
    Family.GENERAL_TWO_STATE: 2,
    Family.ISING: 2,
    Family.THREE_STATE: 3,
    Family.KIMURA4: 4,
    Family.KIMURA6: 4,
}


def state_count(spec: ModelSpec) -> int:
    """Number of states implied by a spec."""
    if spec.family in FIXED_SIZES:
        return FIXED_SIZES[spec.family]
    if spec.family == Family.REFLECTING_WALK:
        if spec.k_states is None:
            raise InvalidSpec("reflecting_walk needs k_states >= 3")
        return spec.k_states
    if spec.family == Family.EQUICORRELATION and spec.p_known is not None:
        return len(spec.p_known)
    if spec.n_states is None:
        raise InvalidSpec(f"{spec.family.value} needs n_states")
    return spec.n_states


def _states(spec: ModelSpec, size: int) -> StateSpace:
    if spec.labels is None:
        if spec.family in (Family.KIMURA4, Family.KIMURA6):
            return StateSpace.dna()
        return StateSpace.integers(size)
    return StateSpace(size, tuple(spec.labels))


def make_model(spec: ModelSpec) -> ParametricModel:
    """Instantiate the family named by `spec`."""
    size = state_count(spec)
    states = _states(spec, size)
    family = spec.family

    if spec.p_known is not None and family != Family.EQUICORRELATION:
        raise InvalidSpec("p_known only applies to the equicorrelation family")
    if spec.k_states is not None and family != Family.REFLECTING_WALK:
        raise InvalidSpec("k_states only applies to the reflecting_walk family")

    if family == Family.SYMMETRIC_TWO_STATE:
        model: ParametricModel = SymmetricTwoState(states)
    elif family == Family.GENERAL_TWO_STATE:
        model = GeneralTwoState(states)
    elif family == Family.THREE_STATE:
        model = ThreeState(states)
    elif family == Family.ISING:
        model = Ising(states)
    elif family == Family.REFLECTING_WALK:
        model = ReflectingWalk(size, states)
    elif family == Family.KIMURA4:
        model = Kimura4(states)
    elif family == Family.KIMURA6:
        model = Kimura6(states)
    elif family == Family.SATURATED:
        model = Saturated(states)
    elif family == Family.EQUICORRELATION:
        if spec.p_known is not None:
            p = np.asarray(spec.p_known, dtype=float)
            validate_probability_vector(p, tol=1e-9)
            if p.min() <= 0.0:
                raise InvalidSpec(f"p_known must be strictly positive: {spec.p_known}")
            model = EquicorrelationKnown(p / p.sum(), states)
        else:
            model = Equicorrelation(size, states)
    else:
        raise InvalidSpec(f"Unknown family: {family}")

    logger.debug(f"Built {model.name} model with parameters {model.theta_names}")
    return model
